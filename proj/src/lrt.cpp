//
// Copyright 2026 The beaconlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "beaconlab/lrt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "beaconlab/normal.hpp"

namespace beaconlab {

ClampedStats clamp_stats(const Vector& released, double x_min) {
  // x_min = 0.5 (a singleton beacon's floor) collapses everything to 1/2.
  if (!(x_min > 0.0 && x_min <= 0.5)) {
    throw std::invalid_argument("clamp_stats: x_min must lie in (0, 0.5]");
  }
  ClampedStats out;
  out.values = released;
  for (int j = 0; j < released.size(); ++j) {
    if (released[j] < x_min) {
      out.values[j] = x_min;
      ++out.clamped;
    } else if (released[j] > 1.0 - x_min) {
      out.values[j] = 1.0 - x_min;
      ++out.clamped;
    }
  }
  return out;
}

double default_clamp_floor(int beacon_size) {
  if (beacon_size < 1) {
    throw std::invalid_argument("default_clamp_floor: beacon size must be at least 1");
  }
  return 1.0 / (2.0 * static_cast<double>(beacon_size));
}

double lrs(const Eigen::Ref<const Vector>& genotype_row, const Vector& reference_aafs,
           const Vector& released_stats) {
  const int m = static_cast<int>(genotype_row.size());
  if (reference_aafs.size() != m || released_stats.size() != m) {
    throw std::invalid_argument("lrs: length mismatch");
  }
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    const double p = reference_aafs[j];
    const double x = released_stats[j];
    total += genotype_row[j] * (std::log(p) - std::log(x)) +
             (1.0 - genotype_row[j]) * (std::log1p(-p) - std::log1p(-x));
  }
  return total;
}

Vector lrs_all(const Population& population, const Vector& released_stats,
               double clamp_floor) {
  const Vector x = clamp_stats(released_stats, clamp_floor).values;
  // Sum_j d_kj (log p_j - log x_j) + (1 - d_kj)(log(1-p_j) - log(1-x_j))
  // as one matrix-vector product plus a constant column.
  Vector log_ratio1(x.size()), log_ratio0(x.size());
  for (int j = 0; j < x.size(); ++j) {
    const double p = population.reference_aafs[j];
    log_ratio1[j] = std::log(p) - std::log(x[j]);
    log_ratio0[j] = std::log1p(-p) - std::log1p(-x[j]);
  }
  Vector out = population.genotypes * (log_ratio1 - log_ratio0);
  out.array() += log_ratio0.sum();
  return out;
}

AttackDecision fixed_threshold_attack(const Population& population,
                                      const Vector& released_stats, double tau,
                                      double clamp_floor) {
  const Vector scores = lrs_all(population, released_stats, clamp_floor);
  AttackDecision decision;
  decision.confidences = -scores;
  decision.claims.resize(scores.size());
  for (int k = 0; k < scores.size(); ++k) {
    decision.claims[k] = scores[k] <= tau ? 1 : 0;
  }
  return decision;
}

CalibrationReport calibrate_threshold(const Population& population,
                                      const ReleaseMechanism& mechanism,
                                      const MembershipPrior& prior, double alpha,
                                      long n_samples, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("calibrate_threshold: alpha must lie in (0, 1]");
  }
  if (n_samples < 1000) {
    throw std::invalid_argument("calibrate_threshold: need at least 1000 samples");
  }
  Rng rng(seed);
  std::vector<double> scores;
  scores.reserve(n_samples);
  const int kk = population.num_individuals();
  std::uniform_int_distribution<int> pick(0, kk - 1);
  while (static_cast<long>(scores.size()) < n_samples) {
    const MembershipVector b = prior.sample_nonempty(rng);
    if (b.count() == kk) continue;  // no non-member to score
    const Release release = sample_release(mechanism, population, b, rng);
    int k = pick(rng);
    while (b.bits[k]) k = pick(rng);
    const Vector x = clamp_stats(release.values, default_clamp_floor(b.count())).values;
    scores.push_back(lrs(population.genotypes.row(k).transpose(),
                         population.reference_aafs, x));
  }
  std::sort(scores.begin(), scores.end());
  if (scores.front() == scores.back()) {
    throw std::runtime_error("calibrate_threshold: degenerate LRS distribution");
  }
  const long idx = std::clamp<long>(
      static_cast<long>(std::ceil(alpha * static_cast<double>(n_samples))) - 1, 0,
      n_samples - 1);
  CalibrationReport report;
  report.tau = scores[idx];
  report.samples = n_samples;
  long hits = 0;
  for (double s : scores) hits += s <= report.tau;
  report.achieved_fpr = static_cast<double>(hits) / static_cast<double>(n_samples);
  return report;
}

double adaptive_threshold(const Vector& reference_lrs_values, int n) {
  const int total = static_cast<int>(reference_lrs_values.size());
  if (n < 1 || n > total) {
    throw std::invalid_argument("adaptive_threshold: N must lie in [1, #reference]");
  }
  std::vector<double> values(reference_lrs_values.data(),
                             reference_lrs_values.data() + total);
  std::nth_element(values.begin(), values.begin() + n - 1, values.end());
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += values[i];
  return sum / static_cast<double>(n);
}

AttackDecision adaptive_attack(const Population& population, const Vector& released_stats,
                               const Matrix& reference_genotypes, int n,
                               double clamp_floor) {
  if (reference_genotypes.rows() < 1) {
    throw std::invalid_argument("adaptive_attack: reference set must be nonempty");
  }
  if (reference_genotypes.cols() != population.num_snvs()) {
    throw std::invalid_argument("adaptive_attack: reference SNV count mismatch");
  }
  const Vector x = clamp_stats(released_stats, clamp_floor).values;
  const int n_ref = static_cast<int>(reference_genotypes.rows());
  Vector ref_scores(n_ref);
  for (int i = 0; i < n_ref; ++i) {
    ref_scores[i] = lrs(reference_genotypes.row(i).transpose(),
                        population.reference_aafs, x);
  }
  const double tau = adaptive_threshold(ref_scores, n);
  // Target scores go through the same summation path as the reference
  // scores so exact ties behave as ties.
  Vector scores(population.num_individuals());
  for (int k = 0; k < population.num_individuals(); ++k) {
    scores[k] = lrs(population.genotypes.row(k).transpose(),
                    population.reference_aafs, x);
  }
  AttackDecision decision;
  decision.confidences = Vector::Constant(scores.size(), tau) - scores;
  decision.claims.resize(scores.size());
  for (int k = 0; k < scores.size(); ++k) {
    decision.claims[k] = scores[k] <= tau ? 1 : 0;
  }
  return decision;
}

namespace {

struct AdjacentArms {
  Vector mean0;  // release mean with b_k = 0 (Gaussian mechanisms)
  Vector mean1;  // release mean with b_k = 1
  MembershipVector b0;
  MembershipVector b1;
};

AdjacentArms adjacent_arms(const ReleaseMechanism& mechanism, const Population& population,
                           const MembershipVector& conditioning_b, int k) {
  AdjacentArms arms;
  arms.b0 = conditioning_b;
  arms.b0.bits[k] = 0;
  arms.b1 = conditioning_b;
  arms.b1.bits[k] = 1;
  if (mechanism.kind == ReleaseMechanism::Kind::gaussian) {
    const Vector x0 = clean_stats(population, arms.b0);
    const Vector x1 = clean_stats(population, arms.b1);
    arms.mean0 = x0 + mechanism.mean_map.mean(x0, arms.b0);
    arms.mean1 = x1 + mechanism.mean_map.mean(x1, arms.b1);
  }
  return arms;
}

}  // namespace

double adjacent_effective_mu(const ReleaseMechanism& mechanism,
                             const Population& population,
                             const MembershipVector& conditioning_b, int k) {
  if (mechanism.kind != ReleaseMechanism::Kind::gaussian) {
    throw std::invalid_argument("adjacent_effective_mu: gaussian mechanism required");
  }
  const AdjacentArms arms = adjacent_arms(mechanism, population, conditioning_b, k);
  const Vector diff = arms.mean1 - arms.mean0;
  return std::sqrt((diff.array().square() / mechanism.variances.array()).sum());
}

double optimal_lrt_power_gaussian(const ReleaseMechanism& mechanism,
                                  const Population& population,
                                  const MembershipVector& conditioning_b, int k,
                                  double alpha) {
  const double mu = adjacent_effective_mu(mechanism, population, conditioning_b, k);
  return 1.0 - normal_cdf(normal_quantile(1.0 - alpha) - mu);
}

AttackDecision optimal_lrt_attack(const ReleaseMechanism& mechanism,
                                  const Population& population,
                                  const Vector& released_stats, double alpha,
                                  const MembershipVector& conditioning_b,
                                  long fallback_samples, std::uint64_t fallback_seed) {
  if (!mechanism.has_density() || mechanism.clip) {
    throw std::invalid_argument(
        "optimal_lrt_attack: requires an unclipped density-supported mechanism");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("optimal_lrt_attack: alpha must lie in (0, 1)");
  }
  const int kk = population.num_individuals();
  AttackDecision decision;
  decision.confidences.resize(kk);
  decision.claims.resize(kk);
  for (int k = 0; k < kk; ++k) {
    const AdjacentArms arms = adjacent_arms(mechanism, population, conditioning_b, k);
    // Lambda(r) = log rho(r | b_k=0) - log rho(r | b_k=1); claim iff <= tau.
    double lambda, tau;
    if (mechanism.kind == ReleaseMechanism::Kind::gaussian) {
      const Vector diff = arms.mean1 - arms.mean0;
      const double mu2 = (diff.array().square() / mechanism.variances.array()).sum();
      if (mu2 == 0.0) {
        // The arms coincide; no deterministic threshold rule attains level
        // alpha on a constant statistic, so the test abstains.
        decision.confidences[k] = 0.0;
        decision.claims[k] = 0;
        continue;
      }
      const double mu = std::sqrt(mu2);
      // Under the non-member arm, Lambda ~ N(mu^2/2, mu^2).
      tau = 0.5 * mu2 + mu * normal_quantile(alpha);
      lambda = log_density(mechanism, population, arms.b0, released_stats) -
               log_density(mechanism, population, arms.b1, released_stats);
    } else {
      lambda = log_density(mechanism, population, arms.b0, released_stats) -
               log_density(mechanism, population, arms.b1, released_stats);
      Rng rng(fallback_seed + static_cast<std::uint64_t>(k));
      std::vector<double> sims;
      sims.reserve(fallback_samples);
      for (long i = 0; i < fallback_samples; ++i) {
        const Release sim = sample_release(mechanism, population, arms.b0, rng);
        sims.push_back(log_density(mechanism, population, arms.b0, sim.values) -
                       log_density(mechanism, population, arms.b1, sim.values));
      }
      std::sort(sims.begin(), sims.end());
      if (sims.front() == sims.back()) {
        decision.confidences[k] = 0.0;
        decision.claims[k] = 0;
        continue;
      }
      const long idx = std::clamp<long>(
          static_cast<long>(std::ceil(alpha * static_cast<double>(fallback_samples))) - 1,
          0, fallback_samples - 1);
      tau = sims[idx];
    }
    decision.confidences[k] = tau - lambda;
    decision.claims[k] = lambda <= tau ? 1 : 0;
  }
  return decision;
}

}  // namespace beaconlab
