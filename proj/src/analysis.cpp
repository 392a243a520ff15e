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

#include "beaconlab/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "beaconlab/bayes.hpp"
#include "beaconlab/lrt.hpp"
#include "beaconlab/normal.hpp"

namespace beaconlab {

double gaussian_tradeoff(double mu, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("gaussian_tradeoff: alpha must lie in (0, 1)");
  }
  if (mu < 0.0) throw std::invalid_argument("gaussian_tradeoff: mu must be nonnegative");
  return normal_cdf(normal_quantile(1.0 - alpha) - mu);
}

std::vector<TradeoffPoint> gaussian_tradeoff_curve(double mu, int n_points) {
  if (n_points < 2) throw std::invalid_argument("gaussian_tradeoff_curve: need >= 2 points");
  std::vector<TradeoffPoint> curve;
  curve.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double alpha = (i + 1.0) / (n_points + 1.0);
    curve.push_back({alpha, gaussian_tradeoff(mu, alpha)});
  }
  return curve;
}

double compose_effective_mu(const Vector& per_snv_shifts, const Vector& variance_vector) {
  if (per_snv_shifts.size() != variance_vector.size()) {
    throw std::invalid_argument("compose_effective_mu: length mismatch");
  }
  if ((variance_vector.array() <= 0.0).any()) {
    throw std::invalid_argument("compose_effective_mu: variances must be positive");
  }
  return std::sqrt(
      (per_snv_shifts.array().square() / variance_vector.array()).sum());
}

namespace {

void check_m_hat(const Vector& m_hat) {
  if (m_hat.size() < 1 || (m_hat.array() <= 0.0).any()) {
    throw std::invalid_argument("m_hat entries must be positive");
  }
}

}  // namespace

double lemma1_f(double alpha, double beta, const Vector& m_hat) {
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("lemma1_f: alpha and beta must lie strictly in (0, 1)");
  }
  check_m_hat(m_hat);
  const double v_bar = m_hat.array().square().sum();
  const double m_bar = 0.5 * v_bar;
  const double z = normal_quantile(1.0 - alpha) + normal_quantile(1.0 - beta);
  return z * z * v_bar / (4.0 * m_bar * m_bar);
}

double lemma1_f_composition_variant(const Vector& m_hat) {
  check_m_hat(m_hat);
  const double v_bar = m_hat.array().square().sum();
  const double m_bar = 0.5 * v_bar;
  const double z = 2.0 * m_bar / std::sqrt(v_bar);
  return z * z * v_bar / (4.0 * m_bar * m_bar);
}

bool theorem2_condition(double alpha, double mu_0_given_1, int num_snvs,
                        const Vector& m_hat) {
  return lemma1_f(alpha, mu_0_given_1, m_hat) >= static_cast<double>(num_snvs);
}

McEstimate mu_0_given_1(const ReleaseMechanism& mechanism, const Population& population,
                        const MembershipPrior& sigma, const MembershipVector& conditioning,
                        long n_samples, std::uint64_t seed) {
  if (conditioning.size() != population.num_individuals()) {
    throw std::invalid_argument("mu_0_given_1: conditioning length mismatch");
  }
  if (!mechanism.has_density() || mechanism.clip) {
    throw std::invalid_argument(
        "mu_0_given_1: requires an unclipped density-supported mechanism");
  }
  const int kk = population.num_individuals();
  McEstimate best;
  best.value = -1.0;
  for (int k = 0; k < kk; ++k) {
    MembershipVector arm = conditioning;
    arm.bits[k] = 1;
    Rng rng(seed + static_cast<std::uint64_t>(k));
    RunningStat stat;
    for (long n = 0; n < n_samples; ++n) {
      const Release release = sample_release(mechanism, population, arm, rng);
      const PosteriorTable table =
          posterior(mechanism, population, sigma, release.values);
      stat.add(1.0 - table.marginals[k]);
    }
    if (stat.mean() > best.value) best = stat.estimate();
  }
  return best;
}

DeltaCriterion delta_criterion(const ReleaseMechanism& mechanism,
                               const Population& population,
                               const MembershipPrior& sigma, const MembershipPrior& q,
                               double alpha, int target_k, long n_samples,
                               std::uint64_t seed) {
  if (mechanism.kind != ReleaseMechanism::Kind::gaussian) {
    throw std::invalid_argument("delta_criterion: gaussian mechanism required");
  }
  if (target_k < 0 || target_k >= population.num_individuals()) {
    throw std::invalid_argument("delta_criterion: target_k out of range");
  }
  // Expected optimal-LRT trade-off: the summand depends on the non-target
  // bits only, so draws of b_k are overridden by the two arms.
  Rng rng_beta(seed ^ 0x517cc1b727220a95ULL);
  RunningStat beta_stat;
  for (long n = 0; n < n_samples; ++n) {
    const MembershipVector b = q.sample(rng_beta);
    const double mu = adjacent_effective_mu(mechanism, population, b, target_k);
    beta_stat.add(gaussian_tradeoff(mu, alpha));
  }
  // Expected posterior miss probability on the member arm.
  Rng rng_mu(seed ^ 0x2545f4914f6cdd1dULL);
  RunningStat mu_stat;
  for (long n = 0; n < n_samples; ++n) {
    MembershipVector arm = q.sample(rng_mu);
    arm.bits[target_k] = 1;
    const Release release = sample_release(mechanism, population, arm, rng_mu);
    const PosteriorTable table = posterior(mechanism, population, sigma, release.values);
    mu_stat.add(1.0 - table.marginals[target_k]);
  }
  DeltaCriterion out;
  out.beta_term = beta_stat.estimate();
  out.mu_term = mu_stat.estimate();
  out.delta = out.mu_term.value - out.beta_term.value;
  out.se = std::sqrt(out.mu_term.se * out.mu_term.se +
                     out.beta_term.se * out.beta_term.se);
  return out;
}

double gdp_to_dp(double mu, double epsilon) {
  if (!(mu > 0.0)) throw std::invalid_argument("gdp_to_dp: mu must be positive");
  if (epsilon < 0.0) throw std::invalid_argument("gdp_to_dp: epsilon must be nonnegative");
  return normal_cdf(-epsilon / mu + 0.5 * mu) -
         std::exp(epsilon) * normal_cdf(-epsilon / mu - 0.5 * mu);
}

double composed_gdp_mu(const Vector& m_hat) {
  check_m_hat(m_hat);
  return std::sqrt(m_hat.array().square().sum());
}

}  // namespace beaconlab
