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

#include "beaconlab/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace beaconlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double logsumexp(const Vector& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// Enumerated prior support with precomputed release-distribution parameters,
// so log rho_D(r|b) over the whole support costs O(|support| * m) per r.
class DensityCache {
 public:
  DensityCache(const ReleaseMechanism& mechanism, const Population& population,
               const MembershipPrior& prior)
      : mechanism_(&mechanism) {
    if (!mechanism.has_density() || mechanism.clip) {
      throw std::invalid_argument(
          "posterior: requires an unclipped density-supported mechanism");
    }
    prior.for_each([&](const MembershipVector& b, double lp) {
      support_.push_back(b);
      log_prior_.push_back(lp);
      const Vector x = clean_stats(population, b);
      if (mechanism.kind == ReleaseMechanism::Kind::gaussian) {
        means_.push_back(x + mechanism.mean_map.mean(x, b));
      } else {
        means_.push_back(x);
      }
    });
    if (support_.empty()) throw std::invalid_argument("posterior: empty prior support");
    if (mechanism.kind == ReleaseMechanism::Kind::gaussian) {
      log_norm_ = -0.5 * (kLog2Pi * mechanism.num_snvs +
                          mechanism.variances.array().log().sum());
    } else if (mechanism.kind == ReleaseMechanism::Kind::laplace) {
      log_norm_ = -mechanism.num_snvs * std::log(2.0 * mechanism.scale);
    }
  }

  int size() const { return static_cast<int>(support_.size()); }
  const MembershipVector& b(int i) const { return support_[i]; }
  double log_prior(int i) const { return log_prior_[i]; }

  double log_density(int i, const Vector& r) const {
    switch (mechanism_->kind) {
      case ReleaseMechanism::Kind::zero_noise:
        return (r - means_[i]).cwiseAbs().maxCoeff() <= 1e-12 ? 0.0 : kNegInf;
      case ReleaseMechanism::Kind::laplace:
        return log_norm_ - (r - means_[i]).cwiseAbs().sum() / mechanism_->scale;
      case ReleaseMechanism::Kind::gaussian:
        return log_norm_ -
               0.5 * ((r - means_[i]).array().square() /
                      mechanism_->variances.array())
                         .sum();
      default:
        throw std::logic_error("DensityCache: unsupported mechanism kind");
    }
  }

  // log (prior * density) for the whole support.
  Vector log_joint(const Vector& r) const {
    Vector out(size());
    for (int i = 0; i < size(); ++i) out[i] = log_prior_[i] + log_density(i, r);
    return out;
  }

 private:
  const ReleaseMechanism* mechanism_;
  std::vector<MembershipVector> support_;
  std::vector<double> log_prior_;
  std::vector<Vector> means_;
  double log_norm_ = 0.0;
};

PosteriorTable table_from_log_weights(std::vector<MembershipVector> support,
                                      Vector log_w, int num_individuals) {
  const double lse = logsumexp(log_w);
  if (!std::isfinite(lse)) {
    throw std::runtime_error("posterior: all weights underflowed to zero");
  }
  PosteriorTable table;
  table.support = std::move(support);
  table.log_weights = log_w.array() - lse;
  table.weights = table.log_weights.array().exp();
  table.marginals = Vector::Zero(num_individuals);
  for (size_t i = 0; i < table.support.size(); ++i) {
    table.marginals += table.weights[static_cast<int>(i)] *
                       table.support[i].bits.cast<double>();
  }
  const double w2 = table.weights.array().square().sum();
  table.ess = w2 > 0.0 ? 1.0 / w2 : 0.0;
  return table;
}

}  // namespace

PosteriorTable posterior(const ReleaseMechanism& mechanism, const Population& population,
                         const MembershipPrior& sigma, const Vector& release_values,
                         const PosteriorMethod& method) {
  if (method.kind == PosteriorMethod::Kind::enumerate_support) {
    DensityCache cache(mechanism, population, sigma);
    std::vector<MembershipVector> support;
    support.reserve(cache.size());
    for (int i = 0; i < cache.size(); ++i) support.push_back(cache.b(i));
    return table_from_log_weights(std::move(support), cache.log_joint(release_values),
                                  sigma.size());
  }
  // Self-normalized importance sampling with sigma as the proposal: weights
  // reduce to the likelihood alone.
  if (!mechanism.has_density() || mechanism.clip) {
    throw std::invalid_argument(
        "posterior: requires an unclipped density-supported mechanism");
  }
  Rng rng(method.seed);
  std::vector<MembershipVector> support;
  support.reserve(method.n_samples);
  Vector log_w(method.n_samples);
  for (long i = 0; i < method.n_samples; ++i) {
    MembershipVector b = sigma.sample(rng);
    log_w[i] = log_density(mechanism, population, b, release_values);
    support.push_back(std::move(b));
  }
  return table_from_log_weights(std::move(support), std::move(log_w), sigma.size());
}

AttackDecision threshold_best_response(const PosteriorTable& posterior_table,
                                       double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("threshold_best_response: gamma must lie in (0, 1)");
  }
  AttackDecision decision;
  decision.confidences = posterior_table.marginals;
  decision.claims.resize(posterior_table.marginals.size());
  for (int k = 0; k < posterior_table.marginals.size(); ++k) {
    decision.claims[k] = posterior_table.marginals[k] > gamma ? 1 : 0;
  }
  return decision;
}

McEstimate mirror_strategy_loss(const ReleaseMechanism& mechanism,
                                const Population& population,
                                const MembershipPrior& sigma, const MembershipPrior& q,
                                long n_samples, std::uint64_t seed) {
  DensityCache cache(mechanism, population, sigma);
  std::vector<MembershipVector> support;
  support.reserve(cache.size());
  for (int i = 0; i < cache.size(); ++i) support.push_back(cache.b(i));
  Rng rng(seed);
  RunningStat stat;
  for (long n = 0; n < n_samples; ++n) {
    const MembershipVector b = q.sample(rng);
    const Release release = sample_release(mechanism, population, b, rng);
    PosteriorTable table =
        table_from_log_weights(support, cache.log_joint(release.values), sigma.size());
    stat.add(table.marginals.dot(b.bits.cast<double>()));
  }
  return stat.estimate();
}

LossReport privacy_loss(const ReleaseMechanism& mechanism, const Population& population,
                        const AttackStrategy& attacker, const MembershipPrior& q,
                        long n_samples, std::uint64_t seed) {
  Rng rng(seed);
  RunningStat stat;
  long claims_on_members = 0, members = 0;
  long claims_on_nonmembers = 0, nonmembers = 0;
  for (long n = 0; n < n_samples; ++n) {
    const MembershipVector b = q.sample(rng);
    const Release release = sample_release(mechanism, population, b, rng);
    const AttackDecision decision = attacker(release.values);
    double hits = 0.0;
    for (int k = 0; k < b.size(); ++k) {
      if (b.bits[k]) {
        ++members;
        claims_on_members += decision.claims[k];
        hits += decision.claims[k];
      } else {
        ++nonmembers;
        claims_on_nonmembers += decision.claims[k];
      }
    }
    stat.add(hits);
  }
  LossReport report;
  report.loss = stat.estimate();
  report.tpr = members > 0 ? static_cast<double>(claims_on_members) / members : 0.0;
  report.fpr =
      nonmembers > 0 ? static_cast<double>(claims_on_nonmembers) / nonmembers : 0.0;
  return report;
}

namespace {

// Per-individual marginal log-likelihood ratio of the release under the two
// membership hypotheses, nuisance bits integrated out under the prior:
//   Lambda_k(r) = log sum_{b: b_k=0} q(b) rho(r|b) - log sum_{b: b_k=1} ...
// Prior-mass constants shift Lambda_k uniformly and are absorbed by the
// calibrated thresholds.
class MarginalLrt {
 public:
  MarginalLrt(const ReleaseMechanism& mechanism, const Population& population,
              const MembershipPrior& q)
      : cache_(mechanism, population, q), num_individuals_(q.size()) {
    arm0_.resize(num_individuals_);
    arm1_.resize(num_individuals_);
    for (int i = 0; i < cache_.size(); ++i) {
      for (int k = 0; k < num_individuals_; ++k) {
        (cache_.b(i).bits[k] ? arm1_[k] : arm0_[k]).push_back(i);
      }
    }
  }

  Vector scores(const Vector& r) const {
    const Vector joint = cache_.log_joint(r);
    Vector lambda(num_individuals_);
    for (int k = 0; k < num_individuals_; ++k) {
      lambda[k] = lse_over(joint, arm0_[k]) - lse_over(joint, arm1_[k]);
    }
    return lambda;
  }

 private:
  static double lse_over(const Vector& v, const std::vector<int>& idx) {
    if (idx.empty()) return kNegInf;
    double mx = kNegInf;
    for (int i : idx) mx = std::max(mx, v[i]);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (int i : idx) s += std::exp(v[i] - mx);
    return mx + std::log(s);
  }

  DensityCache cache_;
  int num_individuals_;
  std::vector<std::vector<int>> arm0_;
  std::vector<std::vector<int>> arm1_;
};

double quantile_of_sorted(std::vector<double>& values, double alpha) {
  std::sort(values.begin(), values.end());
  const long n = static_cast<long>(values.size());
  const long idx = std::clamp<long>(
      static_cast<long>(std::ceil(alpha * static_cast<double>(n))) - 1, 0, n - 1);
  return values[idx];
}

}  // namespace

AlignmentReport check_aligned(const ReleaseMechanism& mechanism,
                              const Population& population, const MembershipPrior& q,
                              const MembershipPrior& sigma, long n_samples,
                              std::uint64_t seed) {
  AlignmentReport report;
  report.loss_sigma = mirror_strategy_loss(mechanism, population, sigma, q, n_samples, seed);
  report.loss_q = mirror_strategy_loss(mechanism, population, q, q, n_samples, seed);
  report.non_informative = sigma.kind() == MembershipPrior::Kind::uniform;
  const double slack = 3.0 * std::sqrt(report.loss_sigma.se * report.loss_sigma.se +
                                       report.loss_q.se * report.loss_q.se);
  report.aligned =
      report.non_informative || report.loss_sigma.value <= report.loss_q.value + slack;
  return report;
}

std::string OrderingReport::to_json() const {
  std::ostringstream os;
  os.precision(10);
  auto entry = [&os](const char* name, const McEstimate& e) {
    os << "\"" << name << "\": {\"loss\": " << e.value << ", \"se\": " << e.se
       << ", \"samples\": " << e.n << "}";
  };
  os << "{";
  entry("bayes", loss_bayes);
  os << ", ";
  entry("optimal_lrt", loss_optimal);
  os << ", ";
  entry("adaptive_lrt", loss_adaptive);
  os << ", ";
  entry("naive_lrt", loss_naive);
  os << ", \"adaptive_offset\": " << adaptive_offset
     << ", \"adaptive_mean_significance\": " << adaptive_mean_significance
     << ", \"naive_achieved_significance\": " << naive_achieved_significance
     << ", \"bayes_ge_optimal\": " << (bayes_ge_optimal ? "true" : "false")
     << ", \"optimal_ge_adaptive\": " << (optimal_ge_adaptive ? "true" : "false")
     << ", \"adaptive_ge_naive\": " << (adaptive_ge_naive ? "true" : "false") << "}";
  return os.str();
}

OrderingReport verify_theorem1_ordering(const ReleaseMechanism& mechanism,
                                        const Population& population,
                                        const MembershipPrior& q,
                                        const MembershipPrior& sigma,
                                        const OrderingParams& params) {
  const int kk = population.num_individuals();
  const int m = population.num_snvs();
  const double alpha = params.alpha;
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("verify_theorem1_ordering: alpha must lie in (0, 1)");
  }

  MarginalLrt marginal(mechanism, population, q);
  DensityCache sigma_cache(mechanism, population, sigma);
  std::vector<MembershipVector> sigma_support;
  for (int i = 0; i < sigma_cache.size(); ++i) sigma_support.push_back(sigma_cache.b(i));

  // Reference pool for the adaptive attack, drawn from the same reference
  // AAFs and disjoint from the universe by construction.
  Rng ref_rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
  Matrix reference(params.reference_pool, m);
  {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < params.reference_pool; ++i) {
      for (int j = 0; j < m; ++j) {
        reference(i, j) = u(ref_rng) < population.reference_aafs[j] ? 1.0 : 0.0;
      }
    }
  }
  const int adaptive_n =
      params.adaptive_n > 0
          ? params.adaptive_n
          : std::max(1, static_cast<int>(0.05 * params.reference_pool));

  // The alpha-LRT of the ordering is level alpha for every individual, so
  // all three LRT-family attacks are calibrated per k: the naive thresholds
  // on defense-free draws, the optimal and adaptive ones on mechanism draws
  // (the adaptive one through a per-k additive offset to tau_N, the exact
  // solution of the mean-significance bisection).
  const auto target_lrs = [&population](const Vector& released, double floor) {
    const Vector x = clamp_stats(released, floor).values;
    Vector out(population.num_individuals());
    for (int k = 0; k < population.num_individuals(); ++k) {
      out[k] = lrs(population.genotypes.row(k).transpose(),
                   population.reference_aafs, x);
    }
    return out;
  };

  std::vector<std::vector<double>> naive_null(kk);
  {
    Rng naive_rng(params.seed ^ 0xb5297a4d3f8c2d01ULL);
    for (long n = 0; n < params.n_calibration; ++n) {
      const MembershipVector b = q.sample(naive_rng);
      const Vector x = clean_stats(population, b);
      const Vector ell =
          target_lrs(x, default_clamp_floor(std::max(1, b.count())));
      for (int k = 0; k < kk; ++k) {
        if (!b.bits[k]) naive_null[k].push_back(ell[k]);
      }
    }
  }

  std::vector<std::vector<double>> lambda_null(kk);
  std::vector<std::vector<double>> adaptive_null(kk);  // ell_k - tau_N draws
  Rng cal_rng(params.seed ^ 0x6a09e667f3bcc909ULL);
  for (long n = 0; n < params.n_calibration; ++n) {
    const MembershipVector b = q.sample(cal_rng);
    const Release release = sample_release(mechanism, population, b, cal_rng);
    const Vector lambda = marginal.scores(release.values);
    const double floor = default_clamp_floor(std::max(1, b.count()));
    const Vector x = clamp_stats(release.values, floor).values;
    Vector ref_scores(reference.rows());
    for (int i = 0; i < reference.rows(); ++i) {
      ref_scores[i] =
          lrs(reference.row(i).transpose(), population.reference_aafs, x);
    }
    const double tau_n = adaptive_threshold(ref_scores, adaptive_n);
    const Vector ell = target_lrs(release.values, floor);
    for (int k = 0; k < kk; ++k) {
      if (!b.bits[k]) {
        lambda_null[k].push_back(lambda[k]);
        adaptive_null[k].push_back(ell[k] - tau_n);
      }
    }
  }

  Vector opt_tau(kk), naive_tau(kk), adaptive_offset(kk);
  for (int k = 0; k < kk; ++k) {
    if (lambda_null[k].empty() || naive_null[k].empty()) {
      throw std::runtime_error(
          "verify_theorem1_ordering: no non-member calibration draws for some k");
    }
    opt_tau[k] = quantile_of_sorted(lambda_null[k], alpha);
    naive_tau[k] = quantile_of_sorted(naive_null[k], alpha);
    adaptive_offset[k] = quantile_of_sorted(adaptive_null[k], alpha);
  }

  // Evaluation pass: all four attackers scored on common draws.
  Rng eval_rng(params.seed);
  RunningStat stat_bayes, stat_opt, stat_adp, stat_naive;
  long naive_false = 0, adaptive_false = 0, nonmembers = 0;
  for (long n = 0; n < params.n_samples; ++n) {
    const MembershipVector b = q.sample(eval_rng);
    const Release release = sample_release(mechanism, population, b, eval_rng);
    const Vector bd = b.bits.cast<double>();

    PosteriorTable table = table_from_log_weights(
        sigma_support, sigma_cache.log_joint(release.values), sigma.size());
    stat_bayes.add(table.marginals.dot(bd));

    const Vector lambda = marginal.scores(release.values);
    double opt_hits = 0.0;
    for (int k = 0; k < kk; ++k) {
      opt_hits += (lambda[k] <= opt_tau[k]) ? bd[k] : 0.0;
    }
    stat_opt.add(opt_hits);

    const double floor = default_clamp_floor(std::max(1, b.count()));
    const Vector x = clamp_stats(release.values, floor).values;
    Vector ref_scores(reference.rows());
    for (int i = 0; i < reference.rows(); ++i) {
      ref_scores[i] =
          lrs(reference.row(i).transpose(), population.reference_aafs, x);
    }
    const double tau_n = adaptive_threshold(ref_scores, adaptive_n);
    const Vector ell = target_lrs(release.values, floor);
    double adp_hits = 0.0, naive_hits = 0.0;
    for (int k = 0; k < kk; ++k) {
      const bool adp_claim = ell[k] - tau_n <= adaptive_offset[k];
      const bool naive_claim = ell[k] <= naive_tau[k];
      adp_hits += adp_claim ? bd[k] : 0.0;
      naive_hits += naive_claim ? bd[k] : 0.0;
      if (!b.bits[k]) {
        ++nonmembers;
        adaptive_false += adp_claim;
        naive_false += naive_claim;
      }
    }
    stat_adp.add(adp_hits);
    stat_naive.add(naive_hits);
  }

  OrderingReport report;
  report.loss_bayes = stat_bayes.estimate();
  report.loss_optimal = stat_opt.estimate();
  report.loss_adaptive = stat_adp.estimate();
  report.loss_naive = stat_naive.estimate();
  report.adaptive_offset = adaptive_offset.mean();
  report.adaptive_mean_significance =
      nonmembers > 0 ? static_cast<double>(adaptive_false) / nonmembers : 0.0;
  report.naive_achieved_significance =
      nonmembers > 0 ? static_cast<double>(naive_false) / nonmembers : 0.0;
  const auto holds = [](const McEstimate& hi_loss, const McEstimate& lo_loss) {
    const double slack = 3.0 * std::sqrt(hi_loss.se * hi_loss.se + lo_loss.se * lo_loss.se);
    return hi_loss.value >= lo_loss.value - slack;
  };
  report.bayes_ge_optimal = holds(report.loss_bayes, report.loss_optimal);
  report.optimal_ge_adaptive = holds(report.loss_optimal, report.loss_adaptive);
  report.adaptive_ge_naive = holds(report.loss_adaptive, report.loss_naive);
  return report;
}

}  // namespace beaconlab
