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

#ifndef BEACONLAB_BAYES_HPP_
#define BEACONLAB_BAYES_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "beaconlab/lrt.hpp"
#include "beaconlab/mechanisms.hpp"
#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

/// Normalized posterior over membership vectors given a release.
struct PosteriorTable {
  std::vector<MembershipVector> support;
  Vector log_weights;  // log-sum-exp normalized to 0
  Vector weights;
  Vector marginals;  // mu_k = P(b_k = 1 | r)
  double ess = 0.0;  // effective sample size; |support| under enumeration
};

struct PosteriorMethod {
  enum class Kind { enumerate_support, importance_sampling };
  Kind kind = Kind::enumerate_support;
  long n_samples = 20000;  // importance sampling only
  std::uint64_t seed = 1;
};

struct BayesAttackerConfig {
  double gamma = 0.5;  // operational-cost weight, in (0, 1)
  PosteriorMethod posterior_method;
};

/// Bayes update of sigma given the release. Enumeration requires sigma with
/// enumerable nonempty support (product kinds: K <= 20); importance sampling
/// uses sigma as the proposal and reports the effective sample size. Throws
/// when every weight underflows to zero.
PosteriorTable posterior(const ReleaseMechanism& mechanism, const Population& population,
                         const MembershipPrior& sigma, const Vector& release_values,
                         const PosteriorMethod& method = PosteriorMethod{});

/// Interim best response of the per-individual decomposition: claims
/// s_k = 1 iff mu_k > gamma (ties abstain), confidences are the marginals.
AttackDecision threshold_best_response(const PosteriorTable& posterior_table,
                                       double gamma);

/// Z(g_D, sigma): Monte Carlo over b ~ q, r ~ rho(.|b) of the mirror
/// strategy's expected hits sum_k mu_k(r) b_k.
McEstimate mirror_strategy_loss(const ReleaseMechanism& mechanism,
                                const Population& population,
                                const MembershipPrior& sigma, const MembershipPrior& q,
                                long n_samples, std::uint64_t seed);

/// Any release-to-decision map usable by the loss estimator.
using AttackStrategy = std::function<AttackDecision(const Vector& release_values)>;

struct LossReport {
  McEstimate loss;
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Monte Carlo E[sum_k s_k b_k] with per-individual TPR/FPR tallies.
LossReport privacy_loss(const ReleaseMechanism& mechanism, const Population& population,
                        const AttackStrategy& attacker, const MembershipPrior& q,
                        long n_samples, std::uint64_t seed);

struct AlignmentReport {
  McEstimate loss_sigma;  // Z(g_D, sigma)
  McEstimate loss_q;      // Z(g_D, q)
  bool non_informative = false;
  bool aligned = false;
};

/// Empirical alignment check of a subjective prior: uniform priors are
/// non-informative, otherwise sigma counts as (weakly) informative when the
/// mirror best response under sigma loses no more than the one under q,
/// within three combined standard errors.
AlignmentReport check_aligned(const ReleaseMechanism& mechanism,
                              const Population& population, const MembershipPrior& q,
                              const MembershipPrior& sigma, long n_samples,
                              std::uint64_t seed);

struct OrderingParams {
  double alpha = 0.05;
  long n_samples = 20000;       // evaluation draws
  long n_calibration = 20000;   // threshold-calibration draws
  int reference_pool = 200;     // adaptive attack reference individuals
  int adaptive_n = 0;           // 0: 5% of the pool
  std::uint64_t seed = 1;
};

struct OrderingReport {
  McEstimate loss_bayes;     // L^sigma = Z(g_D, sigma)
  McEstimate loss_optimal;   // optimal alpha-LRT
  McEstimate loss_adaptive;  // adaptive threshold, mean significance alpha
  McEstimate loss_naive;     // fixed threshold calibrated with no defense
  double adaptive_offset = 0.0;
  double adaptive_mean_significance = 0.0;
  double naive_achieved_significance = 0.0;
  bool bayes_ge_optimal = false;
  bool optimal_ge_adaptive = false;
  bool adaptive_ge_naive = false;
  std::string to_json() const;
};

/// Estimates the four losses of the privacy-robustness ordering under the
/// same mechanism: the sigma-Bayesian worst case via the mirror strategy,
/// the per-individual Neyman-Pearson test at significance alpha (nuisance
/// bits marginalized under q, thresholds calibrated per arm), the adaptive
/// threshold with its mean significance bisected to alpha, and the fixed
/// threshold calibrated to alpha assuming no defense. Inequality flags allow
/// slack of three combined standard errors.
OrderingReport verify_theorem1_ordering(const ReleaseMechanism& mechanism,
                                        const Population& population,
                                        const MembershipPrior& q,
                                        const MembershipPrior& sigma,
                                        const OrderingParams& params);

}  // namespace beaconlab

#endif  // BEACONLAB_BAYES_HPP_
