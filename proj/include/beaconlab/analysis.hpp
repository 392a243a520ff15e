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

#ifndef BEACONLAB_ANALYSIS_HPP_
#define BEACONLAB_ANALYSIS_HPP_

#include <cstdint>
#include <vector>

#include "beaconlab/mechanisms.hpp"
#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

/// One point on a hypothesis-testing trade-off curve.
struct TradeoffPoint {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Canonical Gaussian testing pair (N(0,1), N(mu,1)).
struct GaussianPair {
  double mu = 0.0;
};

/// Minimal Type-II error of the canonical Gaussian pair at Type-I level
/// alpha: Phi(Phi^{-1}(1 - alpha) - mu).
double gaussian_tradeoff(double mu, double alpha);

/// Evenly spaced trade-off curve on alpha in (0, 1).
std::vector<TradeoffPoint> gaussian_tradeoff_curve(double mu, int n_points);

/// Mahalanobis reduction of m independent Gaussian coordinates to one
/// effective pair: sqrt(sum_j shift_j^2 / V_j).
double compose_effective_mu(const Vector& per_snv_shifts, const Vector& variance_vector);

/// The F(alpha, beta) diagnostic, verbatim: (z_alpha + z_beta)^2 Vbar /
/// (4 Mbar^2) with Mbar = sum(m_hat^2)/2 and Vbar = sum(m_hat^2). z_a is the
/// upper 100(1-a) percentile of the standard normal.
double lemma1_f(double alpha, double beta, const Vector& m_hat);

/// The same diagnostic with (z_alpha + z_beta) replaced by the composed
/// effective shift 2 Mbar / sqrt(Vbar); algebraically this is identically 1,
/// and it is recorded in reports to make the scaling discrepancy of the
/// verbatim form visible.
double lemma1_f_composition_variant(const Vector& m_hat);

/// Sufficient-condition check: F(alpha, mu_0_given_1) >= m.
bool theorem2_condition(double alpha, double mu_0_given_1, int num_snvs,
                        const Vector& m_hat);

/// Max over targets k of the posterior-marginal miss probability
/// E[1 - mu_k(y) | y ~ rho(. | b_k = 1, conditioning_{-k})], estimated by
/// Monte Carlo; the returned SE belongs to the maximizing target.
McEstimate mu_0_given_1(const ReleaseMechanism& mechanism, const Population& population,
                        const MembershipPrior& sigma,
                        const MembershipVector& conditioning, long n_samples,
                        std::uint64_t seed);

struct DeltaCriterion {
  double delta = 0.0;
  double se = 0.0;
  McEstimate beta_term;  // expected optimal-LRT trade-off under q
  McEstimate mu_term;    // expected posterior miss probability under q
};

/// Delta(alpha, sigma, q) = mu_{0|1}(sigma, q) - beta(alpha, q) for a
/// Gaussian mechanism, estimated for the given target individual by Monte
/// Carlo over the non-target prior.
DeltaCriterion delta_criterion(const ReleaseMechanism& mechanism,
                               const Population& population,
                               const MembershipPrior& sigma, const MembershipPrior& q,
                               double alpha, int target_k, long n_samples,
                               std::uint64_t seed);

/// (epsilon, delta)-DP point of a mu-GDP mechanism:
/// Phi(-eps/mu + mu/2) - e^eps Phi(-eps/mu - mu/2).
double gdp_to_dp(double mu, double epsilon);

/// Composition of per-SNV GDP parameters: sqrt(sum m_hat_j^2).
double composed_gdp_mu(const Vector& m_hat);

}  // namespace beaconlab

#endif  // BEACONLAB_ANALYSIS_HPP_
