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

#ifndef BEACONLAB_LRT_HPP_
#define BEACONLAB_LRT_HPP_

#include <cstdint>
#include <optional>

#include "beaconlab/mechanisms.hpp"
#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

// Sign conventions used throughout: the LRS of a target is
//   l(d_k, x) = sum_j [ d_kj log(pbar_j/x_j) + (1 - d_kj) log((1-pbar_j)/(1-x_j)) ],
// membership is claimed iff l <= tau (ties claim), alpha is the false
// positive rate on true non-members, and power is the true positive rate on
// members. Confidences are oriented so that larger means more member-like.

/// Per-individual attack output: real-valued confidences and binary claims.
struct AttackDecision {
  Vector confidences;
  IntVector claims;
};

struct LrtConfig {
  double alpha = 0.05;
  std::optional<double> threshold;
  int adaptive_n = 0;  // 0: default to 5% of the reference pool
  long calibration_samples = 10000;
};

/// Released statistics clamped into [x_min, 1 - x_min] so Eq.-style log
/// terms stay finite; the number of clamped coordinates is reported.
struct ClampedStats {
  Vector values;
  int clamped = 0;
};

ClampedStats clamp_stats(const Vector& released, double x_min);

/// Half-count smoothing floor 1/(2 * beacon_size).
double default_clamp_floor(int beacon_size);

/// Log-likelihood ratio statistic of one genotype row against released
/// statistics assumed to lie strictly inside (0, 1).
double lrs(const Eigen::Ref<const Vector>& genotype_row, const Vector& reference_aafs,
           const Vector& released_stats);

/// LRS of every individual in the universe against clamped statistics.
Vector lrs_all(const Population& population, const Vector& released_stats,
               double clamp_floor);

/// Claims s_k = 1 iff LRS <= tau; confidences are the negated LRS.
AttackDecision fixed_threshold_attack(const Population& population,
                                      const Vector& released_stats, double tau,
                                      double clamp_floor);

struct CalibrationReport {
  double tau = 0.0;
  double achieved_fpr = 0.0;
  long samples = 0;
};

/// Empirical alpha-quantile of non-member LRS over simulated (b, r, k)
/// triples, so claiming at tau yields FPR close to alpha. Throws if the
/// simulated LRS distribution is degenerate.
CalibrationReport calibrate_threshold(const Population& population,
                                      const ReleaseMechanism& mechanism,
                                      const MembershipPrior& prior, double alpha,
                                      long n_samples, std::uint64_t seed);

/// Mean of the N smallest reference LRS values.
double adaptive_threshold(const Vector& reference_lrs_values, int n);

/// Adaptive-threshold attack: claims l(d_k, r) <= tau_N(r) where tau_N is
/// recomputed from the reference genotypes on the same release; confidences
/// are tau_N(r) - l(d_k, r).
AttackDecision adaptive_attack(const Population& population, const Vector& released_stats,
                               const Matrix& reference_genotypes, int n,
                               double clamp_floor);

/// Effective mean shift between the two Gaussian release distributions that
/// differ only in individual k's membership bit (conditioning supplies the
/// other bits): sqrt(sum_j (mean1_j - mean0_j)^2 / V_j).
double adjacent_effective_mu(const ReleaseMechanism& mechanism,
                             const Population& population,
                             const MembershipVector& conditioning_b, int k);

/// Closed-form power of the exact per-individual likelihood-ratio test at
/// significance alpha: 1 - Phi(Phi^{-1}(1 - alpha) - mu_eq).
double optimal_lrt_power_gaussian(const ReleaseMechanism& mechanism,
                                  const Population& population,
                                  const MembershipVector& conditioning_b, int k,
                                  double alpha);

/// Exact per-individual Neyman-Pearson test of the two adjacent release
/// distributions, thresholded at the exact alpha-quantile of the non-member
/// arm. Gaussian mechanisms use the closed form; other density-supported
/// mechanisms calibrate each threshold by simulating the non-member arm.
AttackDecision optimal_lrt_attack(const ReleaseMechanism& mechanism,
                                  const Population& population,
                                  const Vector& released_stats, double alpha,
                                  const MembershipVector& conditioning_b,
                                  long fallback_samples = 20000,
                                  std::uint64_t fallback_seed = 1);

}  // namespace beaconlab

#endif  // BEACONLAB_LRT_HPP_
