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

#ifndef BEACONLAB_EVAL_HPP_
#define BEACONLAB_EVAL_HPP_

#include <cstdint>
#include <utility>
#include <vector>

#include "beaconlab/mechanisms.hpp"
#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

/// ROC curve and its trapezoidal AUC. Tied confidences enter the sweep
/// simultaneously, so the AUC equals the midrank Mann-Whitney statistic
/// normalized by n_pos * n_neg.
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), sweep order
  double auc = 0.0;
  long n_pos = 0;
  long n_neg = 0;
};

/// Threshold sweep over the given membership confidences (higher = more
/// member-like). Throws on single-class input.
RocCurve roc_auc(const Vector& confidences, const IntVector& labels);

struct MatchedDp {
  double epsilon = 0.0;
  double target_loss = 0.0;
  double achieved_loss = 0.0;
  bool matched = false;  // false: target loss is (near) zero, epsilon -> inf
};

/// Bisects the Laplace-mechanism epsilon until its kappa-weighted expected
/// utility loss matches that of the given mechanism within rel_tol.
MatchedDp matched_utility_dp(const ReleaseMechanism& mechanism_bayes,
                             const Population& population,
                             const MembershipPrior& prior, const Vector& kappa,
                             long n_samples, double sensitivity,
                             std::uint64_t seed = 1, double rel_tol = 0.01);

}  // namespace beaconlab

#endif  // BEACONLAB_EVAL_HPP_
