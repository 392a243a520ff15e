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

#include "beaconlab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace beaconlab {

RocCurve roc_auc(const Vector& confidences, const IntVector& labels) {
  const long n = confidences.size();
  if (labels.size() != n || n < 2) {
    throw std::invalid_argument("roc_auc: need matching confidences and labels");
  }
  RocCurve curve;
  for (long i = 0; i < n; ++i) {
    if (labels[i]) ++curve.n_pos; else ++curve.n_neg;
  }
  if (curve.n_pos == 0 || curve.n_neg == 0) {
    throw std::invalid_argument("roc_auc: need at least one positive and one negative");
  }

  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&confidences](long a, long b) {
    return confidences[a] > confidences[b];
  });

  curve.points.emplace_back(0.0, 0.0);
  long tp = 0, fp = 0;
  double concordant = 0.0;  // midrank Mann-Whitney count
  long i = 0;
  while (i < n) {
    long j = i;
    long tie_pos = 0, tie_neg = 0;
    while (j < n && confidences[order[j]] == confidences[order[i]]) {
      if (labels[order[j]]) ++tie_pos; else ++tie_neg;
      ++j;
    }
    // Negatives strictly below the block count fully, tied ones half.
    concordant += static_cast<double>(tie_pos) *
                      static_cast<double>(curve.n_neg - fp - tie_neg) +
                  0.5 * static_cast<double>(tie_pos) * static_cast<double>(tie_neg);
    tp += tie_pos;
    fp += tie_neg;
    curve.points.emplace_back(static_cast<double>(fp) / curve.n_neg,
                              static_cast<double>(tp) / curve.n_pos);
    i = j;
  }
  curve.auc = concordant / (static_cast<double>(curve.n_pos) * curve.n_neg);
  return curve;
}

MatchedDp matched_utility_dp(const ReleaseMechanism& mechanism_bayes,
                             const Population& population,
                             const MembershipPrior& prior, const Vector& kappa,
                             long n_samples, double sensitivity, std::uint64_t seed,
                             double rel_tol) {
  if (!(sensitivity > 0.0)) {
    throw std::invalid_argument("matched_utility_dp: sensitivity must be positive");
  }
  const double kappa_sum = kappa.sum();
  if (!(kappa_sum > 0.0)) {
    throw std::invalid_argument("matched_utility_dp: kappa must have positive mass");
  }
  MatchedDp out;
  out.target_loss =
      expected_utility_loss(mechanism_bayes, population, prior, kappa, n_samples, seed)
          .value;
  if (out.target_loss <= 1e-12) {
    out.epsilon = std::numeric_limits<double>::infinity();
    out.matched = false;
    return out;
  }
  // E[sum_j kappa_j |delta_j|] of Laplace(scale) is scale * sum(kappa),
  // monotone decreasing in epsilon; bracket then bisect.
  const auto laplace_loss = [&](double epsilon) {
    return (sensitivity / epsilon) * kappa_sum;
  };
  double lo = 1e-6, hi = 1e6;
  while (laplace_loss(lo) < out.target_loss && lo > 1e-18) lo *= 0.5;
  while (laplace_loss(hi) > out.target_loss && hi < 1e18) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (laplace_loss(mid) > out.target_loss ? lo : hi) = mid;
    if (hi - lo < rel_tol * lo) break;
  }
  out.epsilon = 0.5 * (lo + hi);
  out.achieved_loss = laplace_loss(out.epsilon);
  out.matched =
      std::abs(out.achieved_loss - out.target_loss) <= rel_tol * out.target_loss;
  return out;
}

}  // namespace beaconlab
