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

#ifndef BEACONLAB_TYPES_HPP_
#define BEACONLAB_TYPES_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>

namespace beaconlab {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntVector = Eigen::VectorXi;

// All randomized routines take either an engine reference or an explicit
// seed; same seed, same results (single-threaded evaluation order).
using Rng = std::mt19937_64;

/// A Monte Carlo estimate together with the standard error of its mean.
struct McEstimate {
  double value = 0.0;
  double se = 0.0;
  long n = 0;
};

/// Welford accumulator for streaming mean/variance.
class RunningStat {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double se() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
  McEstimate estimate() const { return {mean(), se(), n_}; }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace beaconlab

#endif  // BEACONLAB_TYPES_HPP_
