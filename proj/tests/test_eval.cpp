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

#include <cmath>

#include "doctest.h"

using namespace beaconlab;

namespace {

// Brute-force pair-counting oracle for the midrank AUC.
double auc_oracle(const Vector& conf, const IntVector& labels) {
  double concordant = 0.0;
  long pairs = 0;
  for (int i = 0; i < conf.size(); ++i) {
    if (!labels[i]) continue;
    for (int j = 0; j < conf.size(); ++j) {
      if (labels[j]) continue;
      ++pairs;
      if (conf[i] > conf[j]) {
        concordant += 1.0;
      } else if (conf[i] == conf[j]) {
        concordant += 0.5;
      }
    }
  }
  return concordant / static_cast<double>(pairs);
}

double trapezoid(const std::vector<std::pair<double, double>>& points) {
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    area += (points[i].first - points[i - 1].first) *
            (points[i].second + points[i - 1].second) / 2.0;
  }
  return area;
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("ROC basics") {
  SUBCASE("perfect separation") {
    Vector conf(4);
    conf << 0.9, 0.8, 0.2, 0.1;
    IntVector labels(4);
    labels << 1, 1, 0, 0;
    CHECK(roc_auc(conf, labels).auc == doctest::Approx(1.0));
  }
  SUBCASE("constant confidences") {
    Vector conf = Vector::Constant(6, 0.4);
    IntVector labels(6);
    labels << 1, 0, 1, 0, 1, 0;
    CHECK(roc_auc(conf, labels).auc == doctest::Approx(0.5));
  }
  SUBCASE("three concordant of four pairs") {
    Vector conf(4);
    conf << 0.9, 0.8, 0.4, 0.3;
    IntVector labels(4);
    labels << 1, 0, 1, 0;
    CHECK(roc_auc(conf, labels).auc == doctest::Approx(0.75));
  }
  SUBCASE("single-class input throws") {
    Vector conf(3);
    conf << 0.1, 0.2, 0.3;
    IntVector labels = IntVector::Ones(3);
    CHECK_THROWS_AS(roc_auc(conf, labels), std::invalid_argument);
  }
}

TEST_CASE("AUC equals the normalized Mann-Whitney statistic exactly") {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int instance = 0; instance < 1000; ++instance) {
    const int size = 8 + static_cast<int>(rng() % 40);
    Vector conf(size);
    IntVector labels(size);
    int pos = 0;
    for (int i = 0; i < size; ++i) {
      conf[i] = n(rng);  // continuous draws are tie-free
      labels[i] = coin(rng) ? 1 : 0;
      pos += labels[i];
    }
    if (pos == 0 || pos == size) continue;
    CHECK(roc_auc(conf, labels).auc == auc_oracle(conf, labels));
  }
}

TEST_CASE("curve points are monotone and integrate to the AUC") {
  Rng rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.4);
  Vector conf(200);
  IntVector labels(200);
  for (int i = 0; i < 200; ++i) {
    conf[i] = std::round(u(rng) * 20.0) / 20.0;  // many ties
    labels[i] = coin(rng) ? 1 : 0;
  }
  const RocCurve curve = roc_auc(conf, labels);
  for (size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].first >= curve.points[i - 1].first);
    CHECK(curve.points[i].second >= curve.points[i - 1].second);
  }
  CHECK(curve.points.back().first == doctest::Approx(1.0));
  CHECK(curve.points.back().second == doctest::Approx(1.0));
  CHECK(trapezoid(curve.points) == doctest::Approx(curve.auc).epsilon(1e-12));
  CHECK(curve.auc == doctest::Approx(auc_oracle(conf, labels)).epsilon(1e-12));
}

TEST_CASE("matched-utility DP calibration") {
  const Population pop =
      generate_population(10, 6, AafDistribution::beta_truncated(0.5, 2.0), 7);
  const MembershipPrior prior = MembershipPrior::bernoulli(10, 0.5);
  const double sens = sensitivity(6, 5);

  SUBCASE("a laplace mechanism is its own fixed point") {
    const double scale = 0.2;
    const ReleaseMechanism mech = ReleaseMechanism::laplace(6, scale);
    const MatchedDp res =
        matched_utility_dp(mech, pop, prior, Vector::Ones(6), 60000, sens, 3);
    CHECK(res.matched);
    CHECK(res.epsilon == doctest::Approx(sens / scale).epsilon(0.03));
  }
  SUBCASE("unit kappa with target m * scale inverts to sens / scale") {
    const double scale = 0.05;
    const ReleaseMechanism mech = ReleaseMechanism::laplace(6, scale);
    const MatchedDp res =
        matched_utility_dp(mech, pop, prior, Vector::Ones(6), 60000, sens, 4);
    CHECK(res.target_loss == doctest::Approx(6 * scale).epsilon(0.05));
    CHECK(res.epsilon == doctest::Approx(sens / scale).epsilon(0.03));
  }
  SUBCASE("zero noise reports unmatched") {
    const MatchedDp res = matched_utility_dp(ReleaseMechanism::zero_noise(6), pop,
                                             prior, Vector::Ones(6), 2000, sens, 5);
    CHECK_FALSE(res.matched);
    CHECK(std::isinf(res.epsilon));
  }
}

TEST_SUITE_END();
