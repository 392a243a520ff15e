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
#include <vector>

#include "beaconlab/normal.hpp"
#include "doctest.h"

using namespace beaconlab;

namespace {

// Naive re-implementation used as the independent oracle.
double lrs_oracle(const Vector& d, const Vector& pbar, const Vector& x) {
  double s = 0.0;
  for (int j = 0; j < d.size(); ++j) {
    s += d[j] * std::log(pbar[j] / x[j]) +
         (1.0 - d[j]) * std::log((1.0 - pbar[j]) / (1.0 - x[j]));
  }
  return s;
}

Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_SUITE_BEGIN("lrt");

TEST_CASE("single-term LRS hand values") {
  CHECK(lrs(vec1(1.0), vec1(0.5), vec1(0.25)) == doctest::Approx(0.6931471805599453));
  CHECK(lrs(vec1(0.0), vec1(0.5), vec1(0.75)) == doctest::Approx(0.6931471805599453));
}

TEST_CASE("LRS vanishes when released stats equal the reference") {
  const Population pop =
      generate_population(5, 8, AafDistribution::beta_truncated(0.5, 2.0), 2);
  for (int k = 0; k < 5; ++k) {
    CHECK(lrs(pop.genotypes.row(k).transpose(), pop.reference_aafs,
              pop.reference_aafs) == doctest::Approx(0.0));
  }
}

TEST_CASE("lrs_all matches the naive oracle") {
  const Population pop =
      generate_population(30, 12, AafDistribution::beta_truncated(0.5, 2.0), 7);
  Rng rng(5);
  const MembershipVector b = MembershipPrior::bernoulli(30, 0.5).sample_nonempty(rng);
  const Vector x = summary_stats(pop, b).values;
  const double floor = default_clamp_floor(b.count());
  const Vector scores = lrs_all(pop, x, floor);
  const Vector xc = clamp_stats(x, floor).values;
  for (int k = 0; k < 30; ++k) {
    CHECK(scores[k] ==
          doctest::Approx(lrs_oracle(pop.genotypes.row(k).transpose(),
                                     pop.reference_aafs, xc))
              .epsilon(1e-10));
  }
}

TEST_CASE("clamping reports how many coordinates moved") {
  Vector released(4);
  released << -0.2, 0.5, 1.4, 0.01;
  const ClampedStats c = clamp_stats(released, 0.05);
  CHECK(c.clamped == 3);
  CHECK(c.values[0] == doctest::Approx(0.05));
  CHECK(c.values[2] == doctest::Approx(0.95));
  CHECK(c.values[1] == doctest::Approx(0.5));
}

TEST_CASE("fixed-threshold attack extremes") {
  const Population pop =
      generate_population(20, 10, AafDistribution::beta_truncated(0.5, 2.0), 3);
  Rng rng(4);
  const MembershipVector b = MembershipPrior::bernoulli(20, 0.5).sample_nonempty(rng);
  const Vector x = summary_stats(pop, b).values;
  const double floor = default_clamp_floor(b.count());
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(fixed_threshold_attack(pop, x, inf, floor).claims.sum() == 20);
  CHECK(fixed_threshold_attack(pop, x, -inf, floor).claims.sum() == 0);
}

TEST_CASE("claim set is monotone in the threshold") {
  const Population pop =
      generate_population(25, 10, AafDistribution::beta_truncated(0.5, 2.0), 8);
  Rng rng(9);
  const MembershipVector b = MembershipPrior::bernoulli(25, 0.5).sample_nonempty(rng);
  const Vector x = summary_stats(pop, b).values;
  const double floor = default_clamp_floor(b.count());
  const AttackDecision lo = fixed_threshold_attack(pop, x, -1.0, floor);
  const AttackDecision hi = fixed_threshold_attack(pop, x, 2.0, floor);
  for (int k = 0; k < 25; ++k) CHECK(lo.claims[k] <= hi.claims[k]);
}

TEST_CASE("calibrated threshold achieves the target false positive rate") {
  const Population pop =
      generate_population(100, 200, AafDistribution::beta_truncated(0.5, 2.0), 31);
  const MembershipPrior prior = MembershipPrior::bernoulli(100, 0.5);
  const ReleaseMechanism mech = ReleaseMechanism::zero_noise(200);
  const CalibrationReport cal = calibrate_threshold(pop, mech, prior, 0.05, 20000, 1);

  Rng rng(77);
  long fp = 0, negatives = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const MembershipVector b = prior.sample_nonempty(rng);
    const Release release = sample_release(mech, pop, b, rng);
    const AttackDecision decision = fixed_threshold_attack(
        pop, release.values, cal.tau, default_clamp_floor(b.count()));
    for (int k = 0; k < 100; ++k) {
      if (!b.bits[k]) {
        ++negatives;
        fp += decision.claims[k];
      }
    }
  }
  const double fpr = static_cast<double>(fp) / negatives;
  CHECK(std::abs(fpr - 0.05) <= 0.03);
}

TEST_CASE("calibration quantile endpoints and stability") {
  const Population pop =
      generate_population(40, 30, AafDistribution::beta_truncated(0.5, 2.0), 6);
  const MembershipPrior prior = MembershipPrior::bernoulli(40, 0.5);
  const ReleaseMechanism mech = ReleaseMechanism::zero_noise(30);

  SUBCASE("alpha = 1 returns the maximum observed LRS") {
    const CalibrationReport cal = calibrate_threshold(pop, mech, prior, 1.0, 2000, 2);
    CHECK(cal.achieved_fpr == doctest::Approx(1.0));
  }

  SUBCASE("two seeds agree within bootstrap error") {
    // Bootstrap oracle: rebuild the simulated non-member LRS distribution by
    // hand and estimate the quantile's sampling error.
    Rng rng(100);
    const long n = 20000;
    std::vector<double> scores;
    std::uniform_int_distribution<int> pick(0, 39);
    while (static_cast<long>(scores.size()) < n) {
      const MembershipVector b = prior.sample_nonempty(rng);
      if (b.count() == 40) continue;
      const Release release = sample_release(mech, pop, b, rng);
      int k = pick(rng);
      while (b.bits[k]) k = pick(rng);
      const Vector x =
          clamp_stats(release.values, default_clamp_floor(b.count())).values;
      scores.push_back(
          lrs_oracle(pop.genotypes.row(k).transpose(), pop.reference_aafs, x));
    }
    std::vector<double> boot;
    Rng brng(5);
    std::uniform_int_distribution<long> idx(0, n - 1);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> resample(n);
      for (long i = 0; i < n; ++i) resample[i] = scores[idx(brng)];
      std::nth_element(resample.begin(), resample.begin() + 999, resample.end());
      boot.push_back(resample[999]);  // ceil(0.05 * n) - 1
    }
    double mean = 0.0;
    for (double v : boot) mean += v;
    mean /= boot.size();
    double var = 0.0;
    for (double v : boot) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (boot.size() - 1));

    const double tau1 = calibrate_threshold(pop, mech, prior, 0.05, n, 11).tau;
    const double tau2 = calibrate_threshold(pop, mech, prior, 0.05, n, 12).tau;
    CHECK(std::abs(tau1 - tau2) <= 3.0 * std::sqrt(2.0) * se);
  }
}

TEST_CASE("adaptive threshold is the mean of the N smallest values") {
  Vector v3(3);
  v3 << 3, 1, 2;
  CHECK(adaptive_threshold(v3, 2) == doctest::Approx(1.5));
  CHECK(adaptive_threshold(v3, 3) == doctest::Approx(2.0));
  Vector v4(4);
  v4 << -1.2, 0.4, 0.9, 5.0;
  CHECK(adaptive_threshold(v4, 3) == doctest::Approx(0.03333333333333336));
  CHECK_THROWS_AS(adaptive_threshold(v4, 0), std::invalid_argument);
  CHECK_THROWS_AS(adaptive_threshold(v4, 5), std::invalid_argument);
}

TEST_CASE("adaptive attack boundary behavior") {
  Population pop;
  pop.genotypes.resize(2, 2);
  pop.genotypes << 1, 0, 0, 1;
  pop.reference_aafs = Vector::Constant(2, 0.5);
  const Vector released = summary_stats(pop, membership_from({1, 0})).values;

  SUBCASE("reference identical to a target claims on ties") {
    Matrix reference = pop.genotypes.row(0);
    const AttackDecision d = adaptive_attack(pop, released, reference, 1, 0.25);
    CHECK(d.claims[0] == 1);  // tie resolves to a claim
  }
  SUBCASE("reference scores below every target yields no claims") {
    const Population big =
        generate_population(10, 6, AafDistribution::beta_truncated(0.5, 2.0), 44);
    Rng rng(3);
    const MembershipVector b = MembershipPrior::bernoulli(10, 0.5).sample_nonempty(rng);
    const Vector x = summary_stats(big, b).values;
    const double floor = default_clamp_floor(b.count());
    const Vector scores = lrs_all(big, x, floor);
    // A fabricated reference row engineered to score far below everyone by
    // matching the beacon stats bit for bit.
    Matrix reference(1, 6);
    const Vector xc = clamp_stats(x, floor).values;
    for (int j = 0; j < 6; ++j) reference(0, j) = xc[j] > 0.5 ? 1.0 : 0.0;
    Vector ref_score(1);
    ref_score[0] = lrs(reference.row(0).transpose(), big.reference_aafs, xc);
    if (ref_score[0] < scores.minCoeff()) {
      const AttackDecision d = adaptive_attack(big, x, reference, 1, floor);
      CHECK(d.claims.sum() == 0);
    }
  }
}

TEST_CASE("adaptive attack matches a brute-force re-implementation") {
  const Population pop =
      generate_population(50, 18, AafDistribution::beta_truncated(0.5, 2.0), 55);
  const Population ref_pop =
      generate_population(20, 18, AafDistribution::beta_truncated(0.5, 2.0), 56);
  Matrix reference = ref_pop.genotypes;
  Rng rng(8);
  const MembershipVector b = MembershipPrior::bernoulli(50, 0.5).sample_nonempty(rng);
  ReleaseMechanism mech = ReleaseMechanism::laplace(18, 0.05);
  const Release release = sample_release(mech, pop, b, rng);
  const double floor = default_clamp_floor(b.count());
  const int n = 4;

  const AttackDecision d = adaptive_attack(pop, release.values, reference, n, floor);

  // Oracle: clamp, score everything naively, sort, average bottom N, claim.
  const Vector xc = clamp_stats(release.values, floor).values;
  std::vector<double> ref_scores;
  for (int i = 0; i < reference.rows(); ++i) {
    ref_scores.push_back(
        lrs_oracle(reference.row(i).transpose(), pop.reference_aafs, xc));
  }
  std::sort(ref_scores.begin(), ref_scores.end());
  double tau = 0.0;
  for (int i = 0; i < n; ++i) tau += ref_scores[i];
  tau /= n;
  for (int k = 0; k < 50; ++k) {
    const double score =
        lrs_oracle(pop.genotypes.row(k).transpose(), pop.reference_aafs, xc);
    CHECK(d.claims[k] == (score <= tau ? 1 : 0));
    CHECK(d.confidences[k] == doctest::Approx(tau - score).epsilon(1e-9));
  }
}

TEST_CASE("optimal Gaussian LRT closed-form power") {
  const Population pop =
      generate_population(6, 5, AafDistribution::beta_truncated(0.5, 2.0), 70);
  Rng rng(2);
  MembershipVector cond = MembershipPrior::bernoulli(6, 0.5).sample_nonempty(rng);
  cond.bits[0] = 1;

  SUBCASE("identical adjacent distributions give power alpha") {
    CHECK(1.0 - normal_cdf(normal_quantile(1.0 - 0.05) - 0.0) == doctest::Approx(0.05));
    CHECK(1.0 - normal_cdf(normal_quantile(1.0 - 0.5) - 0.0) == doctest::Approx(0.5));
  }

  SUBCASE("mu_eq = 1 at alpha = 0.05 gives power 0.2595, confirmed by MC") {
    // Scale the variances so the adjacent pair has effective shift one.
    MembershipVector cond0 = cond;
    cond0.bits[0] = 0;
    const Vector x0 = clean_stats(pop, cond0);
    const Vector x1 = clean_stats(pop, cond);
    const double ss = (x1 - x0).squaredNorm();
    REQUIRE(ss > 0.0);
    const ReleaseMechanism mech = ReleaseMechanism::gaussian(
        GaussianMeanMap::zero(5), Vector::Constant(5, ss));
    CHECK(adjacent_effective_mu(mech, pop, cond, 0) == doctest::Approx(1.0));
    const double power = optimal_lrt_power_gaussian(mech, pop, cond, 0, 0.05);
    CHECK(power == doctest::Approx(0.2595110228414442).epsilon(1e-9));

    // Monte Carlo cross-check of power and size on the two arms.
    MembershipVector member_arm = cond;
    member_arm.bits[0] = 1;
    MembershipVector nonmember_arm = cond;
    nonmember_arm.bits[0] = 0;
    Rng mc(5);
    long claims_member = 0, claims_nonmember = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const Release r1 = sample_release(mech, pop, member_arm, mc);
      claims_member +=
          optimal_lrt_attack(mech, pop, r1.values, 0.05, cond).claims[0];
      const Release r0 = sample_release(mech, pop, nonmember_arm, mc);
      claims_nonmember +=
          optimal_lrt_attack(mech, pop, r0.values, 0.05, cond).claims[0];
    }
    const double mc_power = static_cast<double>(claims_member) / n;
    const double mc_size = static_cast<double>(claims_nonmember) / n;
    CHECK(std::abs(mc_power - power) <= 3.0 * std::sqrt(power * (1 - power) / n));
    CHECK(std::abs(mc_size - 0.05) <= 3.0 * std::sqrt(0.05 * 0.95 / n));
  }
}

TEST_CASE("optimal LRT dominates the fixed threshold at matched significance") {
  const Population pop =
      generate_population(8, 6, AafDistribution::beta_truncated(0.5, 2.0), 90);
  const MembershipPrior prior = MembershipPrior::bernoulli(8, 0.5);
  Vector m_hat = Vector::Constant(6, 4.0);
  const ReleaseMechanism mech =
      gaussian_mechanism_theorem2(m_hat, 6, 4, GaussianMeanMap::zero(6), pop);
  const double alpha = 0.1;
  const CalibrationReport cal = calibrate_threshold(pop, mech, prior, alpha, 20000, 3);

  Rng rng(12);
  RunningStat opt_tpr, fix_tpr;
  for (int i = 0; i < 6000; ++i) {
    const MembershipVector b = prior.sample_nonempty(rng);
    const Release release = sample_release(mech, pop, b, rng);
    const AttackDecision opt = optimal_lrt_attack(mech, pop, release.values, alpha, b);
    const AttackDecision fix = fixed_threshold_attack(
        pop, release.values, cal.tau, default_clamp_floor(b.count()));
    for (int k = 0; k < 8; ++k) {
      if (b.bits[k]) {
        opt_tpr.add(opt.claims[k]);
        fix_tpr.add(fix.claims[k]);
      }
    }
  }
  const double slack =
      2.0 * std::sqrt(opt_tpr.se() * opt_tpr.se() + fix_tpr.se() * fix_tpr.se());
  CHECK(opt_tpr.mean() >= fix_tpr.mean() - slack);
}

TEST_SUITE_END();
