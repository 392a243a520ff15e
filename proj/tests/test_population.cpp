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

#include "beaconlab/population.hpp"

#include <cstdio>
#include <string>

#include "doctest.h"

using namespace beaconlab;

TEST_SUITE_BEGIN("population");

TEST_CASE("generated population has the requested dimensions") {
  const Population pop =
      generate_population(800, 5000, AafDistribution::beta_truncated(0.5, 2.0), 11);
  CHECK(pop.num_individuals() == 800);
  CHECK(pop.num_snvs() == 5000);
  CHECK_NOTHROW(pop.validate());

  // Law of large numbers: column means track the reference AAFs.
  long ok = 0;
  for (int j = 0; j < pop.num_snvs(); ++j) {
    const double p = pop.reference_aafs[j];
    const double mean = pop.genotypes.col(j).mean();
    if (std::abs(mean - p) <= 4.0 * std::sqrt(p * (1.0 - p) / 800.0)) ++ok;
  }
  CHECK(static_cast<double>(ok) / pop.num_snvs() >= 0.99);
}

TEST_CASE("point-mass AAF distribution fixes every reference frequency") {
  const Population pop = generate_population(10, 20, AafDistribution::point_mass(0.5), 3);
  CHECK((pop.reference_aafs.array() == 0.5).all());
}

TEST_CASE("generation is deterministic given the seed") {
  const AafDistribution aaf = AafDistribution::beta_truncated(0.5, 2.0);
  const Population a = generate_population(50, 40, aaf, 123);
  const Population b = generate_population(50, 40, aaf, 123);
  CHECK(a.genotypes == b.genotypes);
  CHECK(a.reference_aafs == b.reference_aafs);
  const Population c = generate_population(50, 40, aaf, 124);
  CHECK(a.genotypes != c.genotypes);
}

TEST_CASE("summary statistics average member rows") {
  Population pop;
  pop.genotypes.resize(3, 2);
  pop.genotypes << 1, 0, 1, 1, 0, 0;
  pop.reference_aafs = Vector::Constant(2, 0.5);

  SUBCASE("two members") {
    const SummaryStats x = summary_stats(pop, membership_from({1, 1, 0}));
    CHECK(x.values[0] == doctest::Approx(1.0));
    CHECK(x.values[1] == doctest::Approx(0.5));
  }
  SUBCASE("all members carry allele 0") {
    const SummaryStats x = summary_stats(pop, membership_from({1, 1, 0}));
    CHECK(x.values[0] == 1.0);
  }
  SUBCASE("singleton beacon returns that row") {
    const SummaryStats x = summary_stats(pop, membership_from({0, 1, 0}));
    CHECK(x.values[0] == 1.0);
    CHECK(x.values[1] == 1.0);
  }
  SUBCASE("empty beacon is rejected") {
    CHECK_THROWS_AS(summary_stats(pop, membership_from({0, 0, 0})), std::invalid_argument);
  }
}

TEST_CASE("summary statistics ignore non-member rows and member order") {
  const Population pop =
      generate_population(12, 9, AafDistribution::beta_truncated(0.5, 2.0), 5);
  MembershipVector b = membership_from({1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 0});
  const Vector x = summary_stats(pop, b).values;

  Population altered = pop;
  altered.genotypes.row(1).setZero();
  altered.genotypes.row(4).setOnes();
  CHECK(summary_stats(altered, b).values == x);

  // Swapping two member rows permutes individuals but not the statistics.
  Population swapped = pop;
  swapped.genotypes.row(0) = pop.genotypes.row(2);
  swapped.genotypes.row(2) = pop.genotypes.row(0);
  CHECK(summary_stats(swapped, b).values == x);
}

TEST_CASE("adding and removing members moves statistics by at most 1/|B|") {
  const Population pop =
      generate_population(20, 15, AafDistribution::beta_truncated(0.5, 2.0), 9);
  Rng rng(17);
  MembershipPrior prior = MembershipPrior::bernoulli(20, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    MembershipVector b = prior.sample_nonempty(rng);
    if (b.count() < 2) continue;
    const Vector x = summary_stats(pop, b).values;
    const int n = b.count();
    MembershipVector smaller = b;
    smaller.bits[b.members().front()] = 0;
    const Vector y = summary_stats(pop, smaller).values;
    CHECK((x - y).cwiseAbs().maxCoeff() <= 1.0 / n + 1e-12);
  }
}

TEST_CASE("sensitivity formulas") {
  CHECK(sensitivity(5000, 400) == doctest::Approx(12.5));
  CHECK(sensitivity(1, 1) == doctest::Approx(1.0));
  CHECK(per_snv_sensitivity(400) == doctest::Approx(0.0025));
  CHECK_THROWS_AS(sensitivity(10, 0), std::invalid_argument);
}

TEST_CASE("population file round trip") {
  const Population pop =
      generate_population(7, 5, AafDistribution::beta_truncated(0.5, 2.0), 21);
  const std::string path = "test_population_roundtrip.txt";
  save_population(pop, path);
  const Population loaded = load_population(path);
  CHECK(loaded.genotypes == pop.genotypes);
  CHECK((loaded.reference_aafs - pop.reference_aafs).cwiseAbs().maxCoeff() < 1e-15);
  std::remove(path.c_str());
}

TEST_CASE("loading rejects out-of-range frequencies") {
  const std::string path = "test_population_bad.txt";
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("2 3\n0 0.5 0.25\n1 0 1\n0 1 0\n", f);
  std::fclose(f);
  CHECK_THROWS(load_population(path));
  std::remove(path.c_str());
}

TEST_CASE("loading a toy file yields its dimensions") {
  const std::string path = "test_population_toy.txt";
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("2 3\n0.5 0.25 0.125\n1 0 1\n0 1 0\n", f);
  std::fclose(f);
  const Population pop = load_population(path);
  CHECK(pop.num_individuals() == 2);
  CHECK(pop.num_snvs() == 3);
  CHECK(pop.genotypes(0, 2) == 1.0);
  std::remove(path.c_str());
}

TEST_CASE("membership priors") {
  SUBCASE("uniform log probability") {
    const MembershipPrior u = MembershipPrior::uniform(6);
    CHECK(u.log_prob(membership_from({1, 0, 1, 0, 0, 0})) ==
          doctest::Approx(-6.0 * std::log(2.0)));
  }
  SUBCASE("table validation") {
    std::vector<MembershipVector> support = {membership_from({1, 0}),
                                             membership_from({0, 1})};
    Vector probs(2);
    probs << 0.25, 0.25;
    CHECK_THROWS_AS(MembershipPrior::table(support, probs), std::invalid_argument);
    probs << 0.75, 0.25;
    const MembershipPrior t = MembershipPrior::table(support, probs);
    CHECK(t.log_prob(membership_from({1, 0})) == doctest::Approx(std::log(0.75)));
    CHECK(t.log_prob(membership_from({1, 1})) ==
          -std::numeric_limits<double>::infinity());
  }
  SUBCASE("support enumeration sums to one") {
    const MembershipPrior q = MembershipPrior::bernoulli(5, 0.3);
    double total = 0.0;
    q.for_each([&total](const MembershipVector&, double lp) { total += std::exp(lp); });
    CHECK(total == doctest::Approx(1.0));
  }
  SUBCASE("nonempty sampling never returns an empty beacon") {
    const MembershipPrior q = MembershipPrior::bernoulli(4, 0.05);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) CHECK(q.sample_nonempty(rng).any());
  }
}

TEST_SUITE_END();
