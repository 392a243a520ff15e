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

#ifndef BEACONLAB_POPULATION_HPP_
#define BEACONLAB_POPULATION_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "beaconlab/types.hpp"

namespace beaconlab {

/// The universe of K individuals over m SNVs. genotypes(k, j) == 1 iff
/// individual k carries the alternate allele at SNV j; reference_aafs holds
/// the alternate-allele frequencies of the reference population, strictly
/// inside (0, 1). Immutable after construction.
struct Population {
  Matrix genotypes;       // K x m, entries in {0, 1}
  Vector reference_aafs;  // length m

  int num_individuals() const { return static_cast<int>(genotypes.rows()); }
  int num_snvs() const { return static_cast<int>(genotypes.cols()); }

  /// Throws std::invalid_argument on any invariant violation.
  void validate() const;
};

/// Binary membership vector b; the beacon is {k : bits[k] == 1}.
struct MembershipVector {
  IntVector bits;

  int size() const { return static_cast<int>(bits.size()); }
  int count() const { return bits.sum(); }
  bool any() const { return count() > 0; }
  std::vector<int> members() const;

  bool operator==(const MembershipVector& other) const { return bits == other.bits; }
};

MembershipVector membership_from(std::initializer_list<int> bits);

/// Prior over membership vectors: independent Bernoulli rates, the uniform
/// distribution over {0,1}^K, or an explicit table. One instance serves as
/// the true prior theta/q or as an attacker's subjective prior sigma.
class MembershipPrior {
 public:
  enum class Kind { bernoulli, uniform, table };

  static MembershipPrior bernoulli(Vector rates);
  static MembershipPrior bernoulli(int num_individuals, double rate);
  static MembershipPrior uniform(int num_individuals);
  static MembershipPrior table(std::vector<MembershipVector> support, Vector probabilities);

  Kind kind() const { return kind_; }
  int size() const { return num_individuals_; }
  const Vector& rates() const { return rates_; }
  const std::vector<MembershipVector>& support() const { return support_; }
  const Vector& probabilities() const { return probabilities_; }

  /// Unconditioned draw (may be empty for bernoulli/uniform kinds).
  MembershipVector sample(Rng& rng) const;
  /// Rejection-samples until at least one bit is set; used where a beacon
  /// with members is structurally required.
  MembershipVector sample_nonempty(Rng& rng) const;

  /// log P(b); -inf outside the support.
  double log_prob(const MembershipVector& b) const;

  /// Visits every b with positive probability along with log P(b).
  /// Product kinds require K <= 20.
  void for_each(const std::function<void(const MembershipVector&, double)>& fn) const;

 private:
  MembershipPrior() = default;

  Kind kind_ = Kind::uniform;
  int num_individuals_ = 0;
  Vector rates_;                           // bernoulli / uniform
  std::vector<MembershipVector> support_;  // table
  Vector probabilities_;                   // table
};

/// Perturbation-free summary statistics x in [0, 1]^m.
struct SummaryStats {
  Vector values;
};

/// Parametric family the reference AAFs are drawn from.
struct AafDistribution {
  enum class Kind { beta_truncated, point_mass };

  /// Beta(a, b) rejection-truncated to [lo, hi]. The default Beta(0.5, 2)
  /// on [0.01, 0.99] skews toward rare alleles and keeps logs finite.
  static AafDistribution beta_truncated(double a, double b, double lo = 0.01,
                                        double hi = 0.99);
  static AafDistribution point_mass(double p);

  double sample(Rng& rng) const;

  Kind kind = Kind::beta_truncated;
  double a = 0.5;
  double b = 2.0;
  double lo = 0.01;
  double hi = 0.99;
  double mass = 0.5;
};

/// Draws reference AAFs i.i.d. from the given family and genotypes
/// d_kj ~ Bernoulli(aaf_j) independently (linkage equilibrium by
/// construction). Deterministic given the seed.
Population generate_population(int num_individuals, int num_snvs,
                               const AafDistribution& aaf_distribution,
                               std::uint64_t seed);

/// x_j = mean of genotype column j over beacon members. Throws on an empty
/// beacon or a size mismatch.
SummaryStats summary_stats(const Population& population, const MembershipVector& b);

/// L1 sensitivity of the full statistics vector, m / k_min.
double sensitivity(int num_snvs, int k_min);

/// Per-SNV sensitivity 1 / k_min.
double per_snv_sensitivity(int k_min);

/// Plain-text population format: line 1 "K m", line 2 the m reference AAFs,
/// then K lines of m space-separated {0,1}.
Population load_population(const std::string& path);
void save_population(const Population& population, const std::string& path);

}  // namespace beaconlab

#endif  // BEACONLAB_POPULATION_HPP_
