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

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace beaconlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

void Population::validate() const {
  const int k = num_individuals();
  const int m = num_snvs();
  if (k < 1 || m < 1) {
    throw std::invalid_argument("Population: need at least one individual and one SNV");
  }
  if (reference_aafs.size() != m) {
    throw std::invalid_argument("Population: reference AAF length does not match SNV count");
  }
  for (int j = 0; j < m; ++j) {
    const double p = reference_aafs[j];
    if (!(p > 0.0 && p < 1.0)) {
      throw std::invalid_argument("Population: reference AAFs must lie strictly in (0, 1)");
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      const double g = genotypes(i, j);
      if (g != 0.0 && g != 1.0) {
        throw std::invalid_argument("Population: genotype entries must be 0 or 1");
      }
    }
  }
}

std::vector<int> MembershipVector::members() const {
  std::vector<int> out;
  for (int k = 0; k < bits.size(); ++k) {
    if (bits[k]) out.push_back(k);
  }
  return out;
}

MembershipVector membership_from(std::initializer_list<int> bits) {
  MembershipVector b;
  b.bits.resize(static_cast<int>(bits.size()));
  int i = 0;
  for (int v : bits) b.bits[i++] = v;
  return b;
}

MembershipPrior MembershipPrior::bernoulli(Vector rates) {
  for (int k = 0; k < rates.size(); ++k) {
    if (!(rates[k] >= 0.0 && rates[k] <= 1.0)) {
      throw std::invalid_argument("MembershipPrior: bernoulli rates must lie in [0, 1]");
    }
  }
  MembershipPrior p;
  p.kind_ = Kind::bernoulli;
  p.num_individuals_ = static_cast<int>(rates.size());
  p.rates_ = std::move(rates);
  return p;
}

MembershipPrior MembershipPrior::bernoulli(int num_individuals, double rate) {
  return bernoulli(Vector::Constant(num_individuals, rate));
}

MembershipPrior MembershipPrior::uniform(int num_individuals) {
  MembershipPrior p = bernoulli(num_individuals, 0.5);
  p.kind_ = Kind::uniform;
  return p;
}

MembershipPrior MembershipPrior::table(std::vector<MembershipVector> support,
                                       Vector probabilities) {
  if (support.empty() || static_cast<int>(support.size()) != probabilities.size()) {
    throw std::invalid_argument("MembershipPrior: table support/probability size mismatch");
  }
  const int k = support.front().size();
  double total = 0.0;
  for (size_t i = 0; i < support.size(); ++i) {
    if (support[i].size() != k) {
      throw std::invalid_argument("MembershipPrior: table support lengths differ");
    }
    if (probabilities[i] < 0.0) {
      throw std::invalid_argument("MembershipPrior: table probabilities must be nonnegative");
    }
    total += probabilities[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("MembershipPrior: table probabilities must sum to 1");
  }
  MembershipPrior p;
  p.kind_ = Kind::table;
  p.num_individuals_ = k;
  p.support_ = std::move(support);
  p.probabilities_ = std::move(probabilities);
  return p;
}

MembershipVector MembershipPrior::sample(Rng& rng) const {
  MembershipVector b;
  if (kind_ == Kind::table) {
    std::discrete_distribution<int> pick(probabilities_.data(),
                                         probabilities_.data() + probabilities_.size());
    return support_[pick(rng)];
  }
  b.bits.resize(num_individuals_);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < num_individuals_; ++k) {
    b.bits[k] = u(rng) < rates_[k] ? 1 : 0;
  }
  return b;
}

MembershipVector MembershipPrior::sample_nonempty(Rng& rng) const {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    MembershipVector b = sample(rng);
    if (b.any()) return b;
  }
  throw std::runtime_error("MembershipPrior: could not draw a nonempty membership vector");
}

double MembershipPrior::log_prob(const MembershipVector& b) const {
  if (b.size() != num_individuals_) {
    throw std::invalid_argument("MembershipPrior: membership length mismatch");
  }
  if (kind_ == Kind::table) {
    for (size_t i = 0; i < support_.size(); ++i) {
      if (support_[i] == b) {
        return probabilities_[i] > 0.0 ? std::log(probabilities_[i]) : kNegInf;
      }
    }
    return kNegInf;
  }
  double lp = 0.0;
  for (int k = 0; k < num_individuals_; ++k) {
    const double q = rates_[k];
    if (b.bits[k]) {
      if (q == 0.0) return kNegInf;
      lp += std::log(q);
    } else {
      if (q == 1.0) return kNegInf;
      lp += std::log1p(-q);
    }
  }
  return lp;
}

void MembershipPrior::for_each(
    const std::function<void(const MembershipVector&, double)>& fn) const {
  if (kind_ == Kind::table) {
    for (size_t i = 0; i < support_.size(); ++i) {
      if (probabilities_[i] > 0.0) fn(support_[i], std::log(probabilities_[i]));
    }
    return;
  }
  if (num_individuals_ > 20) {
    throw std::invalid_argument(
        "MembershipPrior: product-kind support enumeration requires K <= 20");
  }
  MembershipVector b;
  b.bits.resize(num_individuals_);
  const std::uint64_t total = std::uint64_t{1} << num_individuals_;
  for (std::uint64_t code = 0; code < total; ++code) {
    for (int k = 0; k < num_individuals_; ++k) {
      b.bits[k] = static_cast<int>((code >> k) & 1u);
    }
    const double lp = log_prob(b);
    if (lp > kNegInf) fn(b, lp);
  }
}

AafDistribution AafDistribution::beta_truncated(double a, double b, double lo, double hi) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::invalid_argument("AafDistribution: beta shape parameters must be positive");
  }
  if (!(0.0 < lo && lo < hi && hi < 1.0)) {
    throw std::invalid_argument("AafDistribution: truncation must satisfy 0 < lo < hi < 1");
  }
  AafDistribution d;
  d.kind = Kind::beta_truncated;
  d.a = a;
  d.b = b;
  d.lo = lo;
  d.hi = hi;
  return d;
}

AafDistribution AafDistribution::point_mass(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("AafDistribution: point mass must lie strictly in (0, 1)");
  }
  AafDistribution d;
  d.kind = Kind::point_mass;
  d.mass = p;
  return d;
}

double AafDistribution::sample(Rng& rng) const {
  if (kind == Kind::point_mass) return mass;
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  for (int attempt = 0; attempt < 1000000; ++attempt) {
    const double x = ga(rng);
    const double y = gb(rng);
    const double v = x / (x + y);
    if (v >= lo && v <= hi) return v;
  }
  throw std::runtime_error("AafDistribution: truncated beta rejection failed");
}

Population generate_population(int num_individuals, int num_snvs,
                               const AafDistribution& aaf_distribution,
                               std::uint64_t seed) {
  if (num_individuals < 1 || num_snvs < 1) {
    throw std::invalid_argument("generate_population: K and m must be at least 1");
  }
  Rng rng(seed);
  Population pop;
  pop.reference_aafs.resize(num_snvs);
  for (int j = 0; j < num_snvs; ++j) {
    pop.reference_aafs[j] = aaf_distribution.sample(rng);
  }
  pop.genotypes.resize(num_individuals, num_snvs);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < num_individuals; ++k) {
    for (int j = 0; j < num_snvs; ++j) {
      pop.genotypes(k, j) = u(rng) < pop.reference_aafs[j] ? 1.0 : 0.0;
    }
  }
  return pop;
}

SummaryStats summary_stats(const Population& population, const MembershipVector& b) {
  if (b.size() != population.num_individuals()) {
    throw std::invalid_argument("summary_stats: membership length mismatch");
  }
  const int n = b.count();
  if (n < 1) {
    throw std::invalid_argument("summary_stats: beacon must contain at least one member");
  }
  SummaryStats stats;
  stats.values = (population.genotypes.transpose() * b.bits.cast<double>()) /
                 static_cast<double>(n);
  return stats;
}

double sensitivity(int num_snvs, int k_min) {
  if (k_min < 1) throw std::invalid_argument("sensitivity: k_min must be at least 1");
  if (num_snvs < 1) throw std::invalid_argument("sensitivity: m must be at least 1");
  return static_cast<double>(num_snvs) / static_cast<double>(k_min);
}

double per_snv_sensitivity(int k_min) {
  if (k_min < 1) throw std::invalid_argument("per_snv_sensitivity: k_min must be at least 1");
  return 1.0 / static_cast<double>(k_min);
}

Population load_population(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_population: cannot open " + path);
  int k = 0, m = 0;
  if (!(in >> k >> m) || k < 1 || m < 1) {
    throw std::runtime_error("load_population: malformed header in " + path);
  }
  Population pop;
  pop.reference_aafs.resize(m);
  for (int j = 0; j < m; ++j) {
    if (!(in >> pop.reference_aafs[j])) {
      throw std::runtime_error("load_population: truncated AAF line in " + path);
    }
  }
  pop.genotypes.resize(k, m);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!(in >> pop.genotypes(i, j))) {
        throw std::runtime_error("load_population: truncated genotype matrix in " + path);
      }
    }
  }
  pop.validate();
  return pop;
}

void save_population(const Population& population, const std::string& path) {
  population.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_population: cannot open " + path);
  const int k = population.num_individuals();
  const int m = population.num_snvs();
  out << k << ' ' << m << '\n';
  out.precision(17);
  for (int j = 0; j < m; ++j) {
    out << population.reference_aafs[j] << (j + 1 == m ? '\n' : ' ');
  }
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < m; ++j) {
      out << static_cast<int>(population.genotypes(i, j)) << (j + 1 == m ? '\n' : ' ');
    }
  }
}

}  // namespace beaconlab
