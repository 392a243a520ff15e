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

#include "beaconlab/mechanisms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace beaconlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kZeroNoiseAtomTol = 1e-12;

std::vector<int> bits_key(const MembershipVector& b) {
  std::vector<int> key(b.size());
  for (int k = 0; k < b.size(); ++k) key[k] = b.bits[k];
  return key;
}

double sample_laplace(double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const double v = u(rng);
  return -scale * std::copysign(std::log1p(-2.0 * std::abs(v)), v);
}

}  // namespace

GaussianMeanMap GaussianMeanMap::constant(const Vector& offset) {
  GaussianMeanMap map;
  map.offset = offset;
  map.slope = Vector::Zero(offset.size());
  return map;
}

GaussianMeanMap GaussianMeanMap::zero(int num_snvs) {
  return constant(Vector::Zero(num_snvs));
}

GaussianMeanMap GaussianMeanMap::affine(Vector offset, Vector slope) {
  if (offset.size() != slope.size()) {
    throw std::invalid_argument("GaussianMeanMap: offset/slope size mismatch");
  }
  GaussianMeanMap map;
  map.offset = std::move(offset);
  map.slope = std::move(slope);
  return map;
}

Vector GaussianMeanMap::mean(const Vector& clean_stats, const MembershipVector& b) const {
  if (use_table) {
    const auto it = table.find(bits_key(b));
    if (it == table.end()) {
      throw std::invalid_argument("GaussianMeanMap: membership vector missing from table");
    }
    return it->second;
  }
  return offset + slope.cwiseProduct(clean_stats);
}

ReleaseMechanism ReleaseMechanism::zero_noise(int num_snvs) {
  ReleaseMechanism m;
  m.kind = Kind::zero_noise;
  m.num_snvs = num_snvs;
  return m;
}

ReleaseMechanism ReleaseMechanism::laplace(int num_snvs, double scale, bool clip) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("ReleaseMechanism: laplace scale must be positive");
  }
  ReleaseMechanism m;
  m.kind = Kind::laplace;
  m.num_snvs = num_snvs;
  m.scale = scale;
  m.clip = clip;
  return m;
}

ReleaseMechanism ReleaseMechanism::gaussian(GaussianMeanMap mean_map, Vector variances,
                                            bool clip) {
  if ((variances.array() <= 0.0).any()) {
    throw std::invalid_argument("ReleaseMechanism: gaussian variances must be positive");
  }
  ReleaseMechanism m;
  m.kind = Kind::gaussian;
  m.num_snvs = static_cast<int>(variances.size());
  m.mean_map = std::move(mean_map);
  m.variances = std::move(variances);
  m.clip = clip;
  return m;
}

ReleaseMechanism ReleaseMechanism::generator(int num_snvs, NoiseSampler sampler, bool clip) {
  ReleaseMechanism m;
  m.kind = Kind::generator;
  m.num_snvs = num_snvs;
  m.sampler = std::move(sampler);
  m.clip = clip;
  return m;
}

Vector clean_stats(const Population& population, const MembershipVector& b) {
  if (b.size() != population.num_individuals()) {
    throw std::invalid_argument("clean_stats: membership length mismatch");
  }
  return b.any() ? summary_stats(population, b).values : Vector(population.reference_aafs);
}

Release sample_release(const ReleaseMechanism& mechanism, const Population& population,
                       const MembershipVector& b, Rng& rng) {
  if (mechanism.num_snvs != population.num_snvs()) {
    throw std::invalid_argument("sample_release: mechanism/population SNV count mismatch");
  }
  const Vector x = clean_stats(population, b);
  const int m = mechanism.num_snvs;
  Release release;
  release.noise = Vector::Zero(m);
  switch (mechanism.kind) {
    case ReleaseMechanism::Kind::zero_noise:
      break;
    case ReleaseMechanism::Kind::laplace:
      for (int j = 0; j < m; ++j) release.noise[j] = sample_laplace(mechanism.scale, rng);
      break;
    case ReleaseMechanism::Kind::gaussian: {
      const Vector mean = mechanism.mean_map.mean(x, b);
      std::normal_distribution<double> n(0.0, 1.0);
      for (int j = 0; j < m; ++j) {
        release.noise[j] = mean[j] + std::sqrt(mechanism.variances[j]) * n(rng);
      }
      break;
    }
    case ReleaseMechanism::Kind::generator:
      release.noise = mechanism.sampler(b, rng);
      if (release.noise.size() != m) {
        throw std::runtime_error("sample_release: generator noise has wrong length");
      }
      break;
  }
  release.values = x + release.noise;
  if (mechanism.clip) {
    release.values = release.values.cwiseMax(0.0).cwiseMin(1.0);
  }
  return release;
}

Release sample_release(const ReleaseMechanism& mechanism, const Population& population,
                       const MembershipVector& b, std::uint64_t seed) {
  Rng rng(seed);
  return sample_release(mechanism, population, b, rng);
}

ReleaseMechanism laplace_mechanism(double epsilon, double sensitivity, int num_snvs,
                                   bool clip) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("laplace_mechanism: epsilon must be positive");
  }
  if (!(sensitivity > 0.0)) {
    throw std::invalid_argument("laplace_mechanism: sensitivity must be positive");
  }
  return ReleaseMechanism::laplace(num_snvs, sensitivity / epsilon, clip);
}

ReleaseMechanism gaussian_mechanism_theorem2(const Vector& m_hat, int num_snvs,
                                             int k_min, GaussianMeanMap mean_map,
                                             const Population& population,
                                             std::uint64_t validation_seed) {
  if (m_hat.size() != num_snvs) {
    throw std::invalid_argument("gaussian_mechanism_theorem2: m_hat length mismatch");
  }
  if ((m_hat.array() <= 0.0).any()) {
    throw std::invalid_argument("gaussian_mechanism_theorem2: m_hat entries must be positive");
  }
  if (k_min < 1 || k_min > population.num_individuals()) {
    throw std::invalid_argument("gaussian_mechanism_theorem2: k_min out of range");
  }
  const double bound = sensitivity(num_snvs, k_min);
  Vector variances(num_snvs);
  for (int j = 0; j < num_snvs; ++j) {
    const double s = static_cast<double>(num_snvs) / (static_cast<double>(k_min) * m_hat[j]);
    variances[j] = s * s;
  }

  // Adjacency check on sampled pairs (b, b with one bit flipped), keeping
  // both sides at or above k_min members so x(b) stays defined.
  const int kk = population.num_individuals();
  Rng rng(validation_seed);
  MembershipPrior half = MembershipPrior::bernoulli(kk, 0.5);
  const int trials = mean_map.use_table ? 0 : 200;
  for (int t = 0; t < trials; ++t) {
    MembershipVector b = half.sample_nonempty(rng);
    if (b.count() < k_min + 1) continue;
    std::uniform_int_distribution<int> pick(0, kk - 1);
    MembershipVector b2 = b;
    const int flip = pick(rng);
    b2.bits[flip] = 1 - b2.bits[flip];
    if (b2.count() < k_min) continue;
    const Vector xa = summary_stats(population, b).values;
    const Vector xb = summary_stats(population, b2).values;
    const Vector ma = mean_map.mean(xa, b);
    const Vector mb = mean_map.mean(xb, b2);
    if (((ma - mb).cwiseAbs().array() > bound + 1e-12).any()) {
      throw std::invalid_argument(
          "gaussian_mechanism_theorem2: mean map violates the adjacency bound");
    }
  }
  if (mean_map.use_table) {
    for (const auto& [key_a, mean_a] : mean_map.table) {
      for (const auto& [key_b, mean_b] : mean_map.table) {
        int diff = 0;
        for (size_t i = 0; i < key_a.size(); ++i) diff += key_a[i] != key_b[i];
        if (diff != 1) continue;
        for (int j = 0; j < num_snvs; ++j) {
          if (std::abs(mean_a[j] - mean_b[j]) > bound + 1e-12) {
            throw std::invalid_argument(
                "gaussian_mechanism_theorem2: mean map violates the adjacency bound");
          }
        }
      }
    }
  }
  return ReleaseMechanism::gaussian(std::move(mean_map), std::move(variances),
                                    /*clip=*/false);
}

double log_density(const ReleaseMechanism& mechanism, const Population& population,
                   const MembershipVector& b, const Vector& release_values) {
  if (mechanism.clip) {
    throw std::invalid_argument(
        "log_density: clipping introduces atoms at {0,1}; densities are pre-clip only");
  }
  if (!mechanism.has_density()) {
    throw std::invalid_argument("log_density: generator-backed mechanisms are density-free");
  }
  if (release_values.size() != mechanism.num_snvs) {
    throw std::invalid_argument("log_density: release length mismatch");
  }
  const Vector x = clean_stats(population, b);
  const Vector delta = release_values - x;
  const int m = mechanism.num_snvs;
  switch (mechanism.kind) {
    case ReleaseMechanism::Kind::zero_noise:
      return delta.cwiseAbs().maxCoeff() <= kZeroNoiseAtomTol ? 0.0 : kNegInf;
    case ReleaseMechanism::Kind::laplace: {
      const double s = mechanism.scale;
      return -m * std::log(2.0 * s) - delta.cwiseAbs().sum() / s;
    }
    case ReleaseMechanism::Kind::gaussian: {
      const Vector mean = mechanism.mean_map.mean(x, b);
      double lp = 0.0;
      for (int j = 0; j < m; ++j) {
        const double z = delta[j] - mean[j];
        lp += -0.5 * (kLog2Pi + std::log(mechanism.variances[j]) +
                      z * z / mechanism.variances[j]);
      }
      return lp;
    }
    default:
      throw std::invalid_argument("log_density: unsupported mechanism kind");
  }
}

McEstimate expected_utility_loss(const ReleaseMechanism& mechanism,
                                 const Population& population,
                                 const MembershipPrior& prior, const Vector& kappa,
                                 long n_samples, std::uint64_t seed) {
  if (kappa.size() != mechanism.num_snvs) {
    throw std::invalid_argument("expected_utility_loss: kappa length mismatch");
  }
  if ((kappa.array() < 0.0).any()) {
    throw std::invalid_argument("expected_utility_loss: kappa entries must be nonnegative");
  }
  Rng rng(seed);
  RunningStat stat;
  for (long i = 0; i < n_samples; ++i) {
    const MembershipVector b = prior.sample_nonempty(rng);
    const Release release = sample_release(mechanism, population, b, rng);
    stat.add(kappa.dot(release.noise.cwiseAbs()));
  }
  return stat.estimate();
}

}  // namespace beaconlab
