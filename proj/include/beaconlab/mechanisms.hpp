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

#ifndef BEACONLAB_MECHANISMS_HPP_
#define BEACONLAB_MECHANISMS_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

/// Per-SNV Gaussian noise mean M_b^j as a function of the membership vector.
/// Affine maps in the clean statistics x(b) keep adjacency bounds checkable;
/// explicit per-b tables are restricted to K <= 20.
struct GaussianMeanMap {
  Vector offset;  // length m
  Vector slope;   // length m; zero slope makes the map constant
  bool use_table = false;
  std::map<std::vector<int>, Vector> table;

  static GaussianMeanMap constant(const Vector& offset);
  static GaussianMeanMap zero(int num_snvs);
  static GaussianMeanMap affine(Vector offset, Vector slope);

  Vector mean(const Vector& clean_stats, const MembershipVector& b) const;
};

/// Sampler handle used by generator-backed mechanisms: (b, rng) -> noise.
using NoiseSampler = std::function<Vector(const MembershipVector&, Rng&)>;

/// Conditional noise distribution g_D(delta | b) plus the post-processing
/// switch. Densities are always computed pre-clip; clipping affects sampled
/// releases only.
struct ReleaseMechanism {
  enum class Kind { zero_noise, laplace, gaussian, generator };

  static ReleaseMechanism zero_noise(int num_snvs);
  static ReleaseMechanism laplace(int num_snvs, double scale, bool clip = false);
  static ReleaseMechanism gaussian(GaussianMeanMap mean_map, Vector variances,
                                   bool clip = false);
  static ReleaseMechanism generator(int num_snvs, NoiseSampler sampler,
                                    bool clip = true);

  bool has_density() const { return kind != Kind::generator; }

  Kind kind = Kind::zero_noise;
  int num_snvs = 0;
  double scale = 0.0;        // laplace
  GaussianMeanMap mean_map;  // gaussian
  Vector variances;          // gaussian, length m
  bool clip = false;
  NoiseSampler sampler;  // generator
};

/// A released statistics vector along with the pre-clip noise that produced
/// it, retained for exact utility accounting.
struct Release {
  Vector values;
  Vector noise;
};

/// Clean statistics x(b) as seen by the release machinery. Priors over
/// membership vectors put mass on the empty beacon, whose summary statistics
/// are undefined; at the mechanism level the empty beacon releases the
/// reference AAFs, which keeps rho_D(.|b) defined on all of W.
Vector clean_stats(const Population& population, const MembershipVector& b);

/// Draws delta ~ g_D(.|b) and applies r = R(x + delta).
Release sample_release(const ReleaseMechanism& mechanism, const Population& population,
                       const MembershipVector& b, Rng& rng);
Release sample_release(const ReleaseMechanism& mechanism, const Population& population,
                       const MembershipVector& b, std::uint64_t seed);

/// Laplace(0, sensitivity/epsilon) noise on every coordinate; pure
/// epsilon-DP for the statistics vector with the given L1 sensitivity.
ReleaseMechanism laplace_mechanism(double epsilon, double sensitivity, int num_snvs,
                                   bool clip = false);

/// Gaussian mechanism with V^j = (m / (k_min * m_hat_j))^2. The mean map
/// must move by at most m/k_min between adjacent membership vectors; this is
/// checked on sampled adjacent pairs and violations throw.
ReleaseMechanism gaussian_mechanism_theorem2(const Vector& m_hat, int num_snvs,
                                             int k_min, GaussianMeanMap mean_map,
                                             const Population& population,
                                             std::uint64_t validation_seed = 7);

/// Exact log rho_D(r | b) for density-supported mechanisms with clipping
/// off. The zero-noise mechanism is treated as an atom: 0 when r == x(b)
/// within 1e-12, -inf otherwise.
double log_density(const ReleaseMechanism& mechanism, const Population& population,
                   const MembershipVector& b, const Vector& release_values);

/// Monte Carlo estimate of E[sum_j kappa_j |delta_j|] under b ~ prior.
McEstimate expected_utility_loss(const ReleaseMechanism& mechanism,
                                 const Population& population,
                                 const MembershipPrior& prior, const Vector& kappa,
                                 long n_samples, std::uint64_t seed);

}  // namespace beaconlab

#endif  // BEACONLAB_MECHANISMS_HPP_
