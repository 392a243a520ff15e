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

#ifndef BEACONLAB_LEARN_HPP_
#define BEACONLAB_LEARN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "beaconlab/lrt.hpp"
#include "beaconlab/mechanisms.hpp"
#include "beaconlab/population.hpp"
#include "beaconlab/types.hpp"

namespace beaconlab {

enum class Activation { identity, relu, leaky_relu, sigmoid, scaled_sigmoid };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation activation = Activation::relu;
  bool batch_norm = false;
  double leak = 0.01;
  // scaled_sigmoid output range
  double range_lo = -0.5;
  double range_hi = 0.5;
};

/// Fully connected network with optional per-layer batch normalization
/// (linear -> batch norm -> activation) and exact reverse-mode gradients.
/// Batches are column-major: columns are samples.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<LayerSpec> specs, std::uint64_t seed);

  int input_dim() const { return specs_.empty() ? 0 : specs_.front().in; }
  int output_dim() const { return specs_.empty() ? 0 : specs_.back().out; }
  int num_layers() const { return static_cast<int>(specs_.size()); }
  const std::vector<LayerSpec>& specs() const { return specs_; }

  /// Evaluation-mode forward (batch norm uses running statistics).
  Matrix apply(const Matrix& input) const;
  /// Single-sample evaluation-mode forward.
  Vector apply_one(const Vector& input) const;

  /// Training-mode forward: batch statistics, activations cached for
  /// backward, running statistics updated.
  Matrix forward(const Matrix& input);

  struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    std::vector<Vector> bn_gamma;
    std::vector<Vector> bn_beta;
    Matrix input;  // dLoss/dInput of the cached forward
  };

  /// Exact gradients of the last training-mode forward.
  Gradients backward(const Matrix& dloss_doutput) const;

  struct Layer {
    Matrix weight;  // out x in
    Vector bias;
    Vector bn_gamma, bn_beta;
    Vector bn_run_mean, bn_run_var;
  };
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  /// Text tensor dump: a shapes header per tensor followed by row-major
  /// values.
  void save(const std::string& path) const;
  static Mlp load(const std::string& path);

 private:
  struct Cache {
    Matrix input;
    std::vector<Matrix> linear;      // z = Wx + b
    std::vector<Matrix> normalized;  // (z - mean)/sqrt(var + eps)
    std::vector<Matrix> pre_act;     // after bn affine (or z when bn off)
    std::vector<Matrix> activated;
    std::vector<Vector> batch_mean, batch_inv_std;
  };

  std::vector<LayerSpec> specs_;
  std::vector<Layer> layers_;
  Cache cache_;
  bool has_cache_ = false;
};

/// Adam with additive L2 weight decay and a multiplicative learning-rate
/// schedule hook.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double weight_decay = 0.0, double beta1 = 0.9,
                         double beta2 = 0.999, double eps = 1e-8);
  void step(Mlp& net, const Mlp::Gradients& grads);
  void scale_lr(double factor) { lr_ *= factor; }
  double lr() const { return lr_; }

 private:
  double lr_, weight_decay_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Mlp::Gradients> moments_;  // [0]: first moment, [1]: second
};

struct TrainConfig {
  double defender_lr = 0.001;
  double attacker_lr = 0.0001;
  double weight_decay = 0.00001;
  double lr_decay = 0.988;  // per epoch
  int batch_size = 64;
  int epochs = 300;
  int batches_per_epoch = 10;
  Vector kappa;        // length m; empty means zero
  double gamma = 0.5;  // attacker operational-cost weight, in (0, 1)
  std::uint64_t seed = 1;
  int aux_dim = 0;  // 0: ceil(K / 27)
  bool clip = true;
  bool kappa_on_privacy = false;  // swap which cost term carries kappa
  int eval_beacons = 32;
  // Adaptive-threshold defense
  int reference_pool = 200;
  int adaptive_n = 0;  // 0: 5% of the pool
  double softmin_temperature = 0.1;
  double softmin_anneal = 0.95;  // per epoch, floored at 0.01
  // Fixed-threshold defense
  double fixed_tau = 0.0;
  double clamp_floor = 0.0;  // 0: 1/(2 * max(1, K/2))
};

/// Defender widths follow the 830 -> 1500 -> 1100 -> 500 proportions of the
/// reference configuration; exact at K = 800, m = 5000.
std::vector<LayerSpec> defender_architecture(int num_individuals, int aux_dim,
                                             int num_snvs);
/// Attacker widths follow 5000 -> 3400 -> 2000 -> 800.
std::vector<LayerSpec> attacker_architecture(int num_snvs, int num_individuals);

int default_aux_dim(int num_individuals);

/// Noise generator strategy: (b, nu) -> delta in [-0.5, 0.5]^m.
struct GeneratorMechanism {
  Mlp model;
  int aux_dim = 0;
  bool clip = true;

  /// Wraps the generator as a sampling-only release mechanism.
  ReleaseMechanism as_mechanism() const;
};

/// Mean batch cost of the defender under the privacy proxy
/// sum_k b_k p_k plus the kappa-weighted noise magnitude (evaluation mode).
double defender_loss(const Mlp& generator, const Mlp& attacker, const Matrix& batch_b,
                     const Matrix& batch_nu, const Vector& kappa,
                     const Population& population, bool kappa_on_privacy = false,
                     bool clip = true);

/// Mean batch cost of the attacker: -sum_k b_k p_k + gamma sum_k p_k
/// (evaluation mode).
double attacker_loss(const Mlp& generator, const Mlp& attacker, const Matrix& batch_b,
                     const Matrix& batch_nu, double gamma,
                     const Population& population, bool clip = true);

struct EpochStats {
  int epoch = 0;
  double defender_loss = 0.0;
  double attacker_loss = 0.0;
  double auc = 0.5;
};

struct TrainResult {
  GeneratorMechanism generator;
  Mlp attacker;
  std::vector<EpochStats> history;
};

/// Alternating stochastic-gradient play of the general-sum game: one
/// defender step (b ~ q) then one attacker step (b ~ sigma) per batch,
/// Adam with exponential learning-rate decay, deterministic per seed.
/// Throws on divergence (non-finite loss).
TrainResult train_bne(const Population& population, const MembershipPrior& q,
                      const MembershipPrior& sigma, const TrainConfig& config);

enum class LrtDefenseKind { fixed, adaptive };

/// Gradient-trained generator against a sigmoid-smoothed LRT attack. The
/// fixed variant needs config.fixed_tau pre-calibrated; the adaptive variant
/// differentiates through a temperature-softened bottom-N reference mean.
TrainResult train_lrt_defense(const Population& population, const MembershipPrior& q,
                              const TrainConfig& config, LrtDefenseKind kind);

/// Attacker-only training against a fixed release mechanism (b ~ sigma).
TrainResult train_attacker_against(const ReleaseMechanism& mechanism,
                                   const Population& population,
                                   const MembershipPrior& sigma,
                                   const TrainConfig& config);

/// Confidences are the network outputs; claims threshold at 0.5.
AttackDecision attack_mechanism(const Mlp& trained_attacker,
                                const Vector& release_values);

}  // namespace beaconlab

#endif  // BEACONLAB_LEARN_HPP_
