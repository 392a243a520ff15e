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

#include "beaconlab/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "beaconlab/eval.hpp"

namespace beaconlab {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;

Matrix activate(const Matrix& h, const LayerSpec& spec) {
  switch (spec.activation) {
    case Activation::identity:
      return h;
    case Activation::relu:
      return h.cwiseMax(0.0);
    case Activation::leaky_relu:
      return h.unaryExpr([&spec](double v) { return v > 0.0 ? v : spec.leak * v; });
    case Activation::sigmoid:
      return h.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::scaled_sigmoid:
      return h.unaryExpr([&spec](double v) {
        return spec.range_lo + (spec.range_hi - spec.range_lo) / (1.0 + std::exp(-v));
      });
  }
  throw std::logic_error("activate: unknown activation");
}

// Derivative with respect to the pre-activation, from the cached pre/post
// values.
Matrix activation_grad(const Matrix& pre, const Matrix& post, const LayerSpec& spec) {
  switch (spec.activation) {
    case Activation::identity:
      return Matrix::Ones(pre.rows(), pre.cols());
    case Activation::relu:
      return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
    case Activation::leaky_relu:
      return pre.unaryExpr([&spec](double v) { return v > 0.0 ? 1.0 : spec.leak; });
    case Activation::sigmoid:
      return post.unaryExpr([](double a) { return a * (1.0 - a); });
    case Activation::scaled_sigmoid: {
      const double span = spec.range_hi - spec.range_lo;
      return post.unaryExpr([&spec, span](double a) {
        const double s = (a - spec.range_lo) / span;
        return span * s * (1.0 - s);
      });
    }
  }
  throw std::logic_error("activation_grad: unknown activation");
}

}  // namespace

Mlp::Mlp(std::vector<LayerSpec> specs, std::uint64_t seed) : specs_(std::move(specs)) {
  if (specs_.empty()) throw std::invalid_argument("Mlp: need at least one layer");
  for (size_t l = 1; l < specs_.size(); ++l) {
    if (specs_[l].in != specs_[l - 1].out) {
      throw std::invalid_argument("Mlp: consecutive layer dimensions must match");
    }
  }
  Rng rng(seed);
  layers_.reserve(specs_.size());
  for (const LayerSpec& spec : specs_) {
    Layer layer;
    const double limit = 1.0 / std::sqrt(static_cast<double>(spec.in));
    std::uniform_real_distribution<double> u(-limit, limit);
    layer.weight.resize(spec.out, spec.in);
    for (int r = 0; r < spec.out; ++r) {
      for (int c = 0; c < spec.in; ++c) layer.weight(r, c) = u(rng);
    }
    layer.bias.resize(spec.out);
    for (int r = 0; r < spec.out; ++r) layer.bias[r] = u(rng);
    if (spec.batch_norm) {
      layer.bn_gamma = Vector::Ones(spec.out);
      layer.bn_beta = Vector::Zero(spec.out);
      layer.bn_run_mean = Vector::Zero(spec.out);
      layer.bn_run_var = Vector::Ones(spec.out);
    }
    layers_.push_back(std::move(layer));
  }
}

Matrix Mlp::apply(const Matrix& input) const {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("Mlp::apply: input width mismatch");
  }
  Matrix a = input;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = specs_[l];
    const Layer& layer = layers_[l];
    Matrix h = (layer.weight * a).colwise() + layer.bias;
    if (spec.batch_norm) {
      const Vector inv_std =
          (layer.bn_run_var.array() + kBnEps).sqrt().inverse().matrix();
      h = (h.colwise() - layer.bn_run_mean).array().colwise() * inv_std.array();
      h = (h.array().colwise() * layer.bn_gamma.array()).matrix().colwise() +
          layer.bn_beta;
    }
    a = activate(h, spec);
  }
  return a;
}

Vector Mlp::apply_one(const Vector& input) const { return apply(Matrix(input)).col(0); }

Matrix Mlp::forward(const Matrix& input) {
  if (input.rows() != input_dim()) {
    throw std::invalid_argument("Mlp::forward: input width mismatch");
  }
  const long batch = input.cols();
  cache_ = Cache{};
  cache_.input = input;
  Matrix a = input;
  for (size_t l = 0; l < layers_.size(); ++l) {
    const LayerSpec& spec = specs_[l];
    Layer& layer = layers_[l];
    Matrix z = (layer.weight * a).colwise() + layer.bias;
    cache_.linear.push_back(z);
    Matrix pre;
    if (spec.batch_norm) {
      const Vector mean = z.rowwise().mean();
      const Matrix centered = z.colwise() - mean;
      const Vector var = centered.array().square().rowwise().mean();
      const Vector inv_std = (var.array() + kBnEps).sqrt().inverse().matrix();
      const Matrix normalized = centered.array().colwise() * inv_std.array();
      pre = (normalized.array().colwise() * layer.bn_gamma.array()).matrix().colwise() +
            layer.bn_beta;
      cache_.normalized.push_back(normalized);
      cache_.batch_mean.push_back(mean);
      cache_.batch_inv_std.push_back(inv_std);
      layer.bn_run_mean = (1.0 - kBnMomentum) * layer.bn_run_mean + kBnMomentum * mean;
      const double unbias =
          batch > 1 ? static_cast<double>(batch) / static_cast<double>(batch - 1) : 1.0;
      layer.bn_run_var =
          (1.0 - kBnMomentum) * layer.bn_run_var + kBnMomentum * unbias * var;
    } else {
      pre = z;
      cache_.normalized.emplace_back();
      cache_.batch_mean.emplace_back();
      cache_.batch_inv_std.emplace_back();
    }
    cache_.pre_act.push_back(pre);
    a = activate(pre, spec);
    cache_.activated.push_back(a);
  }
  has_cache_ = true;
  return a;
}

Mlp::Gradients Mlp::backward(const Matrix& dloss_doutput) const {
  if (!has_cache_) {
    throw std::logic_error("Mlp::backward: no training-mode forward recorded");
  }
  const int num = num_layers();
  Gradients grads;
  grads.weight.resize(num);
  grads.bias.resize(num);
  grads.bn_gamma.resize(num);
  grads.bn_beta.resize(num);
  Matrix upstream = dloss_doutput;
  for (int l = num - 1; l >= 0; --l) {
    const LayerSpec& spec = specs_[l];
    const Layer& layer = layers_[l];
    // Through the activation.
    Matrix dpre =
        upstream.cwiseProduct(activation_grad(cache_.pre_act[l], cache_.activated[l], spec));
    Matrix dz;
    if (spec.batch_norm) {
      const Matrix& xhat = cache_.normalized[l];
      grads.bn_gamma[l] = dpre.cwiseProduct(xhat).rowwise().sum();
      grads.bn_beta[l] = dpre.rowwise().sum();
      const Matrix dxhat = dpre.array().colwise() * layer.bn_gamma.array();
      const double batch = static_cast<double>(dpre.cols());
      const Vector sum_dxhat = dxhat.rowwise().sum();
      const Vector sum_dxhat_xhat = dxhat.cwiseProduct(xhat).rowwise().sum();
      dz = ((batch * dxhat).colwise() - sum_dxhat -
            (xhat.array().colwise() * sum_dxhat_xhat.array()).matrix())
               .array()
               .colwise() *
           (cache_.batch_inv_std[l].array() / batch);
    } else {
      dz = dpre;
    }
    const Matrix& layer_input = l == 0 ? cache_.input : cache_.activated[l - 1];
    grads.weight[l] = dz * layer_input.transpose();
    grads.bias[l] = dz.rowwise().sum();
    upstream = layer.weight.transpose() * dz;
  }
  grads.input = upstream;
  return grads;
}

void Mlp::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Mlp::save: cannot open " + path);
  out.precision(17);
  out << "mlp " << num_layers() << '\n';
  const auto dump_vector = [&out](const char* name, const Vector& v) {
    out << name << ' ' << v.size() << '\n';
    for (int i = 0; i < v.size(); ++i) out << v[i] << (i + 1 == v.size() ? '\n' : ' ');
  };
  for (int l = 0; l < num_layers(); ++l) {
    const LayerSpec& spec = specs_[l];
    const Layer& layer = layers_[l];
    out << spec.in << ' ' << spec.out << ' ' << static_cast<int>(spec.activation) << ' '
        << (spec.batch_norm ? 1 : 0) << ' ' << spec.leak << ' ' << spec.range_lo << ' '
        << spec.range_hi << '\n';
    out << "W " << layer.weight.rows() << ' ' << layer.weight.cols() << '\n';
    for (int r = 0; r < layer.weight.rows(); ++r) {
      for (int c = 0; c < layer.weight.cols(); ++c) {
        out << layer.weight(r, c) << (c + 1 == layer.weight.cols() ? '\n' : ' ');
      }
    }
    dump_vector("b", layer.bias);
    if (spec.batch_norm) {
      dump_vector("bn_gamma", layer.bn_gamma);
      dump_vector("bn_beta", layer.bn_beta);
      dump_vector("bn_run_mean", layer.bn_run_mean);
      dump_vector("bn_run_var", layer.bn_run_var);
    }
  }
}

Mlp Mlp::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Mlp::load: cannot open " + path);
  std::string tag;
  int num = 0;
  if (!(in >> tag >> num) || tag != "mlp" || num < 1) {
    throw std::runtime_error("Mlp::load: malformed header in " + path);
  }
  const auto read_vector = [&in, &path](const char* name, Vector& v) {
    std::string t;
    long n = 0;
    if (!(in >> t >> n) || t != name) {
      throw std::runtime_error("Mlp::load: expected tensor " + std::string(name) +
                               " in " + path);
    }
    v.resize(n);
    for (long i = 0; i < n; ++i) in >> v[i];
  };
  Mlp net;
  for (int l = 0; l < num; ++l) {
    LayerSpec spec;
    int act = 0, bn = 0;
    if (!(in >> spec.in >> spec.out >> act >> bn >> spec.leak >> spec.range_lo >>
          spec.range_hi)) {
      throw std::runtime_error("Mlp::load: malformed layer header in " + path);
    }
    spec.activation = static_cast<Activation>(act);
    spec.batch_norm = bn != 0;
    Layer layer;
    std::string t;
    long rows = 0, cols = 0;
    if (!(in >> t >> rows >> cols) || t != "W") {
      throw std::runtime_error("Mlp::load: expected weight tensor in " + path);
    }
    layer.weight.resize(rows, cols);
    for (long r = 0; r < rows; ++r) {
      for (long c = 0; c < cols; ++c) in >> layer.weight(r, c);
    }
    read_vector("b", layer.bias);
    if (spec.batch_norm) {
      read_vector("bn_gamma", layer.bn_gamma);
      read_vector("bn_beta", layer.bn_beta);
      read_vector("bn_run_mean", layer.bn_run_mean);
      read_vector("bn_run_var", layer.bn_run_var);
    }
    if (!in) throw std::runtime_error("Mlp::load: truncated tensors in " + path);
    net.specs_.push_back(spec);
    net.layers_.push_back(std::move(layer));
  }
  return net;
}

AdamOptimizer::AdamOptimizer(double lr, double weight_decay, double beta1, double beta2,
                             double eps)
    : lr_(lr), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(Mlp& net, const Mlp::Gradients& grads) {
  const int num = net.num_layers();
  if (moments_.empty()) {
    moments_.resize(2);
    for (Mlp::Gradients& m : moments_) {
      m.weight.resize(num);
      m.bias.resize(num);
      m.bn_gamma.resize(num);
      m.bn_beta.resize(num);
      for (int l = 0; l < num; ++l) {
        const Mlp::Layer& layer = net.layers()[l];
        m.weight[l] = Matrix::Zero(layer.weight.rows(), layer.weight.cols());
        m.bias[l] = Vector::Zero(layer.bias.size());
        if (net.specs()[l].batch_norm) {
          m.bn_gamma[l] = Vector::Zero(layer.bn_gamma.size());
          m.bn_beta[l] = Vector::Zero(layer.bn_beta.size());
        }
      }
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto update = [this, bc1, bc2](auto& param, const auto& grad, auto& m1,
                                       auto& m2) {
    const auto g = (grad + weight_decay_ * param).eval();
    m1 = beta1_ * m1 + (1.0 - beta1_) * g;
    m2 = (beta2_ * m2.array() + (1.0 - beta2_) * g.array().square()).matrix();
    param.array() -=
        lr_ * (m1.array() / bc1) / ((m2.array() / bc2).sqrt() + eps_);
  };
  for (int l = 0; l < num; ++l) {
    Mlp::Layer& layer = net.layers()[l];
    update(layer.weight, grads.weight[l], moments_[0].weight[l], moments_[1].weight[l]);
    update(layer.bias, grads.bias[l], moments_[0].bias[l], moments_[1].bias[l]);
    if (net.specs()[l].batch_norm) {
      update(layer.bn_gamma, grads.bn_gamma[l], moments_[0].bn_gamma[l],
             moments_[1].bn_gamma[l]);
      update(layer.bn_beta, grads.bn_beta[l], moments_[0].bn_beta[l],
             moments_[1].bn_beta[l]);
    }
  }
}

int default_aux_dim(int num_individuals) {
  return (num_individuals + 26) / 27;
}

std::vector<LayerSpec> defender_architecture(int num_individuals, int aux_dim,
                                             int num_snvs) {
  const int in = num_individuals + aux_dim;
  const auto scaled = [in](double reference_out) {
    return std::max(4, static_cast<int>(std::lround(in * reference_out / 830.0)));
  };
  const int h1 = scaled(1500.0), h2 = scaled(1100.0), h3 = scaled(500.0);
  return {
      {in, h1, Activation::relu, true},
      {h1, h2, Activation::relu, true},
      {h2, h3, Activation::leaky_relu, true},
      {h3, num_snvs, Activation::scaled_sigmoid, false},
  };
}

std::vector<LayerSpec> attacker_architecture(int num_snvs, int num_individuals) {
  const auto scaled = [num_snvs](double reference_out) {
    return std::max(4, static_cast<int>(std::lround(num_snvs * reference_out / 5000.0)));
  };
  const int h1 = scaled(3400.0), h2 = scaled(2000.0);
  return {
      {num_snvs, h1, Activation::relu, true},
      {h1, h2, Activation::relu, true},
      {h2, num_individuals, Activation::sigmoid, false},
  };
}

ReleaseMechanism GeneratorMechanism::as_mechanism() const {
  auto model_ptr = std::make_shared<const Mlp>(model);
  const int aux = aux_dim;
  NoiseSampler sampler = [model_ptr, aux](const MembershipVector& b, Rng& rng) {
    Vector input(b.size() + aux);
    input.head(b.size()) = b.bits.cast<double>();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < aux; ++i) input[b.size() + i] = u(rng);
    return model_ptr->apply_one(input);
  };
  const int m = model.output_dim();
  return ReleaseMechanism::generator(m, std::move(sampler), clip);
}

namespace {

Matrix sample_b_batch(const MembershipPrior& prior, int batch, Rng& rng) {
  Matrix out(prior.size(), batch);
  for (int c = 0; c < batch; ++c) {
    out.col(c) = prior.sample(rng).bits.cast<double>();
  }
  return out;
}

Matrix sample_nu_batch(int aux_dim, int batch, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix out(aux_dim, batch);
  for (int c = 0; c < batch; ++c) {
    for (int r = 0; r < aux_dim; ++r) out(r, c) = u(rng);
  }
  return out;
}

// x(b) per column; empty-beacon columns release the reference AAFs.
Matrix stats_for_batch(const Population& population, const Matrix& b_batch) {
  Matrix x = population.genotypes.transpose() * b_batch;
  for (int c = 0; c < b_batch.cols(); ++c) {
    const double count = b_batch.col(c).sum();
    if (count > 0.0) {
      x.col(c) /= count;
    } else {
      x.col(c) = population.reference_aafs;
    }
  }
  return x;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

struct ClippedRelease {
  Matrix r;
  Matrix mask;  // 1 where the clip is inactive (gradient passes)
};

ClippedRelease release_batch(const Matrix& x, const Matrix& delta, bool clip) {
  ClippedRelease out;
  const Matrix pre = x + delta;
  if (!clip) {
    out.r = pre;
    out.mask = Matrix::Ones(pre.rows(), pre.cols());
    return out;
  }
  out.r = pre.cwiseMax(0.0).cwiseMin(1.0);
  out.mask = pre.unaryExpr([](double v) { return v > 0.0 && v < 1.0 ? 1.0 : 0.0; });
  return out;
}

void check_finite(double loss, const char* what, int epoch, int step) {
  if (!std::isfinite(loss)) {
    std::ostringstream os;
    os << what << " diverged (non-finite loss) at epoch " << epoch << ", step " << step;
    throw std::runtime_error(os.str());
  }
}

double utility_term(const Matrix& delta, const Vector& kappa) {
  return (kappa.transpose() * delta.cwiseAbs()).sum() / delta.cols();
}

// AUC of pooled per-individual confidences over freshly sampled beacons.
double eval_generator_auc(const Mlp& generator, const Mlp* attacker,
                          const Population& population, const MembershipPrior& q,
                          const TrainConfig& config, int aux_dim, Rng& rng,
                          const Matrix* reference, int adaptive_n, double fixed_tau,
                          LrtDefenseKind lrt_kind, bool use_lrt_attacker) {
  const int kk = population.num_individuals();
  const int n_eval = config.eval_beacons;
  std::vector<double> conf;
  std::vector<int> labels;
  conf.reserve(static_cast<size_t>(n_eval) * kk);
  labels.reserve(static_cast<size_t>(n_eval) * kk);
  for (int e = 0; e < n_eval; ++e) {
    const MembershipVector b = q.sample_nonempty(rng);
    Matrix bb = b.bits.cast<double>();
    const Matrix x = stats_for_batch(population, bb);
    const Matrix nu = sample_nu_batch(aux_dim, 1, rng);
    const Vector delta = generator.apply_one(Vector(vstack(bb, nu).col(0)));
    const ClippedRelease rel = release_batch(x, delta, config.clip);
    Vector scores;
    if (use_lrt_attacker) {
      const double floor = default_clamp_floor(std::max(1, b.count()));
      if (lrt_kind == LrtDefenseKind::fixed) {
        scores = fixed_threshold_attack(population, rel.r.col(0), fixed_tau, floor)
                     .confidences;
      } else {
        scores = adaptive_attack(population, rel.r.col(0), *reference, adaptive_n, floor)
                     .confidences;
      }
    } else {
      scores = attacker->apply_one(Vector(rel.r.col(0)));
    }
    for (int k = 0; k < kk; ++k) {
      conf.push_back(scores[k]);
      labels.push_back(b.bits[k]);
    }
  }
  Vector cv = Eigen::Map<Vector>(conf.data(), static_cast<long>(conf.size()));
  IntVector lv(static_cast<long>(labels.size()));
  for (size_t i = 0; i < labels.size(); ++i) lv[static_cast<long>(i)] = labels[i];
  if (lv.sum() == 0 || lv.sum() == lv.size()) return 0.5;
  return roc_auc(cv, lv).auc;
}

double eval_mechanism_auc(const ReleaseMechanism& mechanism, const Mlp& attacker,
                          const Population& population, const MembershipPrior& q,
                          int n_eval, Rng& rng) {
  const int kk = population.num_individuals();
  std::vector<double> conf;
  std::vector<int> labels;
  for (int e = 0; e < n_eval; ++e) {
    const MembershipVector b = q.sample_nonempty(rng);
    const Release release = sample_release(mechanism, population, b, rng);
    const Vector scores = attacker.apply_one(release.values);
    for (int k = 0; k < kk; ++k) {
      conf.push_back(scores[k]);
      labels.push_back(b.bits[k]);
    }
  }
  Vector cv = Eigen::Map<Vector>(conf.data(), static_cast<long>(conf.size()));
  IntVector lv(static_cast<long>(labels.size()));
  for (size_t i = 0; i < labels.size(); ++i) lv[static_cast<long>(i)] = labels[i];
  if (lv.sum() == 0 || lv.sum() == lv.size()) return 0.5;
  return roc_auc(cv, lv).auc;
}

Vector effective_kappa(const TrainConfig& config, int num_snvs) {
  if (config.kappa.size() == 0) return Vector::Zero(num_snvs);
  if (config.kappa.size() == 1) return Vector::Constant(num_snvs, config.kappa[0]);
  if (config.kappa.size() != num_snvs) {
    throw std::invalid_argument("TrainConfig: kappa length must be 1 or m");
  }
  return config.kappa;
}

}  // namespace

double defender_loss(const Mlp& generator, const Mlp& attacker, const Matrix& batch_b,
                     const Matrix& batch_nu, const Vector& kappa,
                     const Population& population, bool kappa_on_privacy, bool clip) {
  const Matrix x = stats_for_batch(population, batch_b);
  const Matrix delta = generator.apply(vstack(batch_b, batch_nu));
  const ClippedRelease rel = release_batch(x, delta, clip);
  const Matrix p = attacker.apply(rel.r);
  const double privacy = batch_b.cwiseProduct(p).sum() / batch_b.cols();
  if (kappa_on_privacy) {
    const double kappa_mean = kappa.size() > 0 ? kappa.mean() : 0.0;
    return delta.cwiseAbs().sum() / delta.cols() + kappa_mean * privacy;
  }
  return privacy + utility_term(delta, kappa);
}

double attacker_loss(const Mlp& generator, const Mlp& attacker, const Matrix& batch_b,
                     const Matrix& batch_nu, double gamma,
                     const Population& population, bool clip) {
  const Matrix x = stats_for_batch(population, batch_b);
  const Matrix delta = generator.apply(vstack(batch_b, batch_nu));
  const ClippedRelease rel = release_batch(x, delta, clip);
  const Matrix p = attacker.apply(rel.r);
  return (-batch_b.cwiseProduct(p).sum() + gamma * p.sum()) / batch_b.cols();
}

AttackDecision attack_mechanism(const Mlp& trained_attacker,
                                const Vector& release_values) {
  AttackDecision decision;
  decision.confidences = trained_attacker.apply_one(release_values);
  decision.claims.resize(decision.confidences.size());
  for (int k = 0; k < decision.confidences.size(); ++k) {
    decision.claims[k] = decision.confidences[k] > 0.5 ? 1 : 0;
  }
  return decision;
}

TrainResult train_bne(const Population& population, const MembershipPrior& q,
                      const MembershipPrior& sigma, const TrainConfig& config) {
  const int kk = population.num_individuals();
  const int m = population.num_snvs();
  const int aux = config.aux_dim > 0 ? config.aux_dim : default_aux_dim(kk);
  const Vector kappa = effective_kappa(config, m);
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
    throw std::invalid_argument("train_bne: gamma must lie in (0, 1)");
  }

  Rng rng(config.seed);
  Mlp generator(defender_architecture(kk, aux, m), rng());
  Mlp attacker(attacker_architecture(m, kk), rng());
  AdamOptimizer opt_g(config.defender_lr, config.weight_decay);
  AdamOptimizer opt_a(config.attacker_lr, config.weight_decay);

  TrainResult result;
  const double kappa_mean = kappa.size() > 0 ? kappa.mean() : 0.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    RunningStat d_loss, a_loss;
    for (int step = 0; step < config.batches_per_epoch; ++step) {
      // Defender step: minimize privacy + utility with the attacker frozen.
      {
        const Matrix bb = sample_b_batch(q, config.batch_size, rng);
        const Matrix nu = sample_nu_batch(aux, config.batch_size, rng);
        const Matrix x = stats_for_batch(population, bb);
        const double batch = static_cast<double>(config.batch_size);
        Matrix delta = generator.forward(vstack(bb, nu));
        const ClippedRelease rel = release_batch(x, delta, config.clip);
        const Matrix p = attacker.forward(rel.r);
        const double privacy = bb.cwiseProduct(p).sum() / batch;
        const double priv_coef = config.kappa_on_privacy ? kappa_mean : 1.0;
        double loss;
        Matrix ddelta;
        const Matrix dp = priv_coef * bb / batch;
        const Matrix dr = attacker.backward(dp).input;
        if (config.kappa_on_privacy) {
          loss = delta.cwiseAbs().sum() / batch + priv_coef * privacy;
          ddelta = dr.cwiseProduct(rel.mask) +
                   delta.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }) / batch;
        } else {
          loss = privacy + (kappa.transpose() * delta.cwiseAbs()).sum() / batch;
          Matrix sign = delta.unaryExpr(
              [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
          ddelta = dr.cwiseProduct(rel.mask) +
                   (sign.array().colwise() * kappa.array()).matrix() / batch;
        }
        check_finite(loss, "train_bne defender", epoch, step);
        d_loss.add(loss);
        opt_g.step(generator, generator.backward(ddelta));
      }
      // Attacker step: minimize its own cost on a fresh batch from sigma.
      {
        const Matrix bb = sample_b_batch(sigma, config.batch_size, rng);
        const Matrix nu = sample_nu_batch(aux, config.batch_size, rng);
        const Matrix x = stats_for_batch(population, bb);
        const double batch = static_cast<double>(config.batch_size);
        Matrix delta = generator.forward(vstack(bb, nu));
        const ClippedRelease rel = release_batch(x, delta, config.clip);
        const Matrix p = attacker.forward(rel.r);
        const double loss = (-bb.cwiseProduct(p).sum() + config.gamma * p.sum()) / batch;
        check_finite(loss, "train_bne attacker", epoch, step);
        a_loss.add(loss);
        const Matrix dp = (Matrix::Constant(kk, config.batch_size, config.gamma) - bb) / batch;
        opt_a.step(attacker, attacker.backward(dp));
      }
    }
    opt_g.scale_lr(config.lr_decay);
    opt_a.scale_lr(config.lr_decay);
    EpochStats stats;
    stats.epoch = epoch;
    stats.defender_loss = d_loss.mean();
    stats.attacker_loss = a_loss.mean();
    stats.auc = eval_generator_auc(generator, &attacker, population, q, config, aux, rng,
                                   nullptr, 0, 0.0, LrtDefenseKind::fixed, false);
    result.history.push_back(stats);
  }
  result.generator = GeneratorMechanism{std::move(generator), aux, config.clip};
  result.attacker = std::move(attacker);
  return result;
}

TrainResult train_lrt_defense(const Population& population, const MembershipPrior& q,
                              const TrainConfig& config, LrtDefenseKind kind) {
  const int kk = population.num_individuals();
  const int m = population.num_snvs();
  const int aux = config.aux_dim > 0 ? config.aux_dim : default_aux_dim(kk);
  const Vector kappa = effective_kappa(config, m);
  const double floor = config.clamp_floor > 0.0
                           ? config.clamp_floor
                           : default_clamp_floor(std::max(1, kk / 2));

  Rng rng(config.seed);
  Mlp generator(defender_architecture(kk, aux, m), rng());

  // Reference pool for the adaptive threshold, disjoint from the universe.
  Matrix reference(config.reference_pool, m);
  {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < config.reference_pool; ++i) {
      for (int j = 0; j < m; ++j) {
        reference(i, j) = u(rng) < population.reference_aafs[j] ? 1.0 : 0.0;
      }
    }
  }
  const int adaptive_n = config.adaptive_n > 0
                             ? config.adaptive_n
                             : std::max(1, static_cast<int>(0.05 * config.reference_pool));

  AdamOptimizer opt_g(config.defender_lr, config.weight_decay);
  double temperature = config.softmin_temperature;

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    RunningStat d_loss;
    for (int step = 0; step < config.batches_per_epoch; ++step) {
      const Matrix bb = sample_b_batch(q, config.batch_size, rng);
      const Matrix nu = sample_nu_batch(aux, config.batch_size, rng);
      const Matrix x = stats_for_batch(population, bb);
      const double batch = static_cast<double>(config.batch_size);
      Matrix delta = generator.forward(vstack(bb, nu));
      const ClippedRelease rel = release_batch(x, delta, config.clip);

      // Clamp the released stats, then evaluate every LRS on them.
      Matrix xt = rel.r.cwiseMax(floor).cwiseMin(1.0 - floor);
      Matrix clamp_mask = rel.r.unaryExpr([floor](double v) {
        return v > floor && v < 1.0 - floor ? 1.0 : 0.0;
      });
      // Per-sample coefficient rows: c1 = log(p) - log(xt), c0 = log1p(-p) -
      // log1p(-xt); LRS = D (c1 - c0) + sum(c0).
      Matrix c1(m, config.batch_size), c0(m, config.batch_size);
      for (int c = 0; c < config.batch_size; ++c) {
        for (int j = 0; j < m; ++j) {
          const double p = population.reference_aafs[j];
          c1(j, c) = std::log(p) - std::log(xt(j, c));
          c0(j, c) = std::log1p(-p) - std::log1p(-xt(j, c));
        }
      }
      const Matrix diff = c1 - c0;
      const Vector c0_sum = c0.colwise().sum();
      Matrix ell = population.genotypes * diff;  // K x B
      ell.rowwise() += c0_sum.transpose();

      Matrix q_target(kk, config.batch_size);  // dLoss/d ell(target)
      Matrix q_reference;                      // dLoss/d ell(reference)
      double privacy = 0.0;
      if (kind == LrtDefenseKind::fixed) {
        const Matrix a = (config.fixed_tau - ell.array()).matrix();
        const Matrix s = a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        privacy = bb.cwiseProduct(s).sum() / batch;
        // d privacy / d ell_k = -b_k s'(a_k) / B
        q_target = -bb.cwiseProduct(s.cwiseProduct(Matrix::Ones(kk, config.batch_size) - s)) / batch;
      } else {
        Matrix ell_ref = reference * diff;  // R x B
        ell_ref.rowwise() += c0_sum.transpose();
        const int rr = static_cast<int>(reference.rows());
        q_reference.resize(rr, config.batch_size);
        Matrix tau(1, config.batch_size);
        Matrix w(rr, config.batch_size);
        for (int c = 0; c < config.batch_size; ++c) {
          std::vector<double> col(ell_ref.col(c).data(), ell_ref.col(c).data() + rr);
          std::nth_element(col.begin(), col.begin() + adaptive_n - 1, col.end());
          const double cutoff = col[adaptive_n - 1];
          double sw = 0.0, swl = 0.0;
          for (int i = 0; i < rr; ++i) {
            const double wi =
                1.0 / (1.0 + std::exp(-(cutoff - ell_ref(i, c)) / temperature));
            w(i, c) = wi;
            sw += wi;
            swl += wi * ell_ref(i, c);
          }
          tau(0, c) = swl / sw;
          // d tau / d ell_ref_i = (w_i + w_i'(ell_i - tau)) / sum w, with
          // w_i' = -w_i (1 - w_i) / T; the hard cutoff is held fixed.
          for (int i = 0; i < rr; ++i) {
            const double wp = -w(i, c) * (1.0 - w(i, c)) / temperature;
            q_reference(i, c) = (w(i, c) + wp * (ell_ref(i, c) - tau(0, c))) / sw;
          }
        }
        Matrix a(kk, config.batch_size);
        for (int c = 0; c < config.batch_size; ++c) {
          a.col(c) = (tau(0, c) - ell.col(c).array()).matrix();
        }
        const Matrix s = a.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        privacy = bb.cwiseProduct(s).sum() / batch;
        const Matrix ds = bb.cwiseProduct(s.cwiseProduct(Matrix::Ones(kk, config.batch_size) - s)) / batch;
        q_target = -ds;
        const Vector dtau = ds.colwise().sum();  // d privacy / d tau per sample
        for (int c = 0; c < config.batch_size; ++c) {
          q_reference.col(c) *= dtau[c];
        }
      }

      // Chain rule into the released vector: d ell / d r_j =
      // (-d_kj / xt_j + (1 - d_kj) / (1 - xt_j)) inside the clamp.
      const Matrix inv_x = xt.cwiseInverse();
      const Matrix inv_1mx = (1.0 - xt.array()).inverse().matrix();
      Matrix t1 = population.genotypes.transpose() * q_target;  // m x B
      Vector t2 = q_target.colwise().sum();
      if (kind == LrtDefenseKind::adaptive) {
        t1 += reference.transpose() * q_reference;
        t2 += q_reference.colwise().sum();
      }
      Matrix dpriv_dr =
          (-t1.cwiseProduct(inv_x + inv_1mx) +
           (inv_1mx.array().rowwise() * t2.transpose().array()).matrix())
              .cwiseProduct(clamp_mask);

      const double loss = privacy + (kappa.transpose() * delta.cwiseAbs()).sum() / batch;
      check_finite(loss, "train_lrt_defense", epoch, step);
      d_loss.add(loss);
      Matrix sign = delta.unaryExpr(
          [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      const Matrix ddelta = dpriv_dr.cwiseProduct(rel.mask) +
                            (sign.array().colwise() * kappa.array()).matrix() / batch;
      opt_g.step(generator, generator.backward(ddelta));
    }
    opt_g.scale_lr(config.lr_decay);
    temperature = std::max(0.01, temperature * config.softmin_anneal);
    EpochStats stats;
    stats.epoch = epoch;
    stats.defender_loss = d_loss.mean();
    stats.attacker_loss = 0.0;
    stats.auc = eval_generator_auc(generator, nullptr, population, q, config, aux, rng,
                                   &reference, adaptive_n, config.fixed_tau, kind, true);
    result.history.push_back(stats);
  }
  result.generator = GeneratorMechanism{std::move(generator), aux, config.clip};
  return result;
}

TrainResult train_attacker_against(const ReleaseMechanism& mechanism,
                                   const Population& population,
                                   const MembershipPrior& sigma,
                                   const TrainConfig& config) {
  const int kk = population.num_individuals();
  const int m = population.num_snvs();
  if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
    throw std::invalid_argument("train_attacker_against: gamma must lie in (0, 1)");
  }
  Rng rng(config.seed);
  Mlp attacker(attacker_architecture(m, kk), rng());
  AdamOptimizer opt_a(config.attacker_lr, config.weight_decay);
  TrainResult result;
  Matrix r_batch(m, config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    RunningStat a_loss;
    for (int step = 0; step < config.batches_per_epoch; ++step) {
      Matrix bb(kk, config.batch_size);
      for (int c = 0; c < config.batch_size; ++c) {
        const MembershipVector b = sigma.sample(rng);
        bb.col(c) = b.bits.cast<double>();
        r_batch.col(c) = sample_release(mechanism, population, b, rng).values;
      }
      const double batch = static_cast<double>(config.batch_size);
      const Matrix p = attacker.forward(r_batch);
      const double loss = (-bb.cwiseProduct(p).sum() + config.gamma * p.sum()) / batch;
      check_finite(loss, "train_attacker_against", epoch, step);
      a_loss.add(loss);
      const Matrix dp = (Matrix::Constant(kk, config.batch_size, config.gamma) - bb) / batch;
      opt_a.step(attacker, attacker.backward(dp));
    }
    opt_a.scale_lr(config.lr_decay);
    EpochStats stats;
    stats.epoch = epoch;
    stats.attacker_loss = a_loss.mean();
    stats.auc = eval_mechanism_auc(mechanism, attacker, population, sigma,
                                   config.eval_beacons, rng);
    result.history.push_back(stats);
  }
  result.attacker = std::move(attacker);
  return result;
}

}  // namespace beaconlab
