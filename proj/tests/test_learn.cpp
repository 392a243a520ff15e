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

#include <cmath>
#include <cstdio>

#include "beaconlab/eval.hpp"
#include "doctest.h"

using namespace beaconlab;

namespace {

void zero_parameters(Mlp& net) {
  for (Mlp::Layer& layer : net.layers()) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

// Linear probe loss sum(C .* forward(X)) whose output gradient is C itself.
double probe_loss(Mlp& net, const Matrix& x, const Matrix& c) {
  return net.forward(x).cwiseProduct(c).sum();
}

struct FdCheck {
  double max_rel_err = 0.0;
  int probes = 0;
};

double rel_err(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

// Central finite differences on 10 random entries of every parameter tensor
// plus the input.
FdCheck finite_difference_check(Mlp& net, const Matrix& x, const Matrix& c,
                                std::uint64_t seed) {
  const double h = 1e-5;
  probe_loss(net, x, c);
  const Mlp::Gradients grads = net.backward(c);
  FdCheck out;
  Rng rng(seed);
  const auto probe_tensor = [&](auto& tensor, const auto& grad) {
    const long size = tensor.size();
    std::uniform_int_distribution<long> pick(0, size - 1);
    for (int p = 0; p < 10; ++p) {
      const long i = pick(rng);
      const double orig = tensor.data()[i];
      tensor.data()[i] = orig + h;
      const double up = probe_loss(net, x, c);
      tensor.data()[i] = orig - h;
      const double down = probe_loss(net, x, c);
      tensor.data()[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      out.max_rel_err = std::max(out.max_rel_err, rel_err(grad.data()[i], numeric));
      ++out.probes;
    }
  };
  for (int l = 0; l < net.num_layers(); ++l) {
    probe_tensor(net.layers()[l].weight, grads.weight[l]);
    probe_tensor(net.layers()[l].bias, grads.bias[l]);
    if (net.specs()[l].batch_norm) {
      probe_tensor(net.layers()[l].bn_gamma, grads.bn_gamma[l]);
      probe_tensor(net.layers()[l].bn_beta, grads.bn_beta[l]);
    }
  }
  // Input gradient through the whole stack.
  Matrix xcopy = x;
  std::uniform_int_distribution<long> pick(0, xcopy.size() - 1);
  for (int p = 0; p < 10; ++p) {
    const long i = pick(rng);
    const double orig = xcopy.data()[i];
    xcopy.data()[i] = orig + h;
    const double up = probe_loss(net, xcopy, c);
    xcopy.data()[i] = orig - h;
    const double down = probe_loss(net, xcopy, c);
    xcopy.data()[i] = orig;
    const double numeric = (up - down) / (2.0 * h);
    out.max_rel_err = std::max(out.max_rel_err, rel_err(grads.input.data()[i], numeric));
    ++out.probes;
  }
  probe_loss(net, x, c);  // restore the cache for callers
  return out;
}

Matrix random_matrix(int rows, int cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = n(rng);
  }
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("learn");

TEST_CASE("forward basics") {
  SUBCASE("zero parameters with sigmoid output give one half") {
    Mlp net({{3, 2, Activation::sigmoid, false}}, 1);
    zero_parameters(net);
    const Matrix out = net.apply(Matrix::Random(3, 5));
    CHECK((out.array() == 0.5).all());
  }
  SUBCASE("identity single layer is the affine map") {
    Mlp net({{2, 2, Activation::identity, false}}, 2);
    Matrix w(2, 2);
    w << 1, 2, 3, 4;
    net.layers()[0].weight = w;
    net.layers()[0].bias << 0.5, -0.5;
    Vector in(2);
    in << 1.0, 1.0;
    const Vector out = net.apply_one(in);
    CHECK(out[0] == doctest::Approx(3.5));
    CHECK(out[1] == doctest::Approx(6.5));
  }
  SUBCASE("forward is pure") {
    Mlp net({{4, 6, Activation::relu, true}, {6, 3, Activation::sigmoid, false}}, 3);
    const Matrix x = Matrix::Random(4, 7);
    const Matrix a = net.apply(x);
    const Matrix b = net.apply(x);
    CHECK(a == b);
  }
  SUBCASE("dimension mismatch throws") {
    Mlp net({{4, 2, Activation::relu, false}}, 4);
    CHECK_THROWS_AS(net.apply(Matrix::Random(3, 2)), std::invalid_argument);
    CHECK_THROWS_AS(Mlp({{4, 2, Activation::relu, false},
                         {3, 2, Activation::relu, false}},
                        5),
                    std::invalid_argument);
  }
}

TEST_CASE("gradients match central finite differences for every layer kind") {
  Rng rng(11);
  const std::vector<Activation> acts = {Activation::identity, Activation::relu,
                                        Activation::leaky_relu, Activation::sigmoid,
                                        Activation::scaled_sigmoid};
  int combo = 0;
  for (Activation act : acts) {
    for (bool bn : {false, true}) {
      Mlp net({{5, 7, act, bn}, {7, 4, Activation::sigmoid, bn}},
              100 + static_cast<std::uint64_t>(combo));
      const Matrix x = random_matrix(5, 6, rng);
      const Matrix c = random_matrix(4, 6, rng);
      const FdCheck check = finite_difference_check(net, x, c, 500 + combo);
      INFO("activation ", static_cast<int>(act), " bn ", bn, " rel err ",
           check.max_rel_err);
      CHECK(check.max_rel_err <= 1e-4);
      ++combo;
    }
  }
}

TEST_CASE("linear layer with squared loss reproduces the closed-form gradient") {
  Mlp net({{3, 2, Activation::identity, false}}, 21);
  Rng rng(22);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix y = random_matrix(2, 4, rng);
  const Matrix out = net.forward(x);
  const Matrix resid = out - y;  // d(0.5 ||out - y||^2)/d out
  const Mlp::Gradients grads = net.backward(resid);
  const Matrix expected_dw = resid * x.transpose();
  CHECK((grads.weight[0] - expected_dw).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((grads.bias[0] - resid.rowwise().sum()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero upstream gradient yields zero parameter gradients") {
  Mlp net({{3, 5, Activation::relu, true}, {5, 2, Activation::sigmoid, false}}, 31);
  Rng rng(32);
  net.forward(random_matrix(3, 4, rng));
  const Mlp::Gradients grads = net.backward(Matrix::Zero(2, 4));
  for (int l = 0; l < net.num_layers(); ++l) {
    CHECK(grads.weight[l].cwiseAbs().maxCoeff() == 0.0);
    CHECK(grads.bias[l].cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(grads.input.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("game losses agree with hand arithmetic on a two-individual batch") {
  Population pop;
  pop.genotypes.resize(2, 3);
  pop.genotypes << 1, 0, 1, 0, 1, 1;
  pop.reference_aafs = Vector::Constant(3, 0.5);

  // Zero-parameter nets: the scaled sigmoid emits exactly zero noise and the
  // attacker outputs one half everywhere.
  Mlp generator({{2 + 1, 3, Activation::scaled_sigmoid, false}}, 41);
  Mlp attacker({{3, 2, Activation::sigmoid, false}}, 42);
  zero_parameters(generator);
  zero_parameters(attacker);

  Matrix bb(2, 2);
  bb << 1, 1, 0, 1;  // columns: {k=0}, {k=0, k=1}
  const Matrix nu = Matrix::Constant(1, 2, 0.3);
  const Vector kappa = Vector::Constant(3, 2.0);

  // privacy = mean(0.5 * 1, 0.5 * 2) = 0.75; utility = 0 since delta = 0.
  CHECK(defender_loss(generator, attacker, bb, nu, kappa, pop) ==
        doctest::Approx(0.75));
  // attacker cost = mean(-0.5 + gamma * 1, -1.0 + gamma * 1) with gamma 0.4:
  // = ((-0.5 + 0.6) + (-1.0 + 0.6)) / 2  (three outputs of 0.5 each sample)
  const double gamma = 0.4;
  const double expected =
      ((-0.5 + gamma * 0.5 * 2) + (-1.0 + gamma * 0.5 * 2)) / 2.0;
  CHECK(attacker_loss(generator, attacker, bb, nu, gamma, pop) ==
        doctest::Approx(expected));

  SUBCASE("kappa of zero leaves only the privacy proxy") {
    generator.layers()[0].bias.setConstant(20.0);  // noise saturates near +0.5
    CHECK(defender_loss(generator, attacker, bb, nu, Vector::Zero(3), pop) ==
          doctest::Approx(0.75));
  }
  SUBCASE("a silent attacker leaves only the utility term") {
    generator.layers()[0].bias.setConstant(20.0);
    attacker.layers()[0].bias.setConstant(-40.0);  // p ~ 0
    const double util = defender_loss(generator, attacker, bb, nu, kappa, pop);
    // delta = sigmoid(20) - 0.5 per coordinate, kappa = 2, m = 3.
    const double expected_util = 3.0 * 2.0 * (1.0 / (1.0 + std::exp(-20.0)) - 0.5);
    CHECK(util == doctest::Approx(expected_util).epsilon(1e-9));
  }
  SUBCASE("gamma = 1 with everyone a member cancels exactly") {
    Matrix ones = Matrix::Ones(2, 2);
    CHECK(attacker_loss(generator, attacker, ones, nu, 1.0, pop) ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("attack_mechanism on an untrained zero net") {
  Mlp attacker({{3, 4, Activation::sigmoid, false}}, 51);
  zero_parameters(attacker);
  Vector r(3);
  r << 0.2, 0.6, 0.9;
  const AttackDecision d1 = attack_mechanism(attacker, r);
  const AttackDecision d2 = attack_mechanism(attacker, r);
  CHECK((d1.confidences.array() == 0.5).all());
  CHECK(d1.claims.sum() == 0);  // 0.5 is not above the 0.5 threshold
  CHECK(d1.confidences == d2.confidences);
  CHECK(d1.claims == d2.claims);
}

TEST_CASE("default architectures follow the reference proportions") {
  const auto defender = defender_architecture(800, 30, 5000);
  CHECK(defender[0].in == 830);
  CHECK(defender[0].out == 1500);
  CHECK(defender[1].out == 1100);
  CHECK(defender[2].out == 500);
  CHECK(defender[3].out == 5000);
  CHECK(defender[3].activation == Activation::scaled_sigmoid);
  const auto attacker = attacker_architecture(5000, 800);
  CHECK(attacker[0].out == 3400);
  CHECK(attacker[1].out == 2000);
  CHECK(attacker[2].out == 800);
  CHECK(default_aux_dim(800) == 30);
}

TEST_CASE("checkpoint save/load round trip") {
  Mlp net({{4, 6, Activation::relu, true}, {6, 3, Activation::scaled_sigmoid, false}},
          61);
  Rng rng(62);
  net.forward(random_matrix(4, 8, rng));  // move the running statistics
  const std::string path = "test_learn_checkpoint.txt";
  net.save(path);
  const Mlp loaded = Mlp::load(path);
  const Matrix x = random_matrix(4, 5, rng);
  CHECK((net.apply(x) - loaded.apply(x)).cwiseAbs().maxCoeff() < 1e-12);
  std::remove(path.c_str());
}

TEST_CASE("one small-step update never raises the attacker loss on its batch") {
  Rng rng(71);
  Mlp attacker(attacker_architecture(10, 6), 72);
  const Matrix r = random_matrix(10, 16, rng, 0.3);
  Matrix bb(6, 16);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < bb.size(); ++i) bb.data()[i] = coin(rng) ? 1.0 : 0.0;
  const double gamma = 0.5;
  const double batch = 16.0;

  const Matrix p0 = attacker.forward(r);
  const double loss0 = (-bb.cwiseProduct(p0).sum() + gamma * p0.sum()) / batch;
  const Matrix dp = (Matrix::Constant(6, 16, gamma) - bb) / batch;
  AdamOptimizer opt(1e-7, 0.0);
  opt.step(attacker, attacker.backward(dp));
  const Matrix p1 = attacker.forward(r);
  const double loss1 = (-bb.cwiseProduct(p1).sum() + gamma * p1.sum()) / batch;
  CHECK(loss1 <= loss0 + 1e-12);
}

TEST_CASE("generator mechanism keeps noise inside the half-unit box") {
  const Population pop =
      generate_population(12, 8, AafDistribution::beta_truncated(0.5, 2.0), 81);
  TrainConfig config;
  config.epochs = 3;
  config.batches_per_epoch = 4;
  config.batch_size = 8;
  config.eval_beacons = 4;
  config.seed = 5;
  config.kappa = Vector::Constant(1, 1.0);
  const TrainResult result =
      train_bne(pop, MembershipPrior::bernoulli(12, 0.5),
                MembershipPrior::bernoulli(12, 0.5), config);
  const ReleaseMechanism mech = result.generator.as_mechanism();
  Rng rng(6);
  const MembershipPrior q = MembershipPrior::bernoulli(12, 0.5);
  for (int i = 0; i < 50; ++i) {
    const Release r = sample_release(mech, pop, q.sample_nonempty(rng), rng);
    CHECK(r.noise.cwiseAbs().maxCoeff() <= 0.5);
    CHECK((r.values.array() >= 0.0).all());
    CHECK((r.values.array() <= 1.0).all());
  }
}

TEST_CASE("training is deterministic given the seed") {
  const Population pop =
      generate_population(10, 8, AafDistribution::beta_truncated(0.5, 2.0), 91);
  TrainConfig config;
  config.epochs = 2;
  config.batches_per_epoch = 3;
  config.batch_size = 8;
  config.eval_beacons = 4;
  config.seed = 7;
  const MembershipPrior q = MembershipPrior::bernoulli(10, 0.5);
  const TrainResult a = train_bne(pop, q, q, config);
  const TrainResult b = train_bne(pop, q, q, config);
  REQUIRE(a.history.size() == b.history.size());
  for (size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].defender_loss == b.history[i].defender_loss);
    CHECK(a.history[i].attacker_loss == b.history[i].attacker_loss);
    CHECK(a.history[i].auc == b.history[i].auc);
  }
}

TEST_CASE("attacker learns a separable toy task") {
  const Population pop =
      generate_population(4, 40, AafDistribution::beta_truncated(0.5, 2.0), 101);
  TrainConfig config;
  config.epochs = 80;
  config.batches_per_epoch = 10;
  config.batch_size = 32;
  config.attacker_lr = 0.003;
  config.eval_beacons = 64;
  config.seed = 3;
  const TrainResult result = train_attacker_against(
      ReleaseMechanism::zero_noise(40), pop, MembershipPrior::bernoulli(4, 0.5), config);
  CHECK(result.history.back().auc >= 0.95);
}

TEST_CASE("bne training under a pure privacy objective stays near chance") {
  const Population pop =
      generate_population(40, 60, AafDistribution::beta_truncated(0.5, 2.0), 111);
  TrainConfig config;
  config.epochs = 25;
  config.batches_per_epoch = 10;
  config.batch_size = 32;
  config.eval_beacons = 40;
  config.kappa = Vector::Zero(60);
  config.seed = 11;
  const MembershipPrior q = MembershipPrior::bernoulli(40, 0.5);
  const TrainResult result = train_bne(pop, q, q, config);
  CHECK(result.history.back().auc >= 0.35);
  CHECK(result.history.back().auc <= 0.65);
}

TEST_CASE("a huge utility weight suppresses the noise") {
  const Population pop =
      generate_population(16, 12, AafDistribution::beta_truncated(0.5, 2.0), 121);
  TrainConfig config;
  config.epochs = 40;
  config.batches_per_epoch = 10;
  config.batch_size = 16;
  config.eval_beacons = 4;
  config.kappa = Vector::Constant(12, 200.0);
  config.seed = 13;
  const MembershipPrior q = MembershipPrior::bernoulli(16, 0.5);
  const TrainResult result = train_bne(pop, q, q, config);
  Rng rng(14);
  RunningStat mags;
  const ReleaseMechanism mech = result.generator.as_mechanism();
  for (int i = 0; i < 100; ++i) {
    const Release r = sample_release(mech, pop, q.sample_nonempty(rng), rng);
    mags.add(r.noise.cwiseAbs().mean());
  }
  CHECK(mags.mean() <= 0.05);
}

TEST_CASE("fixed-threshold defense lowers the fixed attacker's AUC") {
  const Population pop =
      generate_population(30, 40, AafDistribution::beta_truncated(0.5, 2.0), 131);
  const MembershipPrior q = MembershipPrior::bernoulli(30, 0.5);
  const CalibrationReport cal = calibrate_threshold(
      pop, ReleaseMechanism::zero_noise(40), q, 0.05, 4000, 1);

  TrainConfig config;
  config.epochs = 30;
  config.batches_per_epoch = 10;
  config.batch_size = 16;
  config.eval_beacons = 64;
  config.kappa = Vector::Constant(40, 0.05);
  config.fixed_tau = cal.tau;
  config.seed = 17;
  const TrainResult result = train_lrt_defense(pop, q, config, LrtDefenseKind::fixed);

  // Baseline: the same attacker's AUC against the undefended release.
  Rng rng(18);
  std::vector<double> conf;
  std::vector<int> labels;
  for (int e = 0; e < 64; ++e) {
    const MembershipVector b = q.sample_nonempty(rng);
    const Vector x = summary_stats(pop, b).values;
    const AttackDecision d =
        fixed_threshold_attack(pop, x, cal.tau, default_clamp_floor(b.count()));
    for (int k = 0; k < 30; ++k) {
      conf.push_back(d.confidences[k]);
      labels.push_back(b.bits[k]);
    }
  }
  Vector cv = Eigen::Map<Vector>(conf.data(), static_cast<long>(conf.size()));
  IntVector lv(static_cast<long>(labels.size()));
  for (size_t i = 0; i < labels.size(); ++i) lv[static_cast<long>(i)] = labels[i];
  const double baseline = roc_auc(cv, lv).auc;
  CHECK(result.history.back().auc < baseline);
}

TEST_SUITE_END();
