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

#include "beaconlab/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "beaconlab/bayes.hpp"
#include "beaconlab/lrt.hpp"

namespace beaconlab {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config error at " + path + ": " + what);
}

double require_positive(const json& j, const std::string& path) {
  const double v = j.get<double>();
  if (!(v > 0.0)) config_error(path, "must be positive");
  return v;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')
               ? c
               : '_';
  }
  return out;
}

}  // namespace

MembershipPrior PriorConfig::build(int num_individuals) const {
  if (kind == "uniform") return MembershipPrior::uniform(num_individuals);
  if (kind == "bernoulli") return MembershipPrior::bernoulli(num_individuals, rate);
  throw std::invalid_argument("prior kind must be bernoulli or uniform, got " + kind);
}

Vector KappaSpec::resolve(int num_snvs, std::uint64_t seed) const {
  if (!hetero) return Vector::Constant(num_snvs, value);
  Vector kappa = Vector::Zero(num_snvs);
  const int n_high = std::max(1, static_cast<int>(std::lround(fraction_high * num_snvs)));
  std::vector<int> order(num_snvs);
  for (int j = 0; j < num_snvs; ++j) order[j] = j;
  Rng rng(seed ^ 0xceed5eedULL);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < n_high; ++i) kappa[order[i]] = high;
  return kappa;
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config error: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.name = j.value("name", cfg.name);

  if (j.contains("population")) {
    const json& p = j["population"];
    if (p.contains("load")) {
      cfg.population.load_path = p["load"].get<std::string>();
    } else {
      cfg.population.num_individuals = p.value("num_individuals", 200);
      cfg.population.num_snvs = p.value("num_snvs", 500);
      if (cfg.population.num_individuals < 1) {
        config_error("population.num_individuals", "must be >= 1");
      }
      if (cfg.population.num_snvs < 1) config_error("population.num_snvs", "must be >= 1");
      cfg.population.seed = p.value("seed", 1);
      if (p.contains("aaf")) {
        const json& a = p["aaf"];
        const std::string family = a.value("family", "beta");
        if (family == "beta") {
          cfg.population.aaf = AafDistribution::beta_truncated(
              a.value("a", 0.5), a.value("b", 2.0), a.value("lo", 0.01),
              a.value("hi", 0.99));
        } else if (family == "point") {
          cfg.population.aaf = AafDistribution::point_mass(require_positive(
              a.contains("mass") ? a["mass"] : json(0.5), "population.aaf.mass"));
        } else {
          config_error("population.aaf.family", "must be beta or point");
        }
      }
    }
  }

  const auto parse_prior = [](const json& p, const std::string& path) {
    PriorConfig out;
    out.kind = p.value("kind", "bernoulli");
    out.rate = p.value("rate", 0.5);
    if (out.kind != "bernoulli" && out.kind != "uniform") {
      config_error(path + ".kind", "must be bernoulli or uniform");
    }
    if (!(out.rate >= 0.0 && out.rate <= 1.0)) config_error(path + ".rate", "must be in [0, 1]");
    return out;
  };
  if (j.contains("prior")) cfg.prior = parse_prior(j["prior"], "prior");
  if (j.contains("sigma")) cfg.sigma = parse_prior(j["sigma"], "sigma");

  if (j.contains("defenses")) {
    if (!j["defenses"].is_array() || j["defenses"].empty()) {
      config_error("defenses", "must be a nonempty array");
    }
    for (size_t i = 0; i < j["defenses"].size(); ++i) {
      const json& d = j["defenses"][i];
      DefenseConfig def;
      def.kind = d.value("kind", "zero");
      static const std::set<std::string> kinds = {
          "zero", "dp-laplace", "dp-matched", "gaussian", "bayes-nn",
          "fixed-lrt", "adaptive-lrt"};
      if (!kinds.count(def.kind)) {
        config_error("defenses[" + std::to_string(i) + "].kind",
                     "unknown defense kind " + def.kind);
      }
      def.epsilon = d.value("epsilon", 600.0);
      def.m_hat = d.value("m_hat", 10.0);
      def.k_min = d.value("k_min", 0);
      def.clip = d.value("clip", true);
      cfg.defenses.push_back(def);
    }
  } else {
    cfg.defenses.push_back(DefenseConfig{});
  }

  if (j.contains("attackers")) {
    for (size_t i = 0; i < j["attackers"].size(); ++i) {
      const std::string a = j["attackers"][i].get<std::string>();
      static const std::set<std::string> kinds = {"bayes-nn", "fixed-lrt",
                                                  "adaptive-lrt", "bayes-threshold"};
      if (!kinds.count(a)) {
        config_error("attackers[" + std::to_string(i) + "]", "unknown attacker " + a);
      }
      cfg.attackers.push_back(a);
    }
  }

  if (j.contains("training")) {
    const json& t = j["training"];
    cfg.training.defender_lr = t.value("defender_lr", cfg.training.defender_lr);
    cfg.training.attacker_lr = t.value("attacker_lr", cfg.training.attacker_lr);
    cfg.training.weight_decay = t.value("weight_decay", cfg.training.weight_decay);
    cfg.training.lr_decay = t.value("lr_decay", cfg.training.lr_decay);
    cfg.training.batch_size = t.value("batch_size", cfg.training.batch_size);
    cfg.training.epochs = t.value("epochs", cfg.training.epochs);
    cfg.training.batches_per_epoch =
        t.value("batches_per_epoch", cfg.training.batches_per_epoch);
    cfg.training.gamma = t.value("gamma", cfg.training.gamma);
    cfg.training.aux_dim = t.value("aux_dim", cfg.training.aux_dim);
    cfg.training.eval_beacons = t.value("eval_beacons", cfg.training.eval_beacons);
    cfg.training.kappa_on_privacy =
        t.value("kappa_on_privacy", cfg.training.kappa_on_privacy);
    cfg.training.reference_pool = t.value("reference_pool", cfg.training.reference_pool);
    cfg.training.adaptive_n = t.value("adaptive_n", cfg.training.adaptive_n);
    if (cfg.training.batch_size < 1) config_error("training.batch_size", "must be >= 1");
    if (cfg.training.epochs < 1) config_error("training.epochs", "must be >= 1");
    if (!(cfg.training.gamma > 0.0 && cfg.training.gamma < 1.0)) {
      config_error("training.gamma", "must lie strictly in (0, 1)");
    }
    if (!(cfg.training.lr_decay > 0.0 && cfg.training.lr_decay <= 1.0)) {
      config_error("training.lr_decay", "must lie in (0, 1]");
    }
  }

  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.contains("kappa")) {
      for (size_t i = 0; i < g["kappa"].size(); ++i) {
        const json& k = g["kappa"][i];
        KappaSpec spec;
        if (k.is_number()) {
          spec.value = k.get<double>();
          if (spec.value < 0.0) {
            config_error("grid.kappa[" + std::to_string(i) + "]", "must be >= 0");
          }
          std::ostringstream os;
          os << "kappa" << spec.value;
          spec.label = os.str();
        } else {
          spec.hetero = true;
          spec.fraction_high = k.value("fraction_high", 0.1);
          spec.high = k.value("high", 50.0);
          if (!(spec.fraction_high > 0.0 && spec.fraction_high < 1.0)) {
            config_error("grid.kappa[" + std::to_string(i) + "].fraction_high",
                         "must lie in (0, 1)");
          }
          std::ostringstream os;
          os << "hetero" << spec.fraction_high << "x" << spec.high;
          spec.label = os.str();
        }
        cfg.kappa_grid.push_back(spec);
      }
    }
    if (g.contains("seeds")) {
      for (const json& s : g["seeds"]) cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (cfg.kappa_grid.empty()) {
    KappaSpec zero;
    zero.label = "kappa0";
    cfg.kappa_grid.push_back(zero);
  }
  if (cfg.seeds.empty()) cfg.seeds = {1, 2, 3, 4, 5};

  if (j.contains("eval")) {
    const json& e = j["eval"];
    cfg.eval.n_beacons = e.value("n_beacons", cfg.eval.n_beacons);
    cfg.eval.alpha = e.value("alpha", cfg.eval.alpha);
    cfg.eval.reference_pool = e.value("reference_pool", cfg.eval.reference_pool);
    cfg.eval.adaptive_n = e.value("adaptive_n", cfg.eval.adaptive_n);
    cfg.eval.utility_samples = e.value("utility_samples", cfg.eval.utility_samples);
    if (cfg.eval.n_beacons < 1) config_error("eval.n_beacons", "must be >= 1");
    if (!(cfg.eval.alpha > 0.0 && cfg.eval.alpha < 1.0)) {
      config_error("eval.alpha", "must lie in (0, 1)");
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["name"] = name;
  if (!population.load_path.empty()) {
    j["population"]["load"] = population.load_path;
  } else {
    j["population"]["num_individuals"] = population.num_individuals;
    j["population"]["num_snvs"] = population.num_snvs;
    j["population"]["seed"] = population.seed;
    if (population.aaf.kind == AafDistribution::Kind::beta_truncated) {
      j["population"]["aaf"] = {{"family", "beta"},
                                {"a", population.aaf.a},
                                {"b", population.aaf.b},
                                {"lo", population.aaf.lo},
                                {"hi", population.aaf.hi}};
    } else {
      j["population"]["aaf"] = {{"family", "point"}, {"mass", population.aaf.mass}};
    }
  }
  j["prior"] = {{"kind", prior.kind}, {"rate", prior.rate}};
  if (sigma) j["sigma"] = {{"kind", sigma->kind}, {"rate", sigma->rate}};
  for (const DefenseConfig& d : defenses) {
    j["defenses"].push_back({{"kind", d.kind},
                             {"epsilon", d.epsilon},
                             {"m_hat", d.m_hat},
                             {"k_min", d.k_min},
                             {"clip", d.clip}});
  }
  j["attackers"] = attackers;
  j["training"] = {{"defender_lr", training.defender_lr},
                   {"attacker_lr", training.attacker_lr},
                   {"weight_decay", training.weight_decay},
                   {"lr_decay", training.lr_decay},
                   {"batch_size", training.batch_size},
                   {"epochs", training.epochs},
                   {"batches_per_epoch", training.batches_per_epoch},
                   {"gamma", training.gamma},
                   {"aux_dim", training.aux_dim},
                   {"eval_beacons", training.eval_beacons},
                   {"kappa_on_privacy", training.kappa_on_privacy},
                   {"reference_pool", training.reference_pool},
                   {"adaptive_n", training.adaptive_n}};
  for (const KappaSpec& k : kappa_grid) {
    if (k.hetero) {
      j["grid"]["kappa"].push_back(
          {{"fraction_high", k.fraction_high}, {"high", k.high}});
    } else {
      j["grid"]["kappa"].push_back(k.value);
    }
  }
  j["grid"]["seeds"] = seeds;
  j["eval"] = {{"n_beacons", eval.n_beacons},
               {"alpha", eval.alpha},
               {"reference_pool", eval.reference_pool},
               {"adaptive_n", eval.adaptive_n},
               {"utility_samples", eval.utility_samples}};
  return j.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot open " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

namespace {

struct PooledScores {
  std::vector<double> conf;
  std::vector<int> labels;

  void add(const Vector& scores, const IntVector& bits) {
    for (int k = 0; k < scores.size(); ++k) {
      conf.push_back(scores[k]);
      labels.push_back(bits[k]);
    }
  }

  RocCurve roc() const {
    Vector cv(static_cast<long>(conf.size()));
    IntVector lv(static_cast<long>(labels.size()));
    for (size_t i = 0; i < conf.size(); ++i) {
      cv[static_cast<long>(i)] = conf[i];
      lv[static_cast<long>(i)] = labels[i];
    }
    return roc_auc(cv, lv);
  }
};

std::string roc_csv(const RocCurve& curve) {
  std::ostringstream os;
  os << "fpr,tpr\n";
  os.precision(10);
  for (const auto& [fpr, tpr] : curve.points) os << fpr << ',' << tpr << '\n';
  return os.str();
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::ostringstream os;
  os << "epoch,defender_loss,attacker_loss,auc\n";
  os.precision(10);
  for (const EpochStats& e : history) {
    os << e.epoch << ',' << e.defender_loss << ',' << e.attacker_loss << ','
       << e.auc << '\n';
  }
  return os.str();
}

Matrix draw_reference_pool(const Population& population, int size, Rng& rng) {
  Matrix reference(size, population.num_snvs());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < population.num_snvs(); ++j) {
      reference(i, j) = u(rng) < population.reference_aafs[j] ? 1.0 : 0.0;
    }
  }
  return reference;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::string& output_dir) {
  ExperimentReport report;
  report.config = config;
  {
    std::ostringstream os;
    os << std::hex << std::hash<std::string>{}(config.to_json_text());
    report.config_hash = os.str();
  }
  if (!output_dir.empty()) std::filesystem::create_directories(output_dir);

  const Population population =
      config.population.load_path.empty()
          ? generate_population(config.population.num_individuals,
                                config.population.num_snvs, config.population.aaf,
                                config.population.seed)
          : load_population(config.population.load_path);
  const int kk = population.num_individuals();
  const int m = population.num_snvs();
  const MembershipPrior q = config.prior.build(kk);
  const MembershipPrior sigma =
      config.sigma ? config.sigma->build(kk) : config.prior.build(kk);

  // Fixed-threshold attacker calibration assumes no defense.
  double fixed_tau = 0.0;
  const bool wants_fixed =
      std::count(config.attackers.begin(), config.attackers.end(), "fixed-lrt") > 0;
  if (wants_fixed) {
    fixed_tau = calibrate_threshold(population, ReleaseMechanism::zero_noise(m), q,
                                    config.eval.alpha, 10000, 97)
                    .tau;
  }

  // Order defenses so matched-DP cells can see the trained defense's loss.
  std::vector<DefenseConfig> defenses = config.defenses;
  std::stable_sort(defenses.begin(), defenses.end(),
                   [](const DefenseConfig& a, const DefenseConfig& b) {
                     return (a.kind == "bayes-nn") > (b.kind == "bayes-nn");
                   });
  std::map<std::pair<std::string, std::uint64_t>, double> bayes_utility;

  struct Key {
    std::string defense, kappa, attacker;
    bool operator<(const Key& o) const {
      return std::tie(defense, kappa, attacker) <
             std::tie(o.defense, o.kappa, o.attacker);
    }
  };
  std::map<Key, std::vector<double>> aucs;

  for (const KappaSpec& kspec : config.kappa_grid) {
    for (std::uint64_t seed : config.seeds) {
      const Vector kappa = kspec.resolve(m, seed);
      for (const DefenseConfig& defense : defenses) {
        CellResult cell;
        cell.defense = defense.kind;
        cell.kappa_label = kspec.label;
        cell.seed = seed;
        cell.cell_id =
            sanitize(defense.kind + "_" + kspec.label + "_seed" + std::to_string(seed));

        TrainConfig train = config.training;
        train.kappa = kappa;
        train.seed = seed;

        // Build or train the defense mechanism.
        ReleaseMechanism mechanism = ReleaseMechanism::zero_noise(m);
        std::optional<TrainResult> trained;
        const int k_min = defense.k_min > 0 ? defense.k_min : std::max(1, kk / 2);
        if (defense.kind == "zero") {
          mechanism = ReleaseMechanism::zero_noise(m);
        } else if (defense.kind == "dp-laplace") {
          mechanism = laplace_mechanism(defense.epsilon, sensitivity(m, k_min), m,
                                        defense.clip);
          cell.epsilon = defense.epsilon;
        } else if (defense.kind == "dp-matched") {
          const auto it = bayes_utility.find({kspec.label, seed});
          if (it == bayes_utility.end()) {
            throw std::invalid_argument(
                "config error at defenses: dp-matched requires a bayes-nn defense "
                "in the same grid");
          }
          const double target = it->second;
          if (target <= 1e-12) {
            cell.epsilon = std::numeric_limits<double>::infinity();
            mechanism = ReleaseMechanism::zero_noise(m);
          } else {
            const double sens = sensitivity(m, k_min);
            cell.epsilon = sens * kappa.sum() / target;
            mechanism = laplace_mechanism(cell.epsilon, sens, m, defense.clip);
          }
        } else if (defense.kind == "gaussian") {
          mechanism = gaussian_mechanism_theorem2(Vector::Constant(m, defense.m_hat), m,
                                                  k_min, GaussianMeanMap::zero(m),
                                                  population);
        } else if (defense.kind == "bayes-nn") {
          trained = train_bne(population, q, sigma, train);
          mechanism = trained->generator.as_mechanism();
        } else if (defense.kind == "fixed-lrt") {
          TrainConfig t = train;
          t.fixed_tau = calibrate_threshold(population, ReleaseMechanism::zero_noise(m),
                                            q, config.eval.alpha, 10000, 97)
                            .tau;
          trained = train_lrt_defense(population, q, t, LrtDefenseKind::fixed);
          mechanism = trained->generator.as_mechanism();
        } else if (defense.kind == "adaptive-lrt") {
          trained = train_lrt_defense(population, q, train, LrtDefenseKind::adaptive);
          mechanism = trained->generator.as_mechanism();
        }

        cell.utility_loss = expected_utility_loss(
            mechanism, population, q, kappa, config.eval.utility_samples, seed ^ 0xabcdefULL);
        if (defense.kind == "bayes-nn") {
          bayes_utility[{kspec.label, seed}] = cell.utility_loss.value;
        }

        if (trained && !output_dir.empty()) {
          cell.history_file = "history_" + cell.cell_id + ".csv";
          write_file_atomic(output_dir + "/" + cell.history_file,
                            history_csv(trained->history));
        }

        // Common evaluation draws for every attacker in this cell.
        Rng eval_rng(seed ^ 0x5eedbeefULL);
        std::vector<MembershipVector> eval_b;
        std::vector<Vector> eval_r;
        for (int e = 0; e < config.eval.n_beacons; ++e) {
          const MembershipVector b = q.sample_nonempty(eval_rng);
          eval_b.push_back(b);
          eval_r.push_back(sample_release(mechanism, population, b, eval_rng).values);
        }
        const Matrix reference =
            draw_reference_pool(population, config.eval.reference_pool, eval_rng);
        const int adaptive_n =
            config.eval.adaptive_n > 0
                ? config.eval.adaptive_n
                : std::max(1, static_cast<int>(0.05 * config.eval.reference_pool));

        for (const std::string& attacker : config.attackers) {
          PooledScores pooled;
          if (attacker == "bayes-nn") {
            const Mlp* net = nullptr;
            std::optional<TrainResult> solo;
            if (defense.kind == "bayes-nn") {
              net = &trained->attacker;
            } else {
              TrainConfig t = train;
              t.seed = seed ^ 0xa77ac5ULL;
              solo = train_attacker_against(mechanism, population, sigma, t);
              net = &solo->attacker;
            }
            for (size_t e = 0; e < eval_b.size(); ++e) {
              pooled.add(attack_mechanism(*net, eval_r[e]).confidences,
                         eval_b[e].bits);
            }
          } else if (attacker == "fixed-lrt") {
            for (size_t e = 0; e < eval_b.size(); ++e) {
              const double floor = default_clamp_floor(std::max(1, eval_b[e].count()));
              pooled.add(
                  fixed_threshold_attack(population, eval_r[e], fixed_tau, floor)
                      .confidences,
                  eval_b[e].bits);
            }
          } else if (attacker == "adaptive-lrt") {
            for (size_t e = 0; e < eval_b.size(); ++e) {
              const double floor = default_clamp_floor(std::max(1, eval_b[e].count()));
              pooled.add(
                  adaptive_attack(population, eval_r[e], reference, adaptive_n, floor)
                      .confidences,
                  eval_b[e].bits);
            }
          } else if (attacker == "bayes-threshold") {
            if (!mechanism.has_density() || mechanism.clip) {
              throw std::invalid_argument(
                  "config error at attackers: bayes-threshold needs an unclipped "
                  "density-supported defense (set \"clip\": false on it)");
            }
            for (size_t e = 0; e < eval_b.size(); ++e) {
              pooled.add(
                  threshold_best_response(
                      posterior(mechanism, population, sigma, eval_r[e]),
                      config.training.gamma)
                      .confidences,
                  eval_b[e].bits);
            }
          }
          AttackerResult result;
          result.attacker = attacker;
          const RocCurve curve = pooled.roc();
          result.auc = curve.auc;
          if (!output_dir.empty()) {
            result.roc_file = "roc_" + cell.cell_id + "_" + sanitize(attacker) + ".csv";
            write_file_atomic(output_dir + "/" + result.roc_file, roc_csv(curve));
          }
          aucs[{defense.kind, kspec.label, attacker}].push_back(result.auc);
          cell.attackers.push_back(result);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  for (const auto& [key, values] : aucs) {
    SummaryRow row;
    row.defense = key.defense;
    row.kappa_label = key.kappa;
    row.attacker = key.attacker;
    row.n_seeds = static_cast<int>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    row.auc_mean = mean;
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      row.auc_std = std::sqrt(ss / (values.size() - 1));
    }
    report.summary.push_back(row);
  }

  if (!output_dir.empty()) {
    write_file_atomic(output_dir + "/results.json", report.to_json_text());
  }
  return report;
}

std::string ExperimentReport::to_json_text() const {
  json j;
  j["name"] = config.name;
  j["config"] = json::parse(config.to_json_text());
  j["config_hash"] = config_hash;
  j["cells"] = json::array();
  for (const CellResult& cell : cells) {
    json c;
    c["cell_id"] = cell.cell_id;
    c["defense"] = cell.defense;
    c["kappa"] = cell.kappa_label;
    c["seed"] = cell.seed;
    if (cell.epsilon > 0.0) c["epsilon"] = cell.epsilon;
    c["utility_loss"] = {{"value", cell.utility_loss.value},
                         {"se", cell.utility_loss.se},
                         {"samples", cell.utility_loss.n}};
    if (!cell.history_file.empty()) c["history_file"] = cell.history_file;
    for (const AttackerResult& a : cell.attackers) {
      c["attackers"][a.attacker] = {{"auc", a.auc}, {"roc_file", a.roc_file}};
    }
    j["cells"].push_back(c);
  }
  j["summary"] = json::array();
  for (const SummaryRow& row : summary) {
    j["summary"].push_back({{"defense", row.defense},
                            {"kappa", row.kappa_label},
                            {"attacker", row.attacker},
                            {"auc_mean", row.auc_mean},
                            {"auc_std", row.auc_std},
                            {"n_seeds", row.n_seeds}});
  }
  return j.dump(2);
}

ExperimentConfig scenario_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.population.num_individuals = 200;
  cfg.population.num_snvs = 500;
  cfg.training.epochs = 120;
  cfg.training.batches_per_epoch = 10;
  cfg.attackers = {"bayes-nn", "fixed-lrt", "adaptive-lrt"};
  cfg.seeds = {1, 2, 3, 4, 5};

  // The reference grid used kappa in {0, 1.5, 50} at 800 individuals and
  // 5000 SNVs; the desk-scale analogue preserves kappa * m / K.
  const auto kappa_analogue = [](double reference) {
    const double paper_ratio = 5000.0 / 800.0;
    const double desk_ratio = 500.0 / 200.0;
    return reference * paper_ratio / desk_ratio;
  };

  const auto flat = [](double v) {
    KappaSpec k;
    k.value = v;
    std::ostringstream os;
    os << "kappa" << v;
    k.label = os.str();
    return k;
  };

  DefenseConfig bayes;
  bayes.kind = "bayes-nn";
  if (name == "fig1a") {
    cfg.defenses = {bayes};
    cfg.kappa_grid = {flat(0.0)};
  } else if (name == "fig1b") {
    cfg.defenses = {bayes};
    cfg.kappa_grid = {flat(kappa_analogue(1.5))};
  } else if (name == "fig1c") {
    cfg.defenses = {bayes};
    cfg.kappa_grid = {flat(kappa_analogue(50.0))};
  } else if (name == "fig1d") {
    DefenseConfig fixed;
    fixed.kind = "fixed-lrt";
    DefenseConfig adaptive;
    adaptive.kind = "adaptive-lrt";
    cfg.defenses = {bayes, fixed, adaptive};
    cfg.kappa_grid = {flat(kappa_analogue(1.5))};
    cfg.attackers = {"bayes-nn"};
  } else if (name == "fig1e") {
    DefenseConfig dp;
    dp.kind = "dp-laplace";
    dp.epsilon = 600.0;
    cfg.defenses = {dp};
    cfg.kappa_grid = {flat(0.0)};
  } else if (name == "fig1f") {
    DefenseConfig matched;
    matched.kind = "dp-matched";
    cfg.defenses = {bayes, matched};
    KappaSpec hetero;
    hetero.hetero = true;
    hetero.fraction_high = 0.1;
    hetero.high = kappa_analogue(50.0);
    hetero.label = "hetero";
    cfg.kappa_grid = {hetero};
    cfg.attackers = {"bayes-nn"};
  } else {
    throw std::invalid_argument("unknown scenario " + name +
                                " (expected fig1a..fig1f)");
  }
  return cfg;
}

}  // namespace beaconlab
