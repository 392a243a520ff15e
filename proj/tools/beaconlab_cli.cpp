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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "beaconlab/analysis.hpp"
#include "beaconlab/bayes.hpp"
#include "beaconlab/experiment.hpp"
#include "beaconlab/learn.hpp"

namespace {

using namespace beaconlab;

ExperimentConfig resolve_config(const std::string& config_path,
                                const std::string& scenario,
                                const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig cfg;
  if (!scenario.empty()) {
    cfg = scenario_preset(scenario);
  } else if (!config_path.empty()) {
    cfg = ExperimentConfig::load(config_path);
  } else {
    throw std::invalid_argument("provide --config or --scenario");
  }
  if (!seeds.empty()) cfg.seeds = seeds;
  return cfg;
}

int cmd_generate(const std::string& out, int k, int m, std::uint64_t seed, double a,
                 double b, double lo, double hi, double point) {
  const AafDistribution aaf = point > 0.0 ? AafDistribution::point_mass(point)
                                          : AafDistribution::beta_truncated(a, b, lo, hi);
  const Population pop = generate_population(k, m, aaf, seed);
  save_population(pop, out);
  std::printf("wrote %s (%d individuals, %d SNVs)\n", out.c_str(), k, m);
  return 0;
}

Population build_population(const ExperimentConfig& cfg) {
  return cfg.population.load_path.empty()
             ? generate_population(cfg.population.num_individuals,
                                   cfg.population.num_snvs, cfg.population.aaf,
                                   cfg.population.seed)
             : load_population(cfg.population.load_path);
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const Population pop = build_population(cfg);
  const MembershipPrior q = cfg.prior.build(pop.num_individuals());
  const MembershipPrior sigma = cfg.sigma ? cfg.sigma->build(pop.num_individuals())
                                          : cfg.prior.build(pop.num_individuals());
  const DefenseConfig defense = cfg.defenses.front();
  if (defense.kind != "bayes-nn" && defense.kind != "fixed-lrt" &&
      defense.kind != "adaptive-lrt") {
    throw std::invalid_argument("train: first defense must be a learned kind, got " +
                                defense.kind);
  }
  for (const KappaSpec& kspec : cfg.kappa_grid) {
    for (std::uint64_t seed : cfg.seeds) {
      TrainConfig train = cfg.training;
      train.kappa = kspec.resolve(pop.num_snvs(), seed);
      train.seed = seed;
      TrainResult result;
      if (defense.kind == "bayes-nn") {
        result = train_bne(pop, q, sigma, train);
      } else if (defense.kind == "fixed-lrt") {
        train.fixed_tau =
            calibrate_threshold(pop, ReleaseMechanism::zero_noise(pop.num_snvs()), q,
                                cfg.eval.alpha, 10000, 97)
                .tau;
        result = train_lrt_defense(pop, q, train, LrtDefenseKind::fixed);
      } else {
        result = train_lrt_defense(pop, q, train, LrtDefenseKind::adaptive);
      }
      const std::string cell =
          defense.kind + "_" + kspec.label + "_seed" + std::to_string(seed);
      result.generator.model.save(out_dir + "/generator_" + cell + ".txt");
      if (defense.kind == "bayes-nn") {
        result.attacker.save(out_dir + "/attacker_" + cell + ".txt");
      }
      std::ostringstream history;
      history << "epoch,defender_loss,attacker_loss,auc\n";
      history.precision(10);
      for (const EpochStats& e : result.history) {
        history << e.epoch << ',' << e.defender_loss << ',' << e.attacker_loss << ','
                << e.auc << '\n';
      }
      write_file_atomic(out_dir + "/history_" + cell + ".csv", history.str());
      std::printf("trained %s: final auc %.4f\n", cell.c_str(),
                  result.history.empty() ? 0.5 : result.history.back().auc);
    }
  }
  return 0;
}

int cmd_attack(const ExperimentConfig& base, const std::string& out_dir) {
  // Attack-only view of the grid: keep the declared defenses but no training
  // epochs beyond what the config asked for.
  const ExperimentReport report = run_experiment(base, out_dir);
  for (const SummaryRow& row : report.summary) {
    std::printf("%s | %s | %s: AUC %.4f +- %.4f (%d seeds)\n", row.defense.c_str(),
                row.kappa_label.c_str(), row.attacker.c_str(), row.auc_mean,
                row.auc_std, row.n_seeds);
  }
  return 0;
}

int cmd_analyze(const ExperimentConfig& cfg, const std::string& out_dir,
                std::vector<double> mus, bool ordering) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json out;
  if (mus.empty()) mus = {0.5, 1.0, 2.0};
  for (double mu : mus) {
    std::ostringstream csv;
    csv << "alpha,beta\n";
    csv.precision(10);
    for (const TradeoffPoint& p : gaussian_tradeoff_curve(mu, 199)) {
      csv << p.alpha << ',' << p.beta << '\n';
    }
    std::ostringstream name;
    name << "tradeoff_mu" << mu << ".csv";
    write_file_atomic(out_dir + "/" + name.str(), csv.str());
    nlohmann::json row;
    row["mu"] = mu;
    row["curve_file"] = name.str();
    for (double eps : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      row["gdp_to_dp"][std::to_string(eps)] = gdp_to_dp(mu, eps);
    }
    out["tradeoff"].push_back(row);
  }

  // Diagnostic tabulation: the verbatim F at the composed operating points,
  // next to the composition-route constant.
  for (int m : {1, 2, 4, 8, 16}) {
    const Vector m_hat = Vector::Constant(m, 1.0);
    const double beta = gaussian_tradeoff(composed_gdp_mu(m_hat), 0.05);
    nlohmann::json row;
    row["m"] = m;
    row["beta"] = beta;
    row["f_verbatim"] = lemma1_f(0.05, beta, m_hat);
    row["f_composition_variant"] = lemma1_f_composition_variant(m_hat);
    out["lemma1_table"].push_back(row);
  }

  if (ordering) {
    const Population pop = build_population(cfg);
    if (pop.num_individuals() > 16) {
      throw std::invalid_argument(
          "analyze --ordering: population must have at most 16 individuals");
    }
    const MembershipPrior q = cfg.prior.build(pop.num_individuals());
    const MembershipPrior sigma = cfg.sigma
                                      ? cfg.sigma->build(pop.num_individuals())
                                      : cfg.prior.build(pop.num_individuals());
    const DefenseConfig defense = cfg.defenses.front();
    const int k_min =
        defense.k_min > 0 ? defense.k_min : std::max(1, pop.num_individuals() / 2);
    const ReleaseMechanism mech = gaussian_mechanism_theorem2(
        Vector::Constant(pop.num_snvs(), defense.m_hat), pop.num_snvs(), k_min,
        GaussianMeanMap::zero(pop.num_snvs()), pop);
    OrderingParams params;
    params.alpha = cfg.eval.alpha;
    params.seed = cfg.seeds.empty() ? 1 : cfg.seeds.front();
    const OrderingReport report = verify_theorem1_ordering(mech, pop, q, sigma, params);
    out["ordering"] = nlohmann::json::parse(report.to_json());
  }
  write_file_atomic(out_dir + "/analysis.json", out.dump(2));
  std::printf("wrote %s/analysis.json\n", out_dir.c_str());
  return 0;
}

int cmd_report(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ExperimentReport report = run_experiment(cfg, out_dir);
  std::printf("results in %s/results.json (config hash %s)\n", out_dir.c_str(),
              report.config_hash.c_str());
  for (const SummaryRow& row : report.summary) {
    std::printf("%s | %s | %s: AUC %.4f +- %.4f (%d seeds)\n", row.defense.c_str(),
                row.kappa_label.c_str(), row.attacker.c_str(), row.auc_mean,
                row.auc_std, row.n_seeds);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"beaconlab: privacy games on genomic summary statistics"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "write a synthetic population file");
  std::string gen_out = "population.txt";
  int gen_k = 800, gen_m = 5000;
  std::uint64_t gen_seed = 1;
  double gen_a = 0.5, gen_b = 2.0, gen_lo = 0.01, gen_hi = 0.99, gen_point = 0.0;
  generate->add_option("--out", gen_out, "output path");
  generate->add_option("--num-individuals", gen_k, "universe size K");
  generate->add_option("--num-snvs", gen_m, "SNV count m");
  generate->add_option("--seed", gen_seed, "generation seed");
  generate->add_option("--aaf-a", gen_a, "beta shape a");
  generate->add_option("--aaf-b", gen_b, "beta shape b");
  generate->add_option("--aaf-lo", gen_lo, "AAF truncation floor");
  generate->add_option("--aaf-hi", gen_hi, "AAF truncation ceiling");
  generate->add_option("--aaf-point", gen_point, "degenerate AAF value (overrides beta)");

  std::string config_path, scenario, out_dir = "out";
  std::vector<std::uint64_t> seeds;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--scenario", scenario, "preset name (fig1a..fig1f)");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seeds", seeds, "override the config seed list");
  };

  auto* train = app.add_subcommand("train", "train the first configured defense");
  add_common(train);
  auto* attack = app.add_subcommand("attack", "evaluate attackers over the grid");
  add_common(attack);
  auto* analyze = app.add_subcommand("analyze", "trade-off curves and DP conversions");
  add_common(analyze);
  std::vector<double> mus;
  bool with_ordering = false;
  analyze->add_option("--mu", mus, "GDP parameters to tabulate");
  analyze->add_flag("--ordering", with_ordering,
                    "verify the attack ordering on the configured instance");
  auto* report = app.add_subcommand("report", "run the full experiment grid");
  add_common(report);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return cmd_generate(gen_out, gen_k, gen_m, gen_seed, gen_a, gen_b, gen_lo, gen_hi,
                          gen_point);
    }
    const ExperimentConfig cfg = resolve_config(config_path, scenario, seeds);
    if (train->parsed()) return cmd_train(cfg, out_dir);
    if (attack->parsed()) return cmd_attack(cfg, out_dir);
    if (analyze->parsed()) return cmd_analyze(cfg, out_dir, mus, with_ordering);
    if (report->parsed()) return cmd_report(cfg, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
