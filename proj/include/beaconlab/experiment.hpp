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

#ifndef BEACONLAB_EXPERIMENT_HPP_
#define BEACONLAB_EXPERIMENT_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beaconlab/eval.hpp"
#include "beaconlab/learn.hpp"
#include "beaconlab/population.hpp"

namespace beaconlab {

struct PopulationConfig {
  int num_individuals = 200;
  int num_snvs = 500;
  std::uint64_t seed = 1;
  AafDistribution aaf = AafDistribution::beta_truncated(0.5, 2.0);
  std::string load_path;  // when set, overrides generation
};

struct PriorConfig {
  std::string kind = "bernoulli";  // bernoulli | uniform
  double rate = 0.5;

  MembershipPrior build(int num_individuals) const;
};

/// One kappa grid entry: either a flat per-SNV weight or the two-level
/// split where a random fraction of SNVs carries the high weight (redrawn
/// per seed).
struct KappaSpec {
  std::string label;
  bool hetero = false;
  double value = 0.0;
  double fraction_high = 0.1;
  double high = 50.0;

  Vector resolve(int num_snvs, std::uint64_t seed) const;
};

struct DefenseConfig {
  // zero | dp-laplace | dp-matched | gaussian | bayes-nn | fixed-lrt | adaptive-lrt
  std::string kind = "zero";
  double epsilon = 600.0;  // dp-laplace
  double m_hat = 10.0;     // gaussian
  int k_min = 0;           // 0: half the universe
  bool clip = true;        // laplace kinds; density attacks need clip off
};

struct EvalSettings {
  int n_beacons = 50;
  double alpha = 0.05;
  int reference_pool = 200;
  int adaptive_n = 0;  // 0: 5% of the pool
  long utility_samples = 2000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  PopulationConfig population;
  PriorConfig prior;
  std::optional<PriorConfig> sigma;  // defaults to the true prior
  std::vector<DefenseConfig> defenses;
  std::vector<std::string> attackers;  // bayes-nn | fixed-lrt | adaptive-lrt
  TrainConfig training;
  std::vector<KappaSpec> kappa_grid;
  std::vector<std::uint64_t> seeds;
  EvalSettings eval;

  /// Parses and validates the documented JSON schema; errors carry the
  /// offending path.
  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string to_json_text() const;
};

struct AttackerResult {
  std::string attacker;
  double auc = 0.5;
  std::string roc_file;
};

struct CellResult {
  std::string cell_id;
  std::string defense;
  std::string kappa_label;
  std::uint64_t seed = 0;
  double epsilon = 0.0;  // DP cells
  McEstimate utility_loss;
  std::vector<AttackerResult> attackers;
  std::string history_file;  // trained cells
};

struct SummaryRow {
  std::string defense;
  std::string kappa_label;
  std::string attacker;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  int n_seeds = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  std::vector<CellResult> cells;
  std::vector<SummaryRow> summary;

  std::string to_json_text() const;
};

/// Runs the declared grid (defense x kappa x seed x attacker), writing
/// results.json, roc_<cell>.csv, and history_<cell>.csv under output_dir.
/// Deterministic per seed. Pass an empty output_dir to skip file output.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::string& output_dir);

/// Named scenario presets mirroring the experiment grid of the study the
/// defaults come from; unknown names throw.
ExperimentConfig scenario_preset(const std::string& name);

/// Atomic text-file write (temp file then rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace beaconlab

#endif  // BEACONLAB_EXPERIMENT_HPP_
