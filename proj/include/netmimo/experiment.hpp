#pragma once

#include "netmimo/csit.hpp"
#include "netmimo/geometry.hpp"
#include "netmimo/montecarlo.hpp"
#include "netmimo/scheduler.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace netmimo {

struct LayoutSpec {
  enum class Kind { kBetaSquared, kLinear };
  Kind kind = Kind::kBetaSquared;
  // kBetaSquared: the cluster's squared gains and per-BS powers.
  Matrix beta_squared;
  Vector power;  // linear
  // kLinear: ring of cells with WiMAX-style pathloss.
  int num_cells = 0;
  int groups_per_cell = 0;
  PathlossParams pathloss = wimax_pathloss();
  double cell_power = 0.0;  // linear
};

struct AnalysisSpec {
  bool fixed_mu = false;
  Vector mu;
  std::string optimizer = "greedy";  // greedy | num | pf
  Vector weights;                     // empty: all ones
  GreedyOptions greedy;
  bool use_symmetry = true;
  Fairness fairness = Fairness::kProportionalFair;  // sweeps
  UtilityConfig utility;
  PfOptions pf;
};

struct MonteCarloSpec {
  std::vector<int> n;
  int seeds = 1;
  int slots = 500;
  int burn_in = 100;
  std::string scheduler = "theta";  // theta | greedy | probabilistic
  double v = 100.0;
};

struct SweepSpec {
  std::string parameter;  // mu_total | gamma | cluster_size | tau
  std::vector<double> values;
  std::vector<int> cluster_sizes;
  std::vector<double> gammas;
  std::vector<double> taus;
};

struct ExperimentConfig {
  std::string scenario;
  double gamma = 1.0;
  LayoutSpec layout;
  int cluster_size = 1;
  int cluster_index = 0;
  AnalysisSpec analysis;
  TrainingConfig csit{true, 0.0, 0.0};
  MonteCarloSpec montecarlo;
  SweepSpec sweep;
  std::string output;
  std::uint64_t seed = 1;
  // Normalized JSON of every field that affects results (sorted keys).
  std::string canonical;
};

/// Parses JSON text; errors name the offending field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// The cluster problem described by the layout and cluster fields.
ClusterProblem build_problem(const ExperimentConfig& config, double gamma, int cluster_size);

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// CSV text: header row, 12 significant digits, '.' decimal point, LF endings.
std::string to_csv(const ResultTable& table);

struct RunMetadata {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
};

/// Writes <dir>/<name>.csv and the sibling <dir>/<name>.meta.json.
void emit_csv(const ResultTable& table, const std::string& dir, const RunMetadata& meta);

/// Splits a master seed into independent per-trial seeds.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

std::vector<ResultTable> run_asymptotic(const ExperimentConfig& config);
std::vector<ResultTable> run_optimize(const ExperimentConfig& config);
std::vector<ResultTable> run_montecarlo(const ExperimentConfig& config, int threads = 1);
std::vector<ResultTable> run_sweep(const ExperimentConfig& config, int threads = 1);

std::string library_version();

}  // namespace netmimo
