#include "netmimo/experiment.hpp"

#include "json.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#ifndef NETMIMO_VERSION
#define NETMIMO_VERSION "0.0.0"
#endif

namespace netmimo {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& j, const std::string& path, std::set<std::string> allowed) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) fail(join(path, item.key()), "unknown field");
  }
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Vector get_vector(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(i) = get_number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

std::vector<double> get_list(const json& j, const std::string& path) {
  const Vector v = get_vector(j, path);
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<int> get_int_list(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_int(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void parse_layout(const json& j, ExperimentConfig& c) {
  const std::string path = "layout";
  LayoutSpec& l = c.layout;
  if (j.contains("beta_squared")) {
    check_keys(j, path, {"beta_squared", "power_db"});
    const json& rows = j["beta_squared"];
    if (!rows.is_array() || rows.empty()) fail(path + ".beta_squared", "expected a non-empty matrix");
    l.kind = LayoutSpec::Kind::kBetaSquared;
    const Vector first = get_vector(rows[0], path + ".beta_squared[0]");
    l.beta_squared.resize(rows.size(), first.size());
    for (std::size_t m = 0; m < rows.size(); ++m) {
      const Vector r = get_vector(rows[m], path + ".beta_squared[" + std::to_string(m) + "]");
      if (r.size() != first.size()) fail(path + ".beta_squared", "rows differ in length");
      l.beta_squared.row(m) = r.transpose();
    }
    if (!j.contains("power_db")) fail(path + ".power_db", "missing");
    const json& p = j["power_db"];
    if (p.is_array()) {
      l.power = get_vector(p, path + ".power_db");
      if (l.power.size() != l.beta_squared.rows()) fail(path + ".power_db", "one entry per BS expected");
    } else {
      l.power = Vector::Constant(l.beta_squared.rows(), get_number(p, path + ".power_db"));
    }
    l.power = l.power.unaryExpr([](double db) { return db_to_linear(db); });
    return;
  }
  check_keys(j, path, {"num_cells", "groups_per_cell", "power_db", "pathloss"});
  l.kind = LayoutSpec::Kind::kLinear;
  for (const char* key : {"num_cells", "groups_per_cell", "power_db"}) {
    if (!j.contains(key)) fail(join(path, key), "missing");
  }
  l.num_cells = get_int(j["num_cells"], path + ".num_cells");
  l.groups_per_cell = get_int(j["groups_per_cell"], path + ".groups_per_cell");
  l.cell_power = db_to_linear(get_number(j["power_db"], path + ".power_db"));
  if (j.contains("pathloss")) {
    const json& pl = j["pathloss"];
    const std::string pp = path + ".pathloss";
    check_keys(pl, pp, {"g0_db", "delta_m", "exponent"});
    if (pl.contains("g0_db")) l.pathloss.g0 = db_to_linear(get_number(pl["g0_db"], pp + ".g0_db"));
    if (pl.contains("delta_m")) l.pathloss.delta_m = get_number(pl["delta_m"], pp + ".delta_m");
    if (pl.contains("exponent")) l.pathloss.exponent = get_number(pl["exponent"], pp + ".exponent");
  }
  if (l.num_cells < 1 || l.groups_per_cell < 1) fail(path, "cell and group counts must be >= 1");
  try {
    l.pathloss.validate();
  } catch (const ConfigError& e) {
    fail(path + ".pathloss", e.what());
  }
}

ConstraintMode parse_mode(const json& j, const std::string& path) {
  const std::string s = get_string(j, path);
  if (s == "sum") return ConstraintMode::kSum;
  if (s == "per_bs") return ConstraintMode::kPerBs;
  fail(path, "expected \"sum\" or \"per_bs\"");
}

void parse_analysis(const json& j, ExperimentConfig& c) {
  const std::string path = "analysis";
  check_keys(j, path, {"mu", "optimizer", "weights", "delta_mu", "mode", "full_sweep",
                       "use_symmetry", "fairness", "utility", "pf"});
  AnalysisSpec& a = c.analysis;
  if (j.contains("mu") && j.contains("optimizer")) {
    fail(path, "give either a fixed mu or an optimizer, not both");
  }
  if (j.contains("mu")) {
    a.fixed_mu = true;
    a.mu = get_vector(j["mu"], path + ".mu");
  }
  if (j.contains("optimizer")) {
    a.optimizer = get_string(j["optimizer"], path + ".optimizer");
    if (a.optimizer != "greedy" && a.optimizer != "num" && a.optimizer != "pf") {
      fail(path + ".optimizer", "expected greedy, num or pf");
    }
  }
  if (j.contains("weights")) a.weights = get_vector(j["weights"], path + ".weights");
  if (j.contains("delta_mu")) {
    a.greedy.delta_mu = get_number(j["delta_mu"], path + ".delta_mu");
    if (!(a.greedy.delta_mu > 0.0 && a.greedy.delta_mu <= 1.0)) {
      fail(path + ".delta_mu", "must lie in (0, 1]");
    }
  }
  if (j.contains("mode")) a.greedy.mode = parse_mode(j["mode"], path + ".mode");
  if (j.contains("full_sweep")) a.greedy.full_sweep = get_bool(j["full_sweep"], path + ".full_sweep");
  if (j.contains("use_symmetry")) {
    a.use_symmetry = get_bool(j["use_symmetry"], path + ".use_symmetry");
  }
  if (j.contains("fairness")) {
    const std::string f = get_string(j["fairness"], path + ".fairness");
    if (f == "pf") {
      a.fairness = Fairness::kProportionalFair;
    } else if (f == "sum") {
      a.fairness = Fairness::kWeightedSum;
    } else {
      fail(path + ".fairness", "expected \"pf\" or \"sum\"");
    }
  }
  if (j.contains("utility")) {
    const json& u = j["utility"];
    const std::string up = path + ".utility";
    check_keys(u, up, {"kind", "alpha", "v", "a_max", "horizon", "warm_start"});
    if (u.contains("kind")) {
      const std::string k = get_string(u["kind"], up + ".kind");
      if (k == "pf") {
        a.utility.kind = UtilityKind::kProportionalFair;
      } else if (k == "alpha") {
        a.utility.kind = UtilityKind::kAlphaFair;
      } else if (k == "sum") {
        a.utility.kind = UtilityKind::kWeightedSum;
      } else {
        fail(up + ".kind", "expected pf, alpha or sum");
      }
    }
    if (u.contains("alpha")) a.utility.alpha = get_number(u["alpha"], up + ".alpha");
    if (u.contains("v")) a.utility.v = get_number(u["v"], up + ".v");
    if (u.contains("a_max")) a.utility.a_max = get_number(u["a_max"], up + ".a_max");
    if (u.contains("horizon")) a.utility.horizon = get_int(u["horizon"], up + ".horizon");
    if (u.contains("warm_start")) a.utility.warm_start = get_int(u["warm_start"], up + ".warm_start");
  }
  if (j.contains("pf")) {
    const json& p = j["pf"];
    check_keys(p, path + ".pf", {"iterations", "tol"});
    if (p.contains("iterations")) a.pf.iterations = get_int(p["iterations"], path + ".pf.iterations");
    if (p.contains("tol")) a.pf.tol = get_number(p["tol"], path + ".pf.tol");
  }
  a.utility.weights = a.weights;
}

void parse_csit(const json& j, ExperimentConfig& c) {
  if (j.is_string()) {
    if (j.get<std::string>() != "perfect") fail("csit", "expected \"perfect\" or an object");
    c.csit = TrainingConfig{true, 0.0, 0.0};
    return;
  }
  check_keys(j, "csit", {"gamma_p", "tau"});
  c.csit.perfect = false;
  if (j.contains("gamma_p")) c.csit.gamma_p = get_number(j["gamma_p"], "csit.gamma_p");
  if (j.contains("tau")) c.csit.tau = get_number(j["tau"], "csit.tau");
  if (c.csit.tau < 0.0) fail("csit.tau", "must be non-negative");
}

void parse_montecarlo(const json& j, ExperimentConfig& c) {
  const std::string path = "montecarlo";
  check_keys(j, path, {"n", "seeds", "slots", "burn_in", "scheduler", "v"});
  MonteCarloSpec& m = c.montecarlo;
  if (j.contains("n")) m.n = get_int_list(j["n"], path + ".n");
  if (j.contains("seeds")) m.seeds = get_int(j["seeds"], path + ".seeds");
  if (j.contains("slots")) m.slots = get_int(j["slots"], path + ".slots");
  if (j.contains("burn_in")) m.burn_in = get_int(j["burn_in"], path + ".burn_in");
  if (j.contains("scheduler")) m.scheduler = get_string(j["scheduler"], path + ".scheduler");
  if (j.contains("v")) m.v = get_number(j["v"], path + ".v");
  if (m.scheduler != "theta" && m.scheduler != "greedy" && m.scheduler != "probabilistic") {
    fail(path + ".scheduler", "expected theta, greedy or probabilistic");
  }
  for (int n : m.n) {
    if (n < 1) fail(path + ".n", "entries must be >= 1");
  }
  if (m.seeds < 1) fail(path + ".seeds", "must be >= 1");
  if (m.slots < 1 || m.burn_in < 0 || m.burn_in >= m.slots) {
    fail(path, "need slots >= 1 and 0 <= burn_in < slots");
  }
}

void parse_sweep(const json& j, ExperimentConfig& c) {
  const std::string path = "sweep";
  check_keys(j, path, {"parameter", "values", "cluster_sizes", "gammas", "taus"});
  SweepSpec& s = c.sweep;
  if (!j.contains("parameter")) fail(path + ".parameter", "missing");
  s.parameter = get_string(j["parameter"], path + ".parameter");
  if (s.parameter != "mu_total" && s.parameter != "gamma" && s.parameter != "cluster_size" &&
      s.parameter != "tau") {
    fail(path + ".parameter", "expected mu_total, gamma, cluster_size or tau");
  }
  if (j.contains("values")) s.values = get_list(j["values"], path + ".values");
  if (j.contains("cluster_sizes")) s.cluster_sizes = get_int_list(j["cluster_sizes"], path + ".cluster_sizes");
  if (j.contains("gammas")) s.gammas = get_list(j["gammas"], path + ".gammas");
  if (j.contains("taus")) s.taus = get_list(j["taus"], path + ".taus");
}

json canonical_json(const ExperimentConfig& c) {
  json j;
  j["gamma"] = c.gamma;
  const LayoutSpec& l = c.layout;
  if (l.kind == LayoutSpec::Kind::kBetaSquared) {
    json rows = json::array();
    for (Eigen::Index m = 0; m < l.beta_squared.rows(); ++m) {
      rows.push_back(to_json(l.beta_squared.row(m).transpose()));
    }
    j["layout"] = {{"beta_squared", rows}, {"power", to_json(l.power)}};
  } else {
    j["layout"] = {{"num_cells", l.num_cells},
                   {"groups_per_cell", l.groups_per_cell},
                   {"power", l.cell_power},
                   {"g0", l.pathloss.g0},
                   {"delta_m", l.pathloss.delta_m},
                   {"exponent", l.pathloss.exponent}};
    j["cluster"] = {{"size", c.cluster_size}, {"index", c.cluster_index}};
  }
  const AnalysisSpec& a = c.analysis;
  json an;
  if (a.fixed_mu) {
    an["mu"] = to_json(a.mu);
  } else {
    an["optimizer"] = a.optimizer;
  }
  an["weights"] = to_json(a.weights);
  an["delta_mu"] = a.greedy.delta_mu;
  an["mode"] = a.greedy.mode == ConstraintMode::kSum ? "sum" : "per_bs";
  an["full_sweep"] = a.greedy.full_sweep;
  an["use_symmetry"] = a.use_symmetry;
  an["fairness"] = a.fairness == Fairness::kProportionalFair ? "pf" : "sum";
  an["utility"] = {{"kind", static_cast<int>(a.utility.kind)}, {"alpha", a.utility.alpha},
                   {"v", a.utility.v},        {"a_max", a.utility.a_max},
                   {"horizon", a.utility.horizon}, {"warm_start", a.utility.warm_start}};
  an["pf"] = {{"iterations", a.pf.iterations}, {"tol", a.pf.tol}};
  j["analysis"] = an;
  if (c.csit.perfect) {
    j["csit"] = "perfect";
  } else {
    j["csit"] = {{"gamma_p", c.csit.gamma_p}, {"tau", c.csit.tau}};
  }
  const MonteCarloSpec& m = c.montecarlo;
  j["montecarlo"] = {{"n", m.n},         {"seeds", m.seeds},         {"slots", m.slots},
                     {"burn_in", m.burn_in}, {"scheduler", m.scheduler}, {"v", m.v}};
  const SweepSpec& s = c.sweep;
  j["sweep"] = {{"parameter", s.parameter}, {"values", s.values},
                {"cluster_sizes", s.cluster_sizes}, {"gammas", s.gammas}, {"taus", s.taus}};
  return j;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < count; i = next++) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double bits(double nats) { return nats_to(LogBase::kBits, nats); }

Vector weights_for(const ExperimentConfig& c, int groups) {
  if (c.analysis.weights.size() == 0) return Vector::Ones(groups);
  if (c.analysis.weights.size() != groups) fail("analysis.weights", "one weight per group expected");
  return c.analysis.weights;
}

// Group positions (km) for linear layouts, NaN otherwise.
Vector group_locations(const ExperimentConfig& c, const ClusterProblem& p) {
  Vector loc = Vector::Constant(p.num_groups(), std::numeric_limits<double>::quiet_NaN());
  if (c.layout.kind != LayoutSpec::Kind::kLinear) return loc;
  const NetworkLayout lay = build_linear_layout(c.layout.num_cells, c.layout.groups_per_cell,
                                                c.layout.pathloss, c.layout.cell_power);
  for (int a = 0; a < p.num_groups(); ++a) loc(a) = lay.group_positions_km[p.group_ids[a]];
  return loc;
}

void require_fixed_mu(const ExperimentConfig& c, const ClusterProblem& p) {
  if (!c.analysis.fixed_mu) fail("analysis.mu", "this subcommand needs a fixed mu");
  if (c.analysis.mu.size() != p.num_groups()) fail("analysis.mu", "one fraction per group expected");
  try {
    validate_fractions(p, c.analysis.mu);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("infeasible mu: ") + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"scenario", "gamma", "layout", "cluster", "analysis", "csit", "montecarlo",
                     "sweep", "output", "seed"});
  ExperimentConfig c;
  if (j.contains("scenario")) c.scenario = get_string(j["scenario"], "scenario");
  if (!j.contains("gamma")) fail("gamma", "missing");
  c.gamma = get_number(j["gamma"], "gamma");
  if (!(c.gamma > 0.0)) fail("gamma", "must be positive");
  if (!j.contains("layout")) fail("layout", "missing");
  parse_layout(j["layout"], c);
  if (j.contains("cluster")) {
    check_keys(j["cluster"], "cluster", {"size", "index"});
    if (j["cluster"].contains("size")) c.cluster_size = get_int(j["cluster"]["size"], "cluster.size");
    if (j["cluster"].contains("index")) {
      c.cluster_index = get_int(j["cluster"]["index"], "cluster.index");
    }
  }
  if (j.contains("analysis")) parse_analysis(j["analysis"], c);
  if (j.contains("csit")) parse_csit(j["csit"], c);
  if (j.contains("montecarlo")) parse_montecarlo(j["montecarlo"], c);
  if (j.contains("sweep")) parse_sweep(j["sweep"], c);
  if (j.contains("output")) c.output = get_string(j["output"], "output");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  c.canonical = canonical_json(c).dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config.canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ClusterProblem build_problem(const ExperimentConfig& config, double gamma, int cluster_size) {
  const LayoutSpec& l = config.layout;
  if (l.kind == LayoutSpec::Kind::kBetaSquared) {
    return problem_from_beta_squared(l.beta_squared, gamma, l.power);
  }
  const NetworkLayout lay =
      build_linear_layout(l.num_cells, l.groups_per_cell, l.pathloss, l.cell_power);
  return cluster_reduce(partition_consecutive(lay, cluster_size), config.cluster_index, gamma);
}

std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::snprintf(buf, sizeof buf, "%.12g", row[i]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void emit_csv(const ResultTable& table, const std::string& dir, const RunMetadata& meta) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path csv = fs::path(dir) / (table.name + ".csv");
  const fs::path side = fs::path(dir) / (table.name + ".meta.json");
  {
    std::ofstream out(csv, std::ios::binary);
    out << to_csv(table);
    if (!out) throw std::runtime_error("cannot write " + csv.string());
  }
  const json m = {{"table", table.name},
                  {"subcommand", meta.subcommand},
                  {"config_hash", meta.config_hash},
                  {"seed", meta.seed},
                  {"version", meta.version},
                  {"columns", table.columns},
                  {"rows", table.rows.size()}};
  std::ofstream out(side, std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + side.string());
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = master + 0x9e3779b97f4a7c15ull * (trial + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::string library_version() { return NETMIMO_VERSION; }

std::vector<ResultTable> run_asymptotic(const ExperimentConfig& config) {
  const ClusterProblem p = build_problem(config, config.gamma, config.cluster_size);
  require_fixed_mu(config, p);
  const Vector& mu = config.analysis.mu;
  const int B = p.num_bs();
  const int A = p.num_groups();
  const EtaSolution eta = solve_eta(p, mu);
  const Vector lam = lambda_gains(p, mu, eta.eta);
  const Matrix theta = solve_theta(p, mu, eta.eta, lam).theta;
  const Vector w = weights_for(config, A);
  const PowerAllocation q = config.analysis.greedy.mode == ConstraintMode::kSum
                                ? waterfill_sum(w, lam, mu, p.total_power())
                                : waterfill_perbs(w, lam, mu, theta, p.power);
  const RatePoint r = group_rates(lam, q.q, mu);
  const Vector loc = group_locations(config, p);

  ResultTable groups{"asymptotic_groups", {"group", "location_km", "mu", "lambda", "q", "rate_bits",
                                           "throughput_bits"}, {}};
  for (int m = 0; m < B; ++m) groups.columns.push_back("theta_bs" + std::to_string(m + 1));
  for (int k = 0; k < A; ++k) {
    std::vector<double> row{double(k + 1), loc(k), mu(k), lam(k), q.q(k), bits(r.rate(k)),
                            bits(r.throughput(k))};
    for (int m = 0; m < B; ++m) row.push_back(theta(m, k));
    groups.rows.push_back(std::move(row));
  }
  ResultTable bs{"asymptotic_bs", {"bs", "eta", "power_used", "power_budget"}, {}};
  const Vector used = theta * q.q;
  for (int m = 0; m < B; ++m) {
    bs.rows.push_back({double(m + 1), eta.eta(m), used(m), p.power(m)});
  }
  return {groups, bs};
}

std::vector<ResultTable> run_optimize(const ExperimentConfig& config) {
  const AnalysisSpec& a = config.analysis;
  if (a.fixed_mu) fail("analysis.mu", "optimize needs an optimizer, not a fixed mu");
  const ClusterProblem full = build_problem(config, config.gamma, config.cluster_size);
  ClusterProblem p = full;
  Vector w = weights_for(config, full.num_groups());
  double scale = 1.0;
  bool reduced = false;
  if (a.use_symmetry && a.greedy.mode == ConstraintMode::kSum) {
    const EquivalenceClasses cls = detect_symmetry(full);
    bool uniform = cls.is_symmetric;
    for (int k = 0; uniform && k < full.num_groups(); ++k) {
      uniform = w(k) == w(cls.member[0][cls.class_of[k]]);
    }
    if (uniform) {
      Vector wr(cls.a_prime);
      for (int i = 0; i < cls.a_prime; ++i) wr(i) = w(cls.member[0][i]);
      w = wr;
      p = reduce_symmetric(full, cls);
      scale = full.num_bs();
      reduced = true;
    }
  }
  const int A = p.num_groups();
  const Vector loc = reduced ? Vector::Constant(A, std::numeric_limits<double>::quiet_NaN())
                             : group_locations(config, p);
  std::vector<ResultTable> out;
  ResultTable summary{"optimize_summary", {"reduced", "mu_total", "objective_bits",
                                           "cluster_objective_bits", "utility", "iterations"}, {}};
  if (a.optimizer == "greedy") {
    const GreedyResult g = greedy_fractions(p, w, a.greedy);
    ResultTable t{"optimize_groups", {"index", "location_km", "mu", "lambda", "q", "rate_bits",
                                      "throughput_bits"}, {}};
    for (int k = 0; k < A; ++k) {
      t.rows.push_back({double(k + 1), loc(k), g.mu(k), g.lambda(k), g.allocation.q(k),
                        bits(g.rates.rate(k)), bits(g.rates.throughput(k))});
    }
    summary.rows.push_back({double(reduced), g.mu.sum(), bits(g.objective),
                            bits(scale * g.objective), std::numeric_limits<double>::quiet_NaN(),
                            double(g.trace_objective.size() - 1)});
    out.push_back(t);
    out.push_back(summary);
    if (a.greedy.full_sweep) {
      ResultTable trace{"optimize_trace", {"step", "mu_total", "objective_bits"}, {}};
      for (std::size_t s = 0; s < g.trace_objective.size(); ++s) {
        trace.rows.push_back({double(s), g.trace_mu_total[s], bits(g.trace_objective[s])});
      }
      out.push_back(trace);
    }
  } else if (a.optimizer == "num") {
    UtilityConfig u = a.utility;
    u.weights = a.utility.kind == UtilityKind::kWeightedSum ? w : Vector();
    const NumResult r = num_iterate(p, u, a.greedy);
    ResultTable t{"optimize_groups", {"index", "location_km", "throughput_bits", "arrival_bits",
                                      "queue"}, {}};
    for (int k = 0; k < A; ++k) {
      t.rows.push_back({double(k + 1), loc(k), bits(r.avg_throughput(k)), bits(r.avg_arrival(k)),
                        r.state.queues(k)});
    }
    summary.rows.push_back({double(reduced), std::numeric_limits<double>::quiet_NaN(),
                            bits(r.avg_throughput.sum()), bits(scale * r.avg_throughput.sum()),
                            r.utility, double(r.state.t)});
    out.push_back(t);
    out.push_back(summary);
  } else {
    const PfResult r = pf_operating_point(p, a.greedy, a.pf);
    ResultTable t{"optimize_groups", {"index", "location_km", "throughput_bits"}, {}};
    for (int k = 0; k < A; ++k) t.rows.push_back({double(k + 1), loc(k), bits(r.throughput(k))});
    summary.rows.push_back({double(reduced), std::numeric_limits<double>::quiet_NaN(),
                            bits(r.throughput.sum()), bits(scale * r.throughput.sum()), r.utility,
                            double(r.iterations)});
    out.push_back(t);
    out.push_back(summary);
  }
  return out;
}

std::vector<ResultTable> run_montecarlo(const ExperimentConfig& config, int threads) {
  const MonteCarloSpec& mc = config.montecarlo;
  const ClusterProblem p = build_problem(config, config.gamma, config.cluster_size);
  const int B = p.num_bs();
  const int A = p.num_groups();
  const Vector loc = group_locations(config, p);

  if (mc.scheduler == "theta") {
    require_fixed_mu(config, p);
    const Vector& mu = config.analysis.mu;
    const EtaSolution eta = solve_eta(p, mu);
    const Vector lam = lambda_gains(p, mu, eta.eta);
    const Matrix theta = solve_theta(p, mu, eta.eta, lam).theta;
    ResultTable th{"montecarlo_theta", {"n", "bs", "group", "theta_fd", "theta_asym"}, {}};
    ResultTable lt{"montecarlo_lambda", {"n", "group", "lambda_fd", "lambda_fd_sd", "lambda_asym"}, {}};
    for (int n : mc.n) {
      std::vector<Matrix> thetas(mc.seeds);
      std::vector<Vector> lams(mc.seeds);
      parallel_for(mc.seeds, threads, [&](int s) {
        const ChannelRealization ch = sample_channel(p, mu, n, config.seed, s);
        const FiniteZfResult zf = zf_pseudo_inverse(ch.h);
        thetas[s] = empirical_theta(zf, ch, B, A);
        lams[s] = group_mean(zf.lambda, ch.user_group, A);
      });
      Matrix tmean = Matrix::Zero(B, A);
      Vector lmean = Vector::Zero(A), lsq = Vector::Zero(A);
      for (int s = 0; s < mc.seeds; ++s) {
        tmean += thetas[s] / mc.seeds;
        lmean += lams[s] / mc.seeds;
      }
      for (int s = 0; s < mc.seeds; ++s) lsq += (lams[s] - lmean).cwiseAbs2();
      const Vector lsd = mc.seeds > 1 ? Vector((lsq / (mc.seeds - 1)).cwiseSqrt())
                                      : Vector::Constant(A, std::numeric_limits<double>::quiet_NaN());
      for (int m = 0; m < B; ++m) {
        for (int k = 0; k < A; ++k) {
          th.rows.push_back({double(n), double(m + 1), double(k + 1), tmean(m, k), theta(m, k)});
        }
      }
      for (int k = 0; k < A; ++k) {
        lt.rows.push_back({double(n), double(k + 1), lmean(k), lsd(k), lam(k)});
      }
    }
    return {th, lt};
  }

  FiniteSimConfig fc;
  fc.scheduler = mc.scheduler == "greedy" ? FiniteScheduler::kGreedySelection
                                          : FiniteScheduler::kProbabilistic;
  fc.slots = mc.slots;
  fc.burn_in = mc.burn_in;
  fc.csit = config.csit;
  fc.utility.v = mc.v;
  fc.greedy = config.analysis.greedy;
  fc.greedy.mode = ConstraintMode::kSum;
  fc.pf = config.analysis.pf;
  ResultTable t{"montecarlo_throughput", {"n", "group", "location_km", "finite_bits",
                                          "asymptotic_bits", "gain"}, {}};
  for (int n : mc.n) {
    std::vector<FiniteSimResult> res(mc.seeds);
    parallel_for(mc.seeds, threads, [&](int s) {
      FiniteSimConfig c = fc;
      c.n = n;
      c.seed = trial_seed(config.seed, s);
      res[s] = finite_sim_throughput(p, c);
    });
    Vector mean = Vector::Zero(A);
    for (const auto& r : res) mean += r.group_throughput / mc.seeds;
    const Vector& asym = res.front().asymptotic;
    for (int k = 0; k < A; ++k) {
      t.rows.push_back({double(n), double(k + 1), loc(k), bits(mean(k)), bits(asym(k)),
                        mean(k) / asym(k) - 1.0});
    }
  }
  return {t};
}

std::vector<ResultTable> run_sweep(const ExperimentConfig& config, int threads) {
  const SweepSpec& s = config.sweep;
  if (s.parameter.empty()) fail("sweep", "missing");
  const AnalysisSpec& a = config.analysis;

  if (s.parameter == "mu_total") {
    // Greedy over the whole load range, reported at the requested totals.
    ExperimentConfig c = config;
    c.analysis.greedy.full_sweep = true;
    c.analysis.optimizer = "greedy";
    c.analysis.fixed_mu = false;
    ResultTable t{"sweep_mu_total", {"mu_total", "objective_bits", "cluster_objective_bits"}, {}};
    if (s.values.empty()) return {t};
    const std::vector<ResultTable> opt = run_optimize(c);
    const ResultTable& trace = opt[2];
    const double scale = opt[1].rows[0][3] / opt[1].rows[0][2];
    const double half = 0.5 * a.greedy.delta_mu;
    for (double v : s.values) {
      for (const auto& row : trace.rows) {
        if (std::abs(row[1] - v) <= half * (1.0 + 1e-9)) {
          t.rows.push_back({v, row[2], std::isfinite(scale) ? scale * row[2] : row[2]});
          break;
        }
      }
    }
    return {t};
  }

  std::vector<int> sizes = s.cluster_sizes;
  std::vector<double> gammas = s.gammas;
  std::vector<double> taus = s.taus;
  if (s.parameter == "cluster_size") {
    sizes.clear();
    for (double v : s.values) sizes.push_back(static_cast<int>(std::lround(v)));
  } else if (s.parameter == "gamma") {
    gammas = s.values;
  } else {
    taus = s.values;
  }
  if (sizes.empty()) sizes = {config.cluster_size};
  if (gammas.empty()) gammas = {config.gamma};
  const bool perfect = taus.empty() && config.csit.perfect;
  if (taus.empty()) taus = {config.csit.tau};

  struct Point {
    int size;
    double tau, gamma;
  };
  std::vector<Point> points;
  for (int b : sizes) {
    for (double tau : taus) {
      for (double g : gammas) points.push_back({b, tau, g});
    }
  }
  ResultTable t{"sweep_" + s.parameter, {"cluster_size", "tau", "gamma", "overhead",
                                         "cluster_sum_rate_bits", "cell_sum_rate_bits"}, {}};
  std::vector<std::vector<double>> rows(points.size());
  parallel_for(static_cast<int>(points.size()), threads, [&](int i) {
    const Point& pt = points[i];
    const ClusterProblem p = build_problem(config, pt.gamma, pt.size);
    TrainingConfig tc = config.csit;
    tc.perfect = perfect;
    tc.tau = pt.tau;
    SpectralOptions so;
    so.fairness = a.fairness;
    so.weights = a.weights;
    so.greedy = a.greedy;
    so.greedy.full_sweep = false;
    so.pf = a.pf;
    so.use_symmetry = a.use_symmetry;
    SpectralEfficiency se;
    se.overhead = overhead_factor(tc, pt.gamma, p.num_bs());
    if (se.overhead > 0.0) se = effective_spectral_efficiency(p, tc, so);
    rows[i] = {double(pt.size), perfect ? 0.0 : pt.tau, pt.gamma, se.overhead,
               bits(se.cluster_sum_rate), bits(se.cell_sum_rate)};
  });
  t.rows = std::move(rows);
  return {t};
}

}  // namespace netmimo
