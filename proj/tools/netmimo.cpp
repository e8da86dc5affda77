#include "CLI11.hpp"
#include "acceptance.hpp"
#include "netmimo/experiment.hpp"

#include <iostream>
#include <thread>

using namespace netmimo;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  std::vector<int> criteria;
};

int thread_count(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

int run_experiment(const std::string& sub, const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.seed_given) cfg.seed = o.seed;
  const int threads = thread_count(o.threads);
  std::vector<ResultTable> tables;
  if (sub == "asymptotic") {
    tables = run_asymptotic(cfg);
  } else if (sub == "optimize") {
    tables = run_optimize(cfg);
  } else if (sub == "montecarlo") {
    tables = run_montecarlo(cfg, threads);
  } else {
    tables = run_sweep(cfg, threads);
  }
  const std::string dir = !o.out.empty() ? o.out : !cfg.output.empty() ? cfg.output : "results";
  const RunMetadata meta{sub, config_hash(cfg), cfg.seed, library_version()};
  for (const auto& t : tables) {
    emit_csv(t, dir, meta);
    std::cout << dir << "/" << t.name << ".csv (" << t.rows.size() << " rows)\n";
  }
  return 0;
}

int run_validate(const Options& o) {
  const std::vector<int> ids = o.criteria.empty() ? acceptance::all_criteria() : o.criteria;
  const auto outcomes = acceptance::run_suite(ids, o.seed_given ? o.seed : 1, std::cout);
  ResultTable t{"validate", {"criterion", "pass", "seconds"}, {}};
  int failed = 0;
  for (const auto& r : outcomes) {
    t.rows.push_back({double(r.id), double(r.pass), r.seconds});
    failed += !r.pass;
  }
  if (!o.out.empty()) {
    emit_csv(t, o.out, RunMetadata{"validate", "", o.seed_given ? o.seed : 1, library_version()});
  }
  std::cout << outcomes.size() - failed << "/" << outcomes.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-system analysis and simulation of clustered network MIMO"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);
  Options o;
  for (const char* name : {"asymptotic", "optimize", "montecarlo", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (default: config output, else ./results)");
    sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  }
  app.get_subcommand("asymptotic")->description("Solve eta, Lambda, theta, powers and rates for a fixed mu");
  app.get_subcommand("optimize")->description("Choose mu by greedy, NUM or PF");
  app.get_subcommand("montecarlo")->description("Finite-dimension simulation against the asymptotic model");
  app.get_subcommand("sweep")->description("Sweep mu_total, gamma, cluster size or tau");
  CLI::App* val = app.add_subcommand("validate", "Run the acceptance checks");
  val->add_option("--criteria", o.criteria, "criterion ids (default: all)");
  val->add_option("--out", o.out, "also write validate.csv here");
  val->add_option("--seed", o.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    o.seed_given = sub->count("--seed") > 0;
  }

  try {
    const std::string sub = app.get_subcommands().front()->get_name();
    if (sub == "validate") return run_validate(o);
    return run_experiment(sub, o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
