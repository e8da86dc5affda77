#include "acceptance.hpp"

#include "netmimo/csit.hpp"
#include "netmimo/experiment.hpp"
#include "netmimo/montecarlo.hpp"
#include "netmimo/scheduler.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace netmimo::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct Check {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

ClusterProblem reduced_example1() {
  const ClusterProblem ex = testing::example1_problem(15.0);
  return reduce_symmetric(ex, detect_symmetry(ex));
}

Check table_one(std::uint64_t) {
  Check c;
  const auto t0 = Clock::now();
  const ThetaMatrix t = solve_theta(testing::example1_problem(), testing::example1_mu());
  const double dt = since(t0);
  const double err = (t.theta - testing::table1_theta()).cwiseAbs().maxCoeff();
  c.require(err <= 5e-4, fmt("max |theta - table| = %.2e", err));
  c.require(dt < 0.1, fmt("%.1f ms", 1e3 * dt));
  return c;
}

Check greedy_optimum(std::uint64_t) {
  Check c;
  const ClusterProblem r = reduced_example1();
  std::vector<double> b2(4), w(4, 1.0);
  for (int i = 0; i < 4; ++i) b2[i] = r.beta(0, i) * r.beta(0, i);
  for (double d : {0.01, 0.05}) {
    GreedyOptions o;
    o.delta_mu = d;
    auto t0 = Clock::now();
    const GreedyResult g = greedy_fractions(r, Vector::Ones(4), o);
    const double tg = since(t0);
    t0 = Clock::now();
    const oracle::GridOptimum ex = oracle::exhaustive_single_bs(b2, w, r.gamma, r.power(0), d);
    const double te = since(t0);
    const double rel = std::abs(g.objective - ex.value) / ex.value;
    c.require(rel <= 1e-6, fmt("d=%.2f greedy %.6f vs grid %.6f bits (rel %.1e)", d,
                               nats_to(LogBase::kBits, g.objective),
                               nats_to(LogBase::kBits, ex.value), rel));
    c.require(tg < 1.0, fmt("greedy %.3f s", tg));
    if (d == 0.01) {
      c.require(std::abs(g.mu.sum() - 2.76) <= 0.01 + 1e-9, fmt("mu' = %.2f", g.mu.sum()));
    } else {
      c.require(te < 60.0, fmt("grid %.2f s", te));
    }
  }
  return c;
}

Check symmetric_closed_form(std::uint64_t seed) {
  Check c;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int B = 2 + trial % 3;
    const int ap = 1 + (trial / 3) % 4;
    const double gamma = 1.0 + 3.0 * u(rng);
    const ClusterProblem p = problem_from_beta_squared(
        testing::random_circulant_beta_squared(B, ap, rng), gamma, Vector::Ones(B));
    const EquivalenceClasses cls = detect_symmetry(p);
    if (!cls.is_symmetric) {
      c.require(false, fmt("trial %d not detected as symmetric", trial));
      return c;
    }
    Vector mu_prime(ap);
    for (int i = 0; i < ap; ++i) mu_prime(i) = u(rng);
    const double cap = 0.98 * gamma;
    if (mu_prime.sum() > cap) mu_prime *= cap / mu_prime.sum();
    const Vector mu = expand_classes(mu_prime, cls);
    const Vector eta = solve_eta(p, mu).eta;
    const double expect = 1.0 - mu.sum() / (gamma * B);
    worst = std::max(worst, (eta.array() - expect).abs().maxCoeff());
  }
  c.require(worst <= 1e-10, fmt("50 problems, max |eta - closed form| = %.1e", worst));
  return c;
}

Check column_sums(std::uint64_t seed) {
  Check c;
  std::mt19937_64 rng(seed + 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int B = 1 + trial % 3;
    const int A = 2 + trial % 7;
    const double gamma = 1.0 + 3.0 * u(rng);
    const ClusterProblem p = problem_from_beta_squared(testing::random_beta_squared(B, A, rng),
                                                       gamma, Vector::Ones(B));
    Vector mu(A);
    for (int k = 0; k < A; ++k) mu(k) = u(rng);
    const double cap = 0.98 * gamma * B;
    if (mu.sum() > cap) mu *= cap / mu.sum();
    const Matrix theta = solve_theta(p, mu).theta;
    worst = std::max(worst, (theta.colwise().sum().transpose() - mu).cwiseAbs().maxCoeff());
  }
  c.require(worst <= 1e-8, fmt("100 problems, max |sum_m theta - mu| = %.1e", worst));
  return c;
}

Check theta_convergence(std::uint64_t seed) {
  Check c;
  const auto t0 = Clock::now();
  const ClusterProblem ex = testing::example1_problem();
  const Vector mu = testing::example1_mu();
  const Matrix theta = solve_theta(ex, mu).theta;
  double prev = 1e300;
  bool monotone = true;
  std::string curve;
  double last = 0.0;
  for (int n : {4, 16, 64, 256}) {
    Matrix mean = Matrix::Zero(2, 8);
    for (int s = 0; s < 100; ++s) {
      const ChannelRealization ch = sample_channel(ex, mu, n, seed, s);
      mean += empirical_theta(zf_pseudo_inverse(ch.h), ch, 2, 8) / 100.0;
    }
    last = ((mean - theta).array().abs() / theta.array()).mean();
    monotone = monotone && last < prev;
    prev = last;
    curve += fmt("%sN=%d %.3f%%", curve.empty() ? "" : ", ", n, 100.0 * last);
  }
  const double dt = since(t0);
  c.require(monotone, "decreasing: " + curve);
  c.require(last <= 0.02, fmt("N=256 error %.3f%%", 100.0 * last));
  c.require(dt <= 300.0, fmt("%.0f s", dt));
  return c;
}

Check lambda_concentration(std::uint64_t seed) {
  Check c;
  const ClusterProblem ex = testing::example1_problem();
  const Vector mu = testing::example1_mu();
  const Vector lam = lambda_gains(ex, mu, solve_eta(ex, mu).eta);
  Vector mean = Vector::Zero(8);
  for (int s = 0; s < 100; ++s) {
    const ChannelRealization ch = sample_channel(ex, mu, 128, seed + 7, s);
    const FiniteZfResult zf = zf_pseudo_inverse(ch.h, ZfOptions{false, false});
    mean += group_mean(zf.lambda, ch.user_group, 8) / 100.0;
  }
  const double worst = ((mean - lam).array() / lam.array()).abs().maxCoeff();
  c.require(worst <= 0.03, fmt("N=128, max group error %.2f%%", 100.0 * worst));
  return c;
}

Check csit_identities(std::uint64_t seed) {
  Check c;
  std::mt19937_64 rng(seed + 2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double b = std::pow(10.0, u(rng));
    const double p = std::pow(10.0, 2.0 * u(rng));
    const EffectiveGains g = effective_gains(Matrix::Constant(1, 1, b), p);
    worst = std::max(worst,
                     std::abs(g.beta_hat_sq(0, 0) + g.beta_bar_sq(0, 0) - b * b) / (b * b));
  }
  c.require(worst <= 1e-12, fmt("1e4 pairs, max relative defect %.1e", worst));

  const ClusterProblem ex = testing::example1_problem();
  const Vector mu = testing::example1_mu();
  const Vector lam = lambda_gains(ex, mu, solve_eta(ex, mu).eta);
  const PowerAllocation q = waterfill_sum(Vector::Ones(8), lam, mu, ex.total_power());
  const RatePoint perfect = group_rates(lam, q.q, mu);
  const EffectiveGains g = effective_gains(ex.beta, 1e12);
  const RatePoint bound =
      lower_bound_rates(estimated_problem(ex, g), mu, q.q, g.beta_bar_sq, ex.power);
  const double gap = ((perfect.rate - bound.rate).array() / perfect.rate.array()).abs().maxCoeff();
  c.require(gap < 1e-4, fmt("p=1e12 bound gap %.1e", gap));
  return c;
}

Check overhead_tradeoff(std::uint64_t) {
  Check c;
  const auto t0 = Clock::now();
  const NetworkLayout lay = build_linear_layout(8, 24, wimax_pathloss(), db_to_linear(154.0));
  SpectralOptions so;  // proportional fairness, delta_mu = 0.01
  auto rate = [&](int B, double tau, double gamma) {
    TrainingConfig tc{false, 0.0, tau};
    if (overhead_factor(tc, gamma, B) <= 0.0) return 0.0;
    const ClusterProblem p = cluster_reduce(partition_consecutive(lay, B), 0, gamma);
    return nats_to(LogBase::kBits, effective_spectral_efficiency(p, tc, so).cell_sum_rate);
  };
  const double gammas[] = {2, 4, 8, 12, 16, 24, 32};
  double best = -1.0, arg = 0.0;
  std::string curve;
  for (double g : gammas) {
    const double r = rate(2, 1.0 / 64.0, g);
    curve += fmt("%s%g:%.2f", curve.empty() ? "" : " ", g, r);
    if (r > best) {
      best = r;
      arg = g;
    }
  }
  c.require(arg == 16.0, fmt("B=2 tau=1/64 peak at gamma=%g (%s)", arg, curve.c_str()));
  for (double g : {16.0, 24.0, 32.0}) {
    const double r1 = rate(1, 1.0 / 32.0, g), r2 = rate(2, 1.0 / 32.0, g), r8 = rate(8, 1.0 / 32.0, g);
    const bool ok = r1 > 0.0 ? (r1 > r2 && r1 > r8) : (r2 == 0.0 && r8 == 0.0);
    c.require(ok, fmt("tau=1/32 gamma=%g: B1 %.2f B2 %.2f B8 %.2f%s", g, r1, r2, r8,
                      r1 > 0.0 ? "" : " (all zero: no time left after training)"));
  }
  const double dt = since(t0);
  c.require(dt < 10.0, fmt("%.1f s", dt));
  return c;
}

Check num_gap(std::uint64_t) {
  Check c;
  const auto t0 = Clock::now();
  const double b1 = 1.7, b2 = 1.3, gamma = 4.0, p = db_to_linear(15.0);
  const ClusterProblem prob = problem_from_beta_squared((Matrix(1, 2) << b1, b2).finished(), gamma,
                                                        Vector::Constant(1, p));
  const oracle::PfOptimum best = oracle::pf_two_groups(b1, b2, gamma, p);
  UtilityConfig u;
  u.v = 1e4;
  u.horizon = 10000;
  GreedyOptions o;
  o.delta_mu = 0.01;
  const NumResult r = num_iterate(prob, u, o);
  const double k = drift_constant(prob, default_a_max(prob));
  const double gap = best.utility - r.utility;
  const double e1 = std::abs(r.avg_throughput(0) / best.r1 - 1.0);
  const double e2 = std::abs(r.avg_throughput(1) / best.r2 - 1.0);
  c.require(gap <= k / u.v, fmt("utility gap %.1e <= K/V %.1e", gap, k / u.v));
  c.require(std::max(e1, e2) <= 0.005, fmt("throughput error %.3f%% / %.3f%%", 100 * e1, 100 * e2));
  const double dt = since(t0);
  c.require(dt < 120.0, fmt("%.1f s", dt));
  return c;
}

Check diversity_trend(std::uint64_t seed) {
  Check c;
  const auto t0 = Clock::now();
  const NetworkLayout lay = build_linear_layout(8, 8, wimax_pathloss(), db_to_linear(154.0));
  const ClusterProblem p = cluster_reduce(partition_consecutive(lay, 2), 0, 4.0);
  const int seeds = 20;
  std::map<int, double> gain;
  for (int n : {1, 8}) {
    FiniteSimConfig fc;
    fc.scheduler = FiniteScheduler::kGreedySelection;
    fc.n = n;
    fc.slots = n == 1 ? 2000 : 600;
    fc.burn_in = 200;
    Vector finite = Vector::Zero(p.num_groups());
    Vector asym;
    for (int s = 0; s < seeds; ++s) {
      fc.seed = trial_seed(seed, s);
      const FiniteSimResult r = finite_sim_throughput(p, fc);
      finite += r.group_throughput / seeds;
      asym = r.asymptotic;
    }
    gain[n] = (finite.array() / asym.array()).mean() - 1.0;
  }
  c.require(gain[1] > gain[8], fmt("gain N=1 %.1f%% > N=8 %.1f%%", 100 * gain[1], 100 * gain[8]));
  c.require(std::abs(gain[1] - 0.55) <= 0.10, "N=1 within 55% +- 10 points");
  c.require(std::abs(gain[8] - 0.25) <= 0.10, "N=8 within 25% +- 10 points");
  const double dt = since(t0);
  c.require(dt <= 900.0, fmt("%.0f s", dt));
  return c;
}

const char* kDeterminismConfig = R"({
  "scenario": "determinism",
  "gamma": 4,
  "layout": {"beta_squared": [[1.5, 1.3, 1.0, 1.0, 0.2, 0.3, 0.3, 0.5],
                              [0.2, 0.3, 0.3, 0.5, 1.5, 1.3, 1.0, 1.0]],
             "power_db": 15},
  "analysis": {"mu": [0.5, 0.5, 0.75, 1.0, 0.5, 0.5, 0.75, 1.0], "delta_mu": 0.05},
  "montecarlo": {"n": [2, 4], "seeds": 3, "slots": 20, "burn_in": 5},
  "sweep": {"parameter": "gamma", "values": [2, 4], "taus": [0.015625]}
})";

Check determinism(std::uint64_t seed) {
  Check c;
  ExperimentConfig base = parse_config(kDeterminismConfig);
  base.seed = seed;
  auto csv = [](const std::vector<ResultTable>& tables) {
    std::string s;
    for (const auto& t : tables) s += t.name + "\n" + to_csv(t);
    return s;
  };
  std::vector<std::pair<std::string, std::function<std::string(int)>>> runs;
  runs.push_back({"asymptotic", [&](int) { return csv(run_asymptotic(base)); }});
  ExperimentConfig opt = base;
  opt.analysis.fixed_mu = false;
  opt.analysis.greedy.full_sweep = true;
  runs.push_back({"optimize", [=](int) { return csv(run_optimize(opt)); }});
  for (const char* sched : {"theta", "greedy", "probabilistic"}) {
    ExperimentConfig mc = base;
    mc.montecarlo.scheduler = sched;
    runs.push_back({std::string("montecarlo/") + sched,
                    [=](int threads) { return csv(run_montecarlo(mc, threads)); }});
  }
  ExperimentConfig sw = base;
  sw.analysis.fixed_mu = false;
  runs.push_back({"sweep", [=](int threads) { return csv(run_sweep(sw, threads)); }});
  for (const auto& [name, fn] : runs) {
    const std::string a = fn(1), b = fn(1), t = fn(2);
    c.require(a == b && a == t && !a.empty(), name + (a == b && a == t ? " identical" : " differs"));
  }
  return c;
}

struct Criterion {
  int id;
  const char* name;
  Check (*fn)(std::uint64_t);
};

const Criterion kCriteria[] = {
    {1, "theta table reproduction", table_one},
    {2, "greedy fractions optimum", greedy_optimum},
    {3, "symmetric closed form", symmetric_closed_form},
    {4, "column-sum identity", column_sums},
    {5, "Monte Carlo theta convergence", theta_convergence},
    {6, "Lambda concentration", lambda_concentration},
    {7, "CSIT identities", csit_identities},
    {8, "coordination-estimation tradeoff", overhead_tradeoff},
    {9, "NUM optimality gap", num_gap},
    {10, "multiuser-diversity trend", diversity_trend},
    {11, "determinism", determinism},
};

}  // namespace

std::vector<int> all_criteria() {
  std::vector<int> ids;
  for (const auto& c : kCriteria) ids.push_back(c.id);
  return ids;
}

Outcome run_criterion(int id, std::uint64_t seed) {
  for (const auto& c : kCriteria) {
    if (c.id != id) continue;
    Outcome out{id, c.name, false, "", 0.0};
    const auto t0 = Clock::now();
    try {
      const Check r = c.fn(seed);
      out.pass = r.pass;
      out.detail = r.detail;
    } catch (const std::exception& e) {
      out.detail = std::string("exception: ") + e.what();
    }
    out.seconds = since(t0);
    return out;
  }
  return Outcome{id, "unknown criterion", false, "no such criterion", 0.0};
}

std::vector<Outcome> run_suite(const std::vector<int>& ids, std::uint64_t seed, std::ostream& log) {
  std::vector<Outcome> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, seed));
    const Outcome& o = out.back();
    log << (o.pass ? "PASS" : "FAIL") << " criterion " << o.id << " (" << o.name << ", "
        << fmt("%.1f s", o.seconds) << "): " << o.detail << std::endl;
  }
  return out;
}

}  // namespace netmimo::acceptance
