#include "netmimo/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace netmimo {

FractionEvaluation evaluate_fractions(const ClusterProblem& problem, const Vector& weights,
                                      const Vector& mu, ConstraintMode mode) {
  FractionEvaluation ev;
  const EtaSolution eta = solve_eta(problem, mu);
  ev.eta = eta.eta;
  ev.lambda = lambda_gains(problem, mu, eta.eta);
  if (mode == ConstraintMode::kSum) {
    ev.allocation = waterfill_sum(weights, ev.lambda, mu, problem.total_power());
  } else {
    ev.theta = solve_theta(problem, mu, ev.eta, ev.lambda).theta;
    ev.allocation = waterfill_perbs(weights, ev.lambda, mu, ev.theta, problem.power);
  }
  ev.objective = weighted_sum_rate(weights, ev.lambda, ev.allocation.q, mu);
  return ev;
}

namespace {

// Weighted sum rate of a single-BS problem under the sum constraint. `order`
// lists the groups by decreasing W * beta^2, which is also the order of
// W * Lambda since eta is shared.
class SingleBsObjective {
 public:
  SingleBsObjective(const ClusterProblem& problem, const Vector& weights)
      : gamma_(problem.gamma), p_(problem.total_power()), w_(weights),
        b2_(problem.beta_squared().row(0).transpose()) {
    for (int k = 0; k < b2_.size(); ++k) {
      if (w_(k) > 0.0) order_.push_back(k);
    }
    std::stable_sort(order_.begin(), order_.end(),
                     [&](int a, int b) { return w_(a) * b2_(a) > w_(b) * b2_(b); });
  }

  double operator()(const std::vector<long>& count, double dmu, long total) const {
    if (p_ == 0.0) return 0.0;
    const double scale = gamma_ * (1.0 - total * dmu / gamma_);  // Lambda_k = scale * beta^2_k
    if (!(scale > 0.0)) return 0.0;
    double sw = 0.0, sinv = 0.0, level = 0.0;
    std::size_t n = 0;
    for (; n < order_.size(); ++n) {
      const int k = order_[n];
      if (count[k] == 0) continue;
      const double mu = count[k] * dmu;
      const double lam = scale * b2_(k);
      const double cand_sw = sw + mu * w_(k);
      const double cand_sinv = sinv + mu / lam;
      const double cand = cand_sw / (p_ + cand_sinv);
      if (level > 0.0 && !(cand < w_(k) * lam)) break;
      sw = cand_sw;
      sinv = cand_sinv;
      level = cand;
    }
    double val = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const int k = order_[j];
      if (count[k] == 0) continue;
      val += w_(k) * count[k] * dmu * std::log(w_(k) * scale * b2_(k) / level);
    }
    return val;
  }

 private:
  double gamma_;
  double p_;
  Vector w_;
  Vector b2_;
  std::vector<int> order_;
};

}  // namespace

GreedyResult greedy_fractions(const ClusterProblem& problem, const Vector& weights,
                              const GreedyOptions& options) {
  problem.validate();
  const int A = problem.num_groups();
  if (weights.size() != A || (weights.array() < 0.0).any()) {
    throw ConfigError("greedy_fractions: need one non-negative weight per group");
  }
  if (!(options.delta_mu > 0.0) || options.delta_mu > 1.0) {
    throw ConfigError("greedy_fractions: delta_mu must lie in (0, 1]");
  }
  const double dmu = options.delta_mu;
  // Fractions are kept as integer multiples of delta_mu.
  const long per_group_cap = static_cast<long>(std::floor(1.0 / dmu + 1e-9));
  const double load_cap = problem.gamma * problem.num_bs() - kLoadMargin;

  std::vector<long> count(A, 0);
  long total = 0;
  auto as_mu = [&](const std::vector<long>& c) {
    Vector mu(A);
    for (int k = 0; k < A; ++k) mu(k) = c[k] * dmu;
    return mu;
  };

  GreedyResult best;
  best.mu = Vector::Zero(A);
  FractionEvaluation best_eval = evaluate_fractions(problem, weights, best.mu, options.mode);
  best.objective = best_eval.objective;
  best.trace_objective.push_back(best.objective);
  best.trace_mu_total.push_back(0.0);
  double current = best.objective;

  const bool fast = options.single_bs_fast_path && problem.num_bs() == 1 &&
                    options.mode == ConstraintMode::kSum;
  std::optional<SingleBsObjective> fast_objective;
  if (fast) fast_objective.emplace(problem, weights);
  bool best_is_fresh = false;

  while ((total + 1) * dmu <= load_cap) {
    int arg = -1;
    double arg_value = 0.0;
    FractionEvaluation arg_eval;
    for (int k = 0; k < A; ++k) {
      if (count[k] + 1 > per_group_cap) continue;
      ++count[k];
      if (fast) {
        const double v = (*fast_objective)(count, dmu, total + 1);
        if (arg < 0 || v > arg_value) {
          arg = k;
          arg_value = v;
        }
      } else {
        FractionEvaluation ev = evaluate_fractions(problem, weights, as_mu(count), options.mode);
        if (arg < 0 || ev.objective > arg_value) {
          arg = k;
          arg_value = ev.objective;
          arg_eval = std::move(ev);
        }
      }
      --count[k];
    }
    if (arg < 0) break;
    if (!options.full_sweep && !(arg_value > current)) break;
    ++count[arg];
    ++total;
    current = arg_value;
    best.trace_objective.push_back(current);
    best.trace_mu_total.push_back(total * dmu);
    if (current > best.objective) {
      best.objective = current;
      best.mu = as_mu(count);
      if (fast) {
        best_is_fresh = true;
      } else {
        best_eval = std::move(arg_eval);
      }
    }
  }
  if (best_is_fresh) {
    best_eval = evaluate_fractions(problem, weights, best.mu, options.mode);
    best.objective = best_eval.objective;
  }
  best.allocation = best_eval.allocation;
  best.lambda = best_eval.lambda;
  best.rates = group_rates(best.lambda, best.allocation.q, best.mu);
  return best;
}

void UtilityConfig::validate(int num_groups) const {
  if (!(v > 0.0)) throw ConfigError("utility: V must be positive");
  if (horizon < 1) throw ConfigError("utility: horizon must be >= 1");
  if (warm_start < 0) throw ConfigError("utility: warm_start must be >= 0");
  if (kind == UtilityKind::kAlphaFair && !(alpha > 0.0)) {
    throw ConfigError("utility: alpha must be positive");
  }
  if (kind == UtilityKind::kWeightedSum && weights.size() != 0 && weights.size() != num_groups) {
    throw ConfigError("utility: weighted-sum weights need one entry per group");
  }
}

double default_a_max(const ClusterProblem& problem) {
  return 2.0 * std::log1p(problem.gamma * problem.beta_squared().maxCoeff() * problem.total_power());
}

double drift_constant(const ClusterProblem& problem, double a_max) {
  const double l = std::log1p(problem.gamma * problem.beta_squared().maxCoeff() *
                              problem.total_power());
  return 0.5 * problem.num_groups() * (a_max * a_max + l * l);
}

Vector utility_subproblem(const Vector& queues, const UtilityConfig& config) {
  if ((queues.array() < 0.0).any()) throw ConfigError("utility_subproblem: negative queue");
  if (!(config.a_max > 0.0)) throw ConfigError("utility_subproblem: a_max must be positive");
  const int A = static_cast<int>(queues.size());
  Vector a(A);
  for (int k = 0; k < A; ++k) {
    const double q = queues(k);
    switch (config.kind) {
      case UtilityKind::kProportionalFair:
        a(k) = q > 0.0 ? std::min(config.a_max, config.v / q) : config.a_max;
        break;
      case UtilityKind::kAlphaFair:
        a(k) = q > 0.0 ? std::min(config.a_max, std::pow(config.v / q, 1.0 / config.alpha))
                       : config.a_max;
        break;
      case UtilityKind::kWeightedSum: {
        const double w = config.weights.size() ? config.weights(k) : 1.0;
        a(k) = config.v * w > q ? config.a_max : 0.0;
        break;
      }
    }
  }
  return a;
}

double utility_value(const Vector& r, const UtilityConfig& config) {
  double g = 0.0;
  for (int k = 0; k < r.size(); ++k) {
    switch (config.kind) {
      case UtilityKind::kProportionalFair:
        g += std::log(r(k));
        break;
      case UtilityKind::kAlphaFair:
        g += config.alpha == 1.0 ? std::log(r(k))
                                 : std::pow(r(k), 1.0 - config.alpha) / (1.0 - config.alpha);
        break;
      case UtilityKind::kWeightedSum:
        g += (config.weights.size() ? config.weights(k) : 1.0) * r(k);
        break;
    }
  }
  return g;
}

NumResult num_iterate(const ClusterProblem& problem, const UtilityConfig& config_in,
                      const GreedyOptions& fraction_options) {
  const int A = problem.num_groups();
  UtilityConfig config = config_in;
  if (!(config.a_max > 0.0)) config.a_max = default_a_max(problem);
  config.validate(A);

  NumResult out;
  out.state.queues = Vector::Zero(A);
  out.state.running_rate_avg = Vector::Zero(A);
  Vector sum_r = Vector::Zero(A);
  Vector sum_a = Vector::Zero(A);
  for (int t = 0; t < config.horizon; ++t) {
    const Vector a = utility_subproblem(out.state.queues, config);
    const Vector w = t < config.warm_start ? Vector::Ones(A) : out.state.queues;
    const Vector r = greedy_fractions(problem, w, fraction_options).rates.throughput;
    out.state.queues = (out.state.queues - r).cwiseMax(0.0) + a;
    sum_r += r;
    sum_a += a;
    out.state.t = t + 1;
    out.state.running_rate_avg = sum_r / static_cast<double>(t + 1);
  }
  out.avg_throughput = out.state.running_rate_avg;
  out.avg_arrival = sum_a / static_cast<double>(config.horizon);
  out.utility = utility_value(out.avg_throughput, config);
  return out;
}

namespace {

// Largest s in [0, s_max] maximizing sum log(x + s d); sum log is concave in s.
double log_line_search(const Vector& x, const Vector& d, double s_max) {
  auto slope = [&](double s) { return (d.array() / (x.array() + s * d.array())).sum(); };
  auto inside = [&](double s) { return ((x + s * d).array() > 0.0).all(); };
  if (inside(s_max) && slope(s_max) >= 0.0) return s_max;
  double lo = 0.0, hi = s_max;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (inside(mid) && slope(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

PfResult pf_operating_point(const ClusterProblem& problem, const GreedyOptions& options,
                            const PfOptions& pf) {
  const int A = problem.num_groups();
  PfResult out;
  std::vector<Vector> atoms;
  std::vector<Vector> fractions;
  std::vector<double> mass;  // convex weights of the atoms in the current point
  auto add_atom = [&](const GreedyResult& g) {
    const Vector& a = g.rates.throughput;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((atoms[i] - a).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + a.cwiseAbs().maxCoeff())) {
        return i;
      }
    }
    atoms.push_back(a);
    fractions.push_back(g.mu);
    mass.push_back(0.0);
    return atoms.size() - 1;
  };
  for (int k = 0; k < A; ++k) {
    const std::size_t i = add_atom(greedy_fractions(problem, Vector::Unit(A, k), options));
    mass[i] += 1.0 / A;
  }
  out.throughput = Vector::Zero(A);
  for (std::size_t i = 0; i < atoms.size(); ++i) out.throughput += mass[i] * atoms[i];
  if (!(out.throughput.array() > 0.0).all()) {
    throw NumericalError("pf_operating_point: some group cannot be served at all");
  }

  // Pairwise steps over the cached schedules, with the greedy (weights
  // 1/Rbar) proposing a new schedule each outer round. Greedy is not an exact
  // maximizer for every weight vector, so the gap is measured over the cache.
  out.gap_bound = std::numeric_limits<double>::infinity();
  for (int t = 0; t < pf.iterations; ++t) {
    const Vector w0 = out.throughput.cwiseInverse();
    const GreedyResult proposal = greedy_fractions(problem, w0, options);
    out.iterations = t + 1;
    if (t > 0 && out.gap_bound <= pf.tol && w0.dot(proposal.rates.throughput) - A <= pf.tol) {
      break;
    }
    add_atom(proposal);
    for (int inner = 0; inner < 20 * A; ++inner) {
      const Vector w = out.throughput.cwiseInverse();
      std::size_t to = 0, away = atoms.size();
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (w.dot(atoms[i]) > w.dot(atoms[to])) to = i;
        if (mass[i] > 0.0 && (away == atoms.size() || w.dot(atoms[i]) < w.dot(atoms[away]))) {
          away = i;
        }
      }
      out.gap_bound = w.dot(atoms[to]) - A;
      if (out.gap_bound <= pf.tol || to == away) break;
      const Vector d = atoms[to] - atoms[away];
      const double s = log_line_search(out.throughput, d, mass[away]);
      if (s <= 0.0) break;
      out.throughput += s * d;
      mass[to] += s;
      mass[away] = (s == mass[away]) ? 0.0 : mass[away] - s;
    }
  }
  out.utility = out.throughput.array().log().sum();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (mass[i] > 0.0) {
      out.schedules.push_back(fractions[i]);
      out.shares.push_back(mass[i]);
    }
  }
  return out;
}

Vector pf_weights(const Vector& avg_rates) {
  if (!(avg_rates.array() > 0.0).all()) {
    throw ConfigError("pf_weights: average rates must be positive (warm-start first)");
  }
  return avg_rates.cwiseInverse();
}

}  // namespace netmimo
