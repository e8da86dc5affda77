#include "netmimo/allocation.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace netmimo {

namespace {

void check_sizes(const Vector& w, const Vector& lambda, const Vector& mu) {
  if (w.size() != lambda.size() || mu.size() != lambda.size()) {
    throw ConfigError("power allocation: weights, gains and fractions differ in length");
  }
  if ((w.array() < 0.0).any() || (lambda.array() < 0.0).any() || (mu.array() < 0.0).any()) {
    throw ConfigError("power allocation: weights, gains and fractions must be non-negative");
  }
}

}  // namespace

PowerAllocation waterfill_sum(const Vector& weights, const Vector& lambda, const Vector& mu,
                              double p_sum) {
  check_sizes(weights, lambda, mu);
  if (!(p_sum >= 0.0)) throw ConfigError("waterfill_sum: negative power budget");
  const int A = static_cast<int>(lambda.size());
  PowerAllocation out;
  out.mode = ConstraintMode::kSum;
  out.q = Vector::Zero(A);

  std::vector<int> order;
  for (int k = 0; k < A; ++k) {
    if (mu(k) > 0.0 && lambda(k) > 0.0 && weights(k) > 0.0) order.push_back(k);
  }
  if (order.empty() || p_sum == 0.0) return out;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return weights(a) * lambda(a) > weights(b) * lambda(b);
  });

  // Active set is a prefix of the order; take the longest prefix whose
  // level stays below its weakest member's W*Lambda.
  double sw = 0.0, sinv = 0.0, level = 0.0;
  for (int k : order) {
    const double cand_sw = sw + mu(k) * weights(k);
    const double cand_sinv = sinv + mu(k) / lambda(k);
    const double cand = cand_sw / (p_sum + cand_sinv);
    if (level > 0.0 && !(cand < weights(k) * lambda(k))) break;
    sw = cand_sw;
    sinv = cand_sinv;
    level = cand;
  }
  out.water_level = level;
  for (int k : order) {
    out.q(k) = std::max(0.0, weights(k) / level - 1.0 / lambda(k));
  }
  return out;
}

namespace {

struct DualState {
  const Vector& w;
  const Vector& lambda;
  const Vector& mu;
  const Matrix& theta;

  // Per-group price sum_m lambda_m theta_{m,k}, skipping zero entries so an
  // infinite multiplier on an unrelated BS does not produce NaN.
  double price(const Vector& lam, int k) const {
    double s = 0.0;
    for (int m = 0; m < theta.rows(); ++m) {
      if (theta(m, k) > 0.0) s += lam(m) * theta(m, k);
    }
    return s;
  }

  double q_of(const Vector& lam, int k) const {
    if (!(mu(k) > 0.0) || !(lambda(k) > 0.0) || !(w(k) > 0.0)) return 0.0;
    const double p = price(lam, k);
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    return std::max(0.0, w(k) * mu(k) / p - 1.0 / lambda(k));
  }

  Vector q_all(const Vector& lam) const {
    Vector q(lambda.size());
    for (int k = 0; k < lambda.size(); ++k) q(k) = q_of(lam, k);
    return q;
  }

  double demand(const Vector& lam, int m) const {
    double d = 0.0;
    for (int k = 0; k < lambda.size(); ++k) {
      if (theta(m, k) > 0.0) d += theta(m, k) * q_of(lam, k);
    }
    return d;
  }
};

}  // namespace

PowerAllocation waterfill_perbs(const Vector& weights, const Vector& lambda, const Vector& mu,
                                const Matrix& theta, const Vector& power,
                                const PerBsOptions& options) {
  check_sizes(weights, lambda, mu);
  const int B = static_cast<int>(theta.rows());
  const int A = static_cast<int>(lambda.size());
  if (theta.cols() != A || power.size() != B) {
    throw ConfigError("waterfill_perbs: theta must be B x A and power length B");
  }
  if ((power.array() < 0.0).any() || (theta.array() < 0.0).any()) {
    throw ConfigError("waterfill_perbs: powers and theta must be non-negative");
  }

  const DualState dual{weights, lambda, mu, theta};
  PowerAllocation out;
  out.mode = ConstraintMode::kPerBs;

  // Start from the sum-power level shared by all BSs.
  const PowerAllocation sum = waterfill_sum(weights, lambda, mu, power.sum());
  Vector lam = Vector::Constant(B, std::isnan(sum.water_level) ? 1.0 : sum.water_level);
  for (int m = 0; m < B; ++m) {
    if (power(m) == 0.0) lam(m) = std::numeric_limits<double>::infinity();
  }

  auto violation = [&](const Vector& l) {
    double worst = 0.0;
    for (int m = 0; m < B; ++m) {
      const double d = dual.demand(l, m);
      const double scale = std::max(1.0, power(m));
      double v = std::max(0.0, d - power(m));
      if (l(m) > 0.0 && std::isfinite(l(m))) v = std::max(v, std::abs(d - power(m)));
      worst = std::max(worst, v / scale);
    }
    return worst;
  };

  // Cyclic exact minimization of the dual along each multiplier. The BS
  // demand is non-increasing in its own multiplier, so each step is a
  // one-dimensional root find.
  double viol = violation(lam);
  int sweep = 0;
  for (; sweep < options.max_sweeps && viol > options.tol; ++sweep) {
    for (int m = 0; m < B; ++m) {
      if (power(m) == 0.0) continue;
      Vector probe = lam;
      probe(m) = 0.0;
      if (dual.demand(probe, m) <= power(m)) {
        lam(m) = 0.0;
        continue;
      }
      double hi = std::max(lam(m), 1e-300);
      double mass = 0.0;
      for (int k = 0; k < A; ++k) {
        if (theta(m, k) > 0.0) mass += weights(k) * mu(k);
      }
      hi = std::max(hi, mass / power(m));
      double lo = 0.0;
      probe(m) = hi;
      while (dual.demand(probe, m) > power(m)) {
        lo = hi;
        hi *= 2.0;
        probe(m) = hi;
      }
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        probe(m) = mid;
        if (dual.demand(probe, m) > power(m)) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      lam(m) = hi;  // feasible side
    }
    viol = violation(lam);
  }
  out.iterations = sweep;
  out.bs_multipliers = lam;

  // Feasible primal point: shrink q(lambda) uniformly if any BS is over budget.
  Vector q = dual.q_all(lam);
  double shrink = 1.0;
  for (int m = 0; m < B; ++m) {
    const double d = theta.row(m).dot(q);
    if (d > power(m)) shrink = std::min(shrink, power(m) / d);
  }
  out.q = q * shrink;

  const double primal = weighted_sum_rate(weights, lambda, out.q, mu);
  double dual_value = weighted_sum_rate(weights, lambda, q, mu);
  for (int m = 0; m < B; ++m) {
    if (lam(m) > 0.0 && std::isfinite(lam(m))) {
      dual_value -= lam(m) * (theta.row(m).dot(q) - power(m));
    }
  }
  out.duality_gap = dual_value - primal;

  if (viol > options.tol) {
    throw PerBsConvergenceError("waterfill_perbs: dual iteration did not converge", viol, out);
  }
  return out;
}

RatePoint group_rates(const Vector& lambda, const Vector& q, const Vector& mu, LogBase base) {
  if (lambda.size() != q.size() || mu.size() != q.size()) {
    throw ConfigError("group_rates: length mismatch");
  }
  if ((q.array() < 0.0).any()) throw ConfigError("group_rates: negative power");
  RatePoint r;
  r.rate.resize(q.size());
  for (int k = 0; k < q.size(); ++k) r.rate(k) = nats_to(base, std::log1p(lambda(k) * q(k)));
  r.throughput = mu.cwiseProduct(r.rate);
  return r;
}

double weighted_sum_rate(const Vector& weights, const Vector& lambda, const Vector& q,
                         const Vector& mu) {
  double s = 0.0;
  for (int k = 0; k < q.size(); ++k) {
    if (mu(k) > 0.0 && weights(k) != 0.0) s += weights(k) * mu(k) * std::log1p(lambda(k) * q(k));
  }
  return s;
}

}  // namespace netmimo
