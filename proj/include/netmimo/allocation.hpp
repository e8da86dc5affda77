#pragma once

#include "netmimo/common.hpp"

namespace netmimo {

enum class ConstraintMode { kSum, kPerBs };

struct PowerAllocation {
  Vector q;  // per-user power, uniform within a group
  ConstraintMode mode = ConstraintMode::kSum;
  // Sum mode: the water level (NaN when no group is served).
  double water_level = std::numeric_limits<double>::quiet_NaN();
  // Per-BS mode: one multiplier per BS.
  Vector bs_multipliers;
  double duality_gap = 0.0;
  int iterations = 0;
};

struct RatePoint {
  Vector rate;        // R_k
  Vector throughput;  // mu_k R_k
};

/// Maximizes sum_k W_k mu_k log(1 + Lambda_k q_k) subject to sum_k mu_k q_k <= p_sum.
PowerAllocation waterfill_sum(const Vector& weights, const Vector& lambda, const Vector& mu,
                              double p_sum);

struct PerBsOptions {
  double tol = 1e-9;  // relative constraint tolerance
  int max_sweeps = 20000;
};

/// Same objective under sum_k q_k theta_{m,k} <= P_m for every BS m, solved in the dual.
PowerAllocation waterfill_perbs(const Vector& weights, const Vector& lambda, const Vector& mu,
                                const Matrix& theta, const Vector& power,
                                const PerBsOptions& options = {});

/// Thrown by waterfill_perbs when the dual does not settle; holds the best
/// feasible allocation seen.
class PerBsConvergenceError : public NumericalError {
 public:
  PerBsConvergenceError(const std::string& what, double residual, PowerAllocation best)
      : NumericalError(what, residual), best_(std::move(best)) {}
  const PowerAllocation& best() const { return best_; }

 private:
  PowerAllocation best_;
};

RatePoint group_rates(const Vector& lambda, const Vector& q, const Vector& mu,
                      LogBase base = LogBase::kNats);

/// sum_k W_k mu_k log(1 + Lambda_k q_k), in nats.
double weighted_sum_rate(const Vector& weights, const Vector& lambda, const Vector& q,
                         const Vector& mu);

}  // namespace netmimo
