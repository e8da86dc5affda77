#pragma once

#include "netmimo/allocation.hpp"
#include "netmimo/asymptotic.hpp"
#include "netmimo/geometry.hpp"

#include <vector>

namespace netmimo {

/// Optimal powers and gains for one fixed fraction vector.
struct FractionEvaluation {
  double objective = 0.0;  // sum_k W_k mu_k log(1 + Lambda_k q_k), nats
  Vector eta;
  Vector lambda;
  Matrix theta;  // filled in per-BS mode only
  PowerAllocation allocation;
};

FractionEvaluation evaluate_fractions(const ClusterProblem& problem, const Vector& weights,
                                      const Vector& mu, ConstraintMode mode);

struct GreedyOptions {
  double delta_mu = 0.01;
  ConstraintMode mode = ConstraintMode::kSum;
  // Keep adding users after the objective stops improving (traces the whole load range).
  bool full_sweep = false;
  // Single-BS sum-power problems: closed-form eta and a waterfilling order
  // fixed once per call (eta is common to all groups).
  bool single_bs_fast_path = true;
};

struct GreedyResult {
  Vector mu;
  PowerAllocation allocation;
  RatePoint rates;  // nats
  double objective = 0.0;
  Vector lambda;
  // One entry per accepted step, starting with the empty system.
  std::vector<double> trace_objective;
  std::vector<double> trace_mu_total;
};

/// Adds delta_mu of users to one group at a time, always to the group giving
/// the largest weighted sum rate; ties go to the lowest group index.
GreedyResult greedy_fractions(const ClusterProblem& problem, const Vector& weights,
                              const GreedyOptions& options = {});

enum class UtilityKind { kProportionalFair, kAlphaFair, kWeightedSum };

struct UtilityConfig {
  UtilityKind kind = UtilityKind::kProportionalFair;
  double alpha = 1.0;  // alpha-fair only
  double v = 1000.0;
  double a_max = 0.0;  // <= 0 selects default_a_max()
  int horizon = 1000;
  int warm_start = 10;  // slots with unit weights before queue weights kick in
  Vector weights;       // weighted-sum only; empty means all ones

  void validate(int num_groups) const;
};

/// 2 log(1 + gamma * max beta^2 * P_sum).
double default_a_max(const ClusterProblem& problem);

/// (A/2)(a_max^2 + log^2(1 + gamma * max beta^2 * P_sum)).
double drift_constant(const ClusterProblem& problem, double a_max);

/// Arrival rates maximizing V g(a) - Q^T a over 0 <= a <= a_max.
Vector utility_subproblem(const Vector& queues, const UtilityConfig& config);

/// g evaluated at a throughput vector.
double utility_value(const Vector& throughput, const UtilityConfig& config);

struct VirtualQueueState {
  Vector queues;
  int t = 0;
  Vector running_rate_avg;
};

struct NumResult {
  Vector avg_throughput;  // time average of the served group throughputs
  Vector avg_arrival;
  double utility = 0.0;   // g(avg_throughput)
  VirtualQueueState state;
};

NumResult num_iterate(const ClusterProblem& problem, const UtilityConfig& config,
                      const GreedyOptions& fraction_options);

struct PfOptions {
  int iterations = 400;
  double tol = 1e-4;  // stop once the certified utility gap drops below this
};

struct PfResult {
  Vector throughput;  // time-sharing mixture of greedy schedules
  double utility = 0.0;
  double gap_bound = 0.0;  // utility gap bound over the hull of the schedules found
  int iterations = 0;
  // The mixture: fractions of each schedule used and their time shares.
  std::vector<Vector> schedules;
  std::vector<double> shares;
};

/// Proportional-fair throughput over the time-sharing hull of greedy
/// schedules. Each round runs the greedy with W = 1/Rbar and adds its schedule
/// to a cache; pairwise (toward/away) steps with exact line search then
/// re-balance the mixture over the cache. Starts from the average of the
/// single-group-weight schedules.
PfResult pf_operating_point(const ClusterProblem& problem, const GreedyOptions& options,
                            const PfOptions& pf = {});

/// W_k = 1 / Rbar_k.
Vector pf_weights(const Vector& avg_rates);

}  // namespace netmimo
