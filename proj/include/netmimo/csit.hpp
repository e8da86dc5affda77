#pragma once

#include "netmimo/allocation.hpp"
#include "netmimo/geometry.hpp"
#include "netmimo/scheduler.hpp"

namespace netmimo {

struct TrainingConfig {
  bool perfect = false;  // genie CSIT with no pilot cost
  double gamma_p = 0.0;  // pilot ratio; <= 0 means gamma_p = gamma
  double tau = 0.0;      // N / (W T)

  double pilot_ratio(double gamma) const { return gamma_p > 0.0 ? gamma_p : gamma; }
};

/// p = (gamma_p / gamma) * sum_m P_m. Throws ConfigError if gamma_p < gamma.
double training_power(const TrainingConfig& config, double gamma, const Vector& power);

/// Squared estimate / estimation-error gains, elementwise.
struct EffectiveGains {
  Matrix beta_hat_sq;  // p beta^4 / (1 + p beta^2)
  Matrix beta_bar_sq;  // beta^2 / (1 + p beta^2)
};

EffectiveGains effective_gains(const Matrix& beta, double p);

/// 1 + sum_m beta_bar^2_{m,k} P_m for every group.
Vector interference_terms(const Matrix& beta_bar_sq, const Vector& power);

/// Problem with beta_hat in place of beta.
ClusterProblem estimated_problem(const ClusterProblem& problem, const EffectiveGains& gains);

/// Problem whose perfect-CSIT rates equal the training lower bound:
/// beta_eff^2 = beta_hat^2 / (1 + I_k). The fixed point is invariant to a
/// per-group scaling of the gains, so Lambda scales by 1/(1 + I_k) and theta
/// is unchanged.
ClusterProblem trained_problem(const ClusterProblem& problem, const EffectiveGains& gains);

/// R_k = log(1 + Lambda_hat_k q_k / (1 + sum_m beta_bar^2 P_m)), Lambda_hat from
/// the estimated problem.
RatePoint lower_bound_rates(const ClusterProblem& estimated, const Vector& mu, const Vector& q,
                            const Matrix& beta_bar_sq, const Vector& power,
                            LogBase base = LogBase::kNats);

/// [1 - gamma_p B tau]_+.
double overhead_factor(const TrainingConfig& config, double gamma, int num_bs);

enum class Fairness { kWeightedSum, kProportionalFair };

struct SpectralEfficiency {
  double overhead = 1.0;
  double cluster_sum_rate = 0.0;  // nats per channel use, overhead applied
  double cell_sum_rate = 0.0;     // cluster / B
  Vector throughput;               // per group (per class when reduced), no overhead
  bool used_symmetry = false;
};

struct SpectralOptions {
  Fairness fairness = Fairness::kProportionalFair;
  Vector weights;  // weighted-sum only; empty means all ones
  GreedyOptions greedy;
  PfOptions pf;
  bool use_symmetry = true;
};

/// Throughput of the training-corrected problem under the chosen fairness
/// rule, scaled by the overhead factor. Circulant clusters with class-constant
/// weights are solved on their single-BS reduction.
SpectralEfficiency effective_spectral_efficiency(const ClusterProblem& problem,
                                                 const TrainingConfig& config,
                                                 const SpectralOptions& options = {});

}  // namespace netmimo
