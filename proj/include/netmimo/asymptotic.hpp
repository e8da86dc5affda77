#pragma once

#include "netmimo/common.hpp"
#include "netmimo/geometry.hpp"

namespace netmimo {

/// Total load must stay this far below gamma * B (ZF full-rank margin).
inline constexpr double kLoadMargin = 1e-6;

/// Throws ConfigError unless 0 <= mu_k <= 1 and sum(mu) <= gamma*B - kLoadMargin.
void validate_fractions(const ClusterProblem& problem, const Vector& mu);

struct EtaOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  // Relaxation of the plain fixed-point step, used whenever a Newton step is rejected.
  double damping = 0.5;
};

struct EtaSolution {
  Vector eta;
  double residual = 0.0;  // max |F(eta) - eta|
  int iterations = 0;
};

/// Right-hand side of eta_m = 1 / (1 + sum_q mu_q beta^2_{m,q} / (gamma sum_l eta_l beta^2_{l,q})).
Vector eta_map(const ClusterProblem& problem, const Vector& mu, const Vector& eta);

/// Unique solution of the per-BS fixed point in (0,1]^B. Starts from eta = 1 unless
/// `start` is given. Throws NumericalError (carrying the residual) on non-convergence.
EtaSolution solve_eta(const ClusterProblem& problem, const Vector& mu,
                      const EtaOptions& options = {}, const Vector* start = nullptr);

/// Lambda_k = gamma * sum_m beta^2_{m,k} eta_m.
Vector lambda_gains(const ClusterProblem& problem, const Vector& mu, const Vector& eta);

/// Max relative defect of Lambda in the A-variable form
/// Lambda_k = gamma sum_m beta^2_{m,k} / (1 + sum_q mu_q beta^2_{m,q} / Lambda_q).
double lambda_consistency_defect(const ClusterProblem& problem, const Vector& mu,
                                 const Vector& lambda);

struct SymmetricSolution {
  EtaSolution eta;
  Vector lambda;  // per group, length A
};

/// Closed form for circulant clusters: eta_m = 1 - mu/(gamma B) with mu = B sum_i mu'_i.
SymmetricSolution eta_lambda_symmetric(const ClusterProblem& problem,
                                       const EquivalenceClasses& classes,
                                       const Vector& mu_prime);

struct ThetaMatrix {
  Matrix theta;  // B x A, fraction of BS m power spent on group k (per unit q_k)
  Matrix xi;     // B x A auxiliary solution of the linear system
};

/// Large-system per-BS power coefficients. Groups with mu_k = 0 get zero columns.
/// Throws NumericalError when I - gamma*M is numerically singular.
ThetaMatrix solve_theta(const ClusterProblem& problem, const Vector& mu,
                        const Vector& eta, const Vector& lambda);

/// Convenience: eta, Lambda and theta in one call.
ThetaMatrix solve_theta(const ClusterProblem& problem, const Vector& mu);

struct CirculantDefect {
  double shift = 0.0;         // max |theta_{m+j, k} - theta_{m, k shifted by j}|
  double power_spread = 0.0;  // max_m sum_k q_k theta_{m,k} - min_m (...)
};

CirculantDefect check_circulant_theta(const Matrix& theta, const EquivalenceClasses& classes,
                          const Vector* q = nullptr);

}  // namespace netmimo
