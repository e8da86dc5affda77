#include "netmimo/asymptotic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace netmimo {

void validate_fractions(const ClusterProblem& problem, const Vector& mu) {
  if (mu.size() != problem.num_groups()) {
    std::ostringstream os;
    os << "user fractions: expected " << problem.num_groups() << " entries, got " << mu.size();
    throw ConfigError(os.str());
  }
  if ((mu.array() < 0.0).any() || (mu.array() > 1.0).any() || !mu.allFinite()) {
    throw ConfigError("user fractions must lie in [0, 1]");
  }
  const double cap = problem.gamma * problem.num_bs();
  if (mu.sum() > cap - kLoadMargin) {
    std::ostringstream os;
    os << "infeasible user fractions: total load " << mu.sum()
       << " must stay below gamma*B = " << cap;
    throw ConfigError(os.str());
  }
}

namespace {

struct MapEval {
  Vector value;   // F(eta)
  Matrix jacobian;
};

MapEval eval_map(const Matrix& b2, double gamma, const Vector& mu, const Vector& eta,
                 bool with_jacobian) {
  const int B = static_cast<int>(b2.rows());
  const int A = static_cast<int>(b2.cols());
  const Vector lambda = gamma * (b2.transpose() * eta);
  Vector s = Vector::Zero(B);
  for (int q = 0; q < A; ++q) {
    if (mu(q) > 0.0) s += (mu(q) / lambda(q)) * b2.col(q);
  }
  MapEval out;
  out.value = (1.0 + s.array()).inverse().matrix();
  if (with_jacobian) {
    // dF_m/deta_l = F_m^2 sum_q mu_q gamma beta^2_{m,q} beta^2_{l,q} / Lambda_q^2
    Vector w = Vector::Zero(A);
    for (int q = 0; q < A; ++q) {
      if (mu(q) > 0.0) w(q) = gamma * mu(q) / (lambda(q) * lambda(q));
    }
    out.jacobian = out.value.array().square().matrix().asDiagonal() *
                   (b2 * w.asDiagonal() * b2.transpose());
  }
  return out;
}

}  // namespace

Vector eta_map(const ClusterProblem& problem, const Vector& mu, const Vector& eta) {
  return eval_map(problem.beta_squared(), problem.gamma, mu, eta, false).value;
}

EtaSolution solve_eta(const ClusterProblem& problem, const Vector& mu,
                      const EtaOptions& options, const Vector* start) {
  validate_fractions(problem, mu);
  const Matrix b2 = problem.beta_squared();
  const int B = problem.num_bs();

  EtaSolution sol;
  sol.eta = start ? *start : Vector::Ones(B);
  if (sol.eta.size() != B || (sol.eta.array() <= 0.0).any() || (sol.eta.array() > 1.0).any()) {
    throw ConfigError("solve_eta: start point must lie in (0,1]^B");
  }

  // Newton on eta - F(eta), accepted only while the iterate stays an upper
  // solution (F(eta) <= eta); those points lie above the positive fixed point.
  MapEval cur = eval_map(b2, problem.gamma, mu, sol.eta, true);
  for (int it = 0; it < options.max_iter; ++it) {
    const Vector defect = cur.value - sol.eta;
    sol.residual = defect.cwiseAbs().maxCoeff();
    sol.iterations = it;
    if (sol.residual <= options.tol) return sol;

    const Matrix jac = Matrix::Identity(B, B) - cur.jacobian;
    const Vector step = jac.partialPivLu().solve(defect);
    const Vector trial = sol.eta + step;
    bool accepted = false;
    if (step.allFinite() && (trial.array() > 0.0).all() &&
        (trial.array() <= 1.0 + 1e-15).all()) {
      MapEval next = eval_map(b2, problem.gamma, mu, trial.cwiseMin(1.0), true);
      const Vector next_defect = next.value - trial.cwiseMin(1.0);
      const double slack = std::max(options.tol, 1e-15);
      if ((next_defect.array() <= slack).all() &&
          next_defect.cwiseAbs().maxCoeff() < sol.residual) {
        sol.eta = trial.cwiseMin(1.0);
        cur = std::move(next);
        accepted = true;
      }
    }
    if (!accepted) {
      sol.eta = (1.0 - options.damping) * sol.eta + options.damping * cur.value;
      cur = eval_map(b2, problem.gamma, mu, sol.eta, true);
    }
  }
  sol.residual = (cur.value - sol.eta).cwiseAbs().maxCoeff();
  if (sol.residual <= options.tol) return sol;
  throw NumericalError("solve_eta: fixed point did not converge", sol.residual);
}

Vector lambda_gains(const ClusterProblem& problem, const Vector& /*mu*/, const Vector& eta) {
  return problem.gamma * (problem.beta_squared().transpose() * eta);
}

double lambda_consistency_defect(const ClusterProblem& problem, const Vector& mu,
                                 const Vector& lambda) {
  const Matrix b2 = problem.beta_squared();
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  double worst = 0.0;
  for (int k = 0; k < A; ++k) {
    double rhs = 0.0;
    for (int m = 0; m < B; ++m) {
      double s = 0.0;
      for (int q = 0; q < A; ++q) {
        if (mu(q) > 0.0) s += mu(q) * b2(m, q) / lambda(q);
      }
      rhs += b2(m, k) / (1.0 + s);
    }
    rhs *= problem.gamma;
    worst = std::max(worst, std::abs(rhs - lambda(k)) / std::max(std::abs(lambda(k)), 1e-300));
  }
  return worst;
}

SymmetricSolution eta_lambda_symmetric(const ClusterProblem& problem,
                                       const EquivalenceClasses& classes,
                                       const Vector& mu_prime) {
  if (!classes.is_symmetric) {
    throw ConfigError("eta_lambda_symmetric: problem is not symmetric");
  }
  if (mu_prime.size() != classes.a_prime) {
    throw ConfigError("eta_lambda_symmetric: expected one fraction per class");
  }
  if ((mu_prime.array() < 0.0).any() || (mu_prime.array() > 1.0).any()) {
    throw ConfigError("eta_lambda_symmetric: class fractions must lie in [0, 1]");
  }
  const double load = mu_prime.sum() / problem.gamma;  // mu / (gamma B)
  if (load > 1.0 + 1e-12) {
    throw ConfigError("eta_lambda_symmetric: class fractions exceed gamma");
  }
  const double eta = std::max(0.0, 1.0 - load);
  SymmetricSolution out;
  out.eta.eta = Vector::Constant(problem.num_bs(), eta);
  out.lambda = problem.gamma * eta * problem.beta_squared().colwise().sum().transpose();
  return out;
}

ThetaMatrix solve_theta(const ClusterProblem& problem, const Vector& mu,
                        const Vector& eta, const Vector& lambda) {
  const Matrix b2 = problem.beta_squared();
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  std::vector<int> active;
  for (int k = 0; k < A; ++k) {
    if (mu(k) > 0.0) {
      if (!(lambda(k) > 0.0)) {
        throw NumericalError("solve_theta: active group with non-positive gain");
      }
      active.push_back(k);
    }
  }
  ThetaMatrix out;
  out.theta = Matrix::Zero(B, A);
  out.xi = Matrix::Zero(B, A);
  const int n = static_cast<int>(active.size());
  if (n == 0) return out;

  Matrix ba(B, n);  // b_l restricted to active groups, one row per BS
  Vector weight(n);
  for (int j = 0; j < n; ++j) {
    ba.col(j) = b2.col(active[j]);
    weight(j) = mu(active[j]) / (lambda(active[j]) * lambda(active[j]));
  }
  const Matrix gram = ba.transpose() * eta.array().square().matrix().asDiagonal() * ba;
  const Matrix m_mat = gram * weight.asDiagonal();
  const Matrix system = Matrix::Identity(n, n) - problem.gamma * m_mat;
  Eigen::PartialPivLU<Matrix> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    throw NumericalError("solve_theta: I - gamma*M is numerically singular", rcond);
  }
  const Matrix rhs = problem.gamma * m_mat * ba.transpose();  // column m is gamma M b_m
  const Matrix xi = lu.solve(rhs);                             // n x B
  for (int j = 0; j < n; ++j) {
    const int k = active[j];
    const double denom = b2.col(k).dot(eta);
    for (int m = 0; m < B; ++m) {
      out.xi(m, k) = xi(j, m);
      out.theta(m, k) = mu(k) * eta(m) * eta(m) * (b2(m, k) + xi(j, m)) / denom;
    }
  }
  return out;
}

ThetaMatrix solve_theta(const ClusterProblem& problem, const Vector& mu) {
  const EtaSolution eta = solve_eta(problem, mu);
  return solve_theta(problem, mu, eta.eta, lambda_gains(problem, mu, eta.eta));
}

CirculantDefect check_circulant_theta(const Matrix& theta, const EquivalenceClasses& classes,
                          const Vector* q) {
  if (!classes.is_symmetric) {
    throw ConfigError("check_circulant_theta: classes are not symmetric");
  }
  const int B = static_cast<int>(theta.rows());
  CirculantDefect out;
  for (int j = 0; j < B; ++j) {
    for (int m = 0; m < B; ++m) {
      for (int i = 0; i < classes.a_prime; ++i) {
        for (int jj = 0; jj < B; ++jj) {
          const int k = classes.member[jj][i];
          const int shifted = classes.member[(jj + j) % B][i];
          out.shift = std::max(out.shift, std::abs(theta((m + j) % B, k) - theta(m, shifted)));
        }
      }
    }
  }
  if (q) {
    const Vector per_bs = theta * (*q);
    out.power_spread = per_bs.maxCoeff() - per_bs.minCoeff();
  }
  return out;
}

}  // namespace netmimo
