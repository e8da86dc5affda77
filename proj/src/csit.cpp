#include "netmimo/csit.hpp"

#include <algorithm>

namespace netmimo {

double training_power(const TrainingConfig& config, double gamma, const Vector& power) {
  if (!(gamma > 0.0)) throw ConfigError("training: gamma must be positive");
  const double gp = config.pilot_ratio(gamma);
  if (gp < gamma) throw ConfigError("training: gamma_p must be >= gamma");
  return gp / gamma * power.sum();
}

EffectiveGains effective_gains(const Matrix& beta, double p) {
  if (!(p > 0.0)) throw ConfigError("effective_gains: training power must be positive");
  const Eigen::ArrayXXd b2 = beta.array().square();
  const Eigen::ArrayXXd x = p * b2;
  EffectiveGains g;
  // x / (1 + x) rounds to at most 1, so beta_hat^2 never exceeds beta^2
  g.beta_hat_sq = (b2 * (x / (1.0 + x))).matrix();
  g.beta_bar_sq = (b2 / (1.0 + x)).matrix();
  return g;
}

Vector interference_terms(const Matrix& beta_bar_sq, const Vector& power) {
  if (power.size() != beta_bar_sq.rows()) {
    throw ConfigError("interference_terms: power length must equal the BS count");
  }
  return (1.0 + (beta_bar_sq.transpose() * power).array()).matrix();
}

ClusterProblem estimated_problem(const ClusterProblem& problem, const EffectiveGains& gains) {
  ClusterProblem p = problem;
  p.beta = gains.beta_hat_sq.array().sqrt().matrix();
  p.validate();
  return p;
}

ClusterProblem trained_problem(const ClusterProblem& problem, const EffectiveGains& gains) {
  const Vector inter = interference_terms(gains.beta_bar_sq, problem.power);
  ClusterProblem p = problem;
  p.beta = (gains.beta_hat_sq * inter.cwiseInverse().asDiagonal()).array().sqrt().matrix();
  p.validate();
  return p;
}

RatePoint lower_bound_rates(const ClusterProblem& estimated, const Vector& mu, const Vector& q,
                            const Matrix& beta_bar_sq, const Vector& power, LogBase base) {
  const EtaSolution eta = solve_eta(estimated, mu);
  const Vector lam_hat = lambda_gains(estimated, mu, eta.eta);
  const Vector inter = interference_terms(beta_bar_sq, power);
  return group_rates(lam_hat.cwiseQuotient(inter), q, mu, base);
}

double overhead_factor(const TrainingConfig& config, double gamma, int num_bs) {
  if (config.perfect) return 1.0;
  if (config.tau < 0.0) throw ConfigError("training: tau must be non-negative");
  return std::max(0.0, 1.0 - config.pilot_ratio(gamma) * num_bs * config.tau);
}

SpectralEfficiency effective_spectral_efficiency(const ClusterProblem& problem,
                                                 const TrainingConfig& config,
                                                 const SpectralOptions& options) {
  SpectralEfficiency out;
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  ClusterProblem eff = problem;
  if (!config.perfect) {
    const double p = training_power(config, problem.gamma, problem.power);
    eff = trained_problem(problem, effective_gains(problem.beta, p));
  }
  out.overhead = overhead_factor(config, problem.gamma, B);
  Vector w = options.weights.size() ? options.weights : Vector::Ones(A);
  if (w.size() != A) throw ConfigError("spectral efficiency: one weight per group expected");

  ClusterProblem target = eff;
  double scale = 1.0;  // cluster throughput per unit of target throughput
  if (options.use_symmetry && options.greedy.mode == ConstraintMode::kSum) {
    const EquivalenceClasses classes = detect_symmetry(eff);
    bool class_weights = classes.is_symmetric;
    if (class_weights && options.fairness == Fairness::kWeightedSum) {
      for (int k = 0; k < A; ++k) {
        if (w(k) != w(classes.member[0][classes.class_of[k]])) class_weights = false;
      }
    }
    if (class_weights) {
      Vector wr(classes.a_prime);
      for (int i = 0; i < classes.a_prime; ++i) wr(i) = w(classes.member[0][i]);
      w = wr;
      target = reduce_symmetric(eff, classes);
      scale = B;
      out.used_symmetry = true;
    }
  }
  if (options.fairness == Fairness::kWeightedSum) {
    out.throughput = greedy_fractions(target, w, options.greedy).rates.throughput;
  } else {
    out.throughput = pf_operating_point(target, options.greedy, options.pf).throughput;
  }
  out.cluster_sum_rate = out.overhead * scale * out.throughput.sum();
  out.cell_sum_rate = out.cluster_sum_rate / B;
  return out;
}

}  // namespace netmimo
