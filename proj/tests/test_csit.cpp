#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "netmimo/csit.hpp"
#include "test_support.hpp"

#include <random>

using namespace netmimo;

TEST_CASE("training power") {
  TrainingConfig c;
  const Vector two = Vector::Constant(2, 7.0);
  CHECK(training_power(c, 4.0, two) == doctest::Approx(14.0));
  c.gamma_p = 8.0;
  CHECK(training_power(c, 4.0, Vector::Constant(1, 7.0)) == doctest::Approx(14.0));
  const double p = training_power(TrainingConfig{}, 4.0, Vector::Constant(2, db_to_linear(154.0)));
  CHECK(linear_to_db(p) == doctest::Approx(154.0 + 10.0 * std::log10(2.0)).epsilon(1e-12));
  c.gamma_p = 2.0;
  CHECK_THROWS_AS(training_power(c, 4.0, two), ConfigError);
}

TEST_CASE("effective gains") {
  const EffectiveGains g = effective_gains(Matrix::Constant(1, 1, 1.5), 10.0);
  CHECK(g.beta_hat_sq(0, 0) == doctest::Approx(5.0625 / 2.35).epsilon(1e-14));
  CHECK(g.beta_bar_sq(0, 0) == doctest::Approx(2.25 / 23.5).epsilon(1e-14));

  const EffectiveGains hi = effective_gains(Matrix::Constant(1, 1, 1.5), 1e12);
  CHECK(std::abs(std::sqrt(hi.beta_hat_sq(0, 0)) / 1.5 - 1.0) < 1e-6);
  CHECK(hi.beta_bar_sq(0, 0) < 1e-11);
  const EffectiveGains lo = effective_gains(Matrix::Constant(1, 1, 1.5), 1e-12);
  CHECK(lo.beta_hat_sq(0, 0) < 1e-11);
  CHECK(std::abs(lo.beta_bar_sq(0, 0) / 2.25 - 1.0) < 1e-11);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 10000; ++i) {
    const double b = std::pow(10.0, u(rng) / 2.0);
    const double p = std::pow(10.0, 2.0 * u(rng));
    const EffectiveGains e = effective_gains(Matrix::Constant(1, 1, b), p);
    CHECK(std::abs((e.beta_hat_sq(0, 0) + e.beta_bar_sq(0, 0)) / (b * b) - 1.0) <= 1e-12);
    CHECK(e.beta_hat_sq(0, 0) <= b * b);
  }
}

TEST_CASE("interference term") {
  const Matrix bar = (Matrix(2, 1) << 0.1, 0.2).finished();
  CHECK(interference_terms(bar, Vector::Constant(2, 10.0))(0) == doctest::Approx(4.0));
}

TEST_CASE("lower bound tends to perfect CSIT") {
  const ClusterProblem ex = testing::example1_problem();
  const Vector mu = testing::example1_mu();
  const Vector lam = lambda_gains(ex, mu, solve_eta(ex, mu).eta);
  const PowerAllocation q = waterfill_sum(Vector::Ones(8), lam, mu, ex.total_power());
  const RatePoint perfect = group_rates(lam, q.q, mu);

  // zero error: beta_bar = 0 and beta_hat = beta
  const RatePoint same = lower_bound_rates(ex, mu, q.q, Matrix::Zero(2, 8), ex.power);
  CHECK((same.rate - perfect.rate).cwiseAbs().maxCoeff() < 1e-12);

  const EffectiveGains g = effective_gains(ex.beta, 1e12);
  const RatePoint bound = lower_bound_rates(estimated_problem(ex, g), mu, q.q, g.beta_bar_sq, ex.power);
  CHECK(((bound.rate - perfect.rate).array().abs() / perfect.rate.array()).maxCoeff() < 1e-4);

  for (double p : {1.0, 10.0, 1e3}) {
    const EffectiveGains gp = effective_gains(ex.beta, p);
    const RatePoint b = lower_bound_rates(estimated_problem(ex, gp), mu, q.q, gp.beta_bar_sq, ex.power);
    CHECK((b.rate.array() <= perfect.rate.array() + 1e-9).all());
    // the scaled-gain shortcut gives the same rates
    const ClusterProblem t = trained_problem(ex, gp);
    const Vector lt = lambda_gains(t, mu, solve_eta(t, mu).eta);
    CHECK((group_rates(lt, q.q, mu).rate - b.rate).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("overhead factor") {
  TrainingConfig c;
  c.gamma_p = 16.0;
  c.tau = 1.0 / 64.0;
  CHECK(overhead_factor(c, 16.0, 2) == doctest::Approx(0.5));
  c.tau = 0.0;
  CHECK(overhead_factor(c, 16.0, 2) == 1.0);
  c.tau = 1.0 / 16.0;
  CHECK(overhead_factor(c, 16.0, 2) == 0.0);
  c.tau = 1.0 / 100.0;
  double prev = 1.0;
  for (int B = 1; B <= 6; ++B) {
    const double f = overhead_factor(c, 16.0, B);
    CHECK(f <= prev);
    prev = f;
  }
}

TEST_CASE("spectral efficiency without training cost equals perfect CSIT") {
  const ClusterProblem ex = testing::example1_problem();
  TrainingConfig c;
  c.perfect = true;
  SpectralOptions o;
  o.fairness = Fairness::kWeightedSum;
  o.greedy.delta_mu = 0.05;
  o.use_symmetry = false;
  const SpectralEfficiency s = effective_spectral_efficiency(ex, c, o);
  CHECK_FALSE(s.used_symmetry);
  const GreedyResult g = greedy_fractions(ex, Vector::Ones(8), o.greedy);
  CHECK(s.cluster_sum_rate == doctest::Approx(g.rates.throughput.sum()).epsilon(1e-6));
  CHECK(s.cell_sum_rate == doctest::Approx(s.cluster_sum_rate / 2.0));

  // tau = 0 and huge training power approach the same value
  TrainingConfig t;
  const SpectralEfficiency trained = effective_spectral_efficiency(
      problem_from_beta_squared(ex.beta_squared(), 4.0, Vector::Constant(2, 1e9)), t, o);
  const SpectralEfficiency ideal = effective_spectral_efficiency(
      problem_from_beta_squared(ex.beta_squared(), 4.0, Vector::Constant(2, 1e9)), c, o);
  CHECK(trained.cluster_sum_rate <= ideal.cluster_sum_rate);
}

TEST_CASE("PF operating point on a symmetric reduction matches the full cluster") {
  const ClusterProblem ex = testing::example1_problem(10.0);
  TrainingConfig c;
  c.perfect = true;
  SpectralOptions o;
  o.greedy.delta_mu = 0.1;
  o.pf.iterations = 100;
  const SpectralEfficiency reduced = effective_spectral_efficiency(ex, c, o);
  o.use_symmetry = false;
  const SpectralEfficiency full = effective_spectral_efficiency(ex, c, o);
  CHECK(reduced.used_symmetry);
  CHECK_FALSE(full.used_symmetry);
  CHECK(reduced.cluster_sum_rate == doctest::Approx(full.cluster_sum_rate).epsilon(0.02));
}
