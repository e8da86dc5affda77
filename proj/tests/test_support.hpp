#pragma once

#include "netmimo/geometry.hpp"

#include <random>

namespace netmimo::testing {

// Two-BS, eight-group symmetric system; entries are squared gains.
inline Matrix example1_beta_squared() {
  const double a = 1.5, b = 1.3, c = 1.0, d = 0.5, e = 0.3, f = 0.2;
  Matrix b2(2, 8);
  b2 << a, b, c, c, f, e, e, d,
        f, e, e, d, a, b, c, c;
  return b2;
}

inline ClusterProblem example1_problem(double power_db = 15.0) {
  return problem_from_beta_squared(example1_beta_squared(), 4.0,
                                   Vector::Constant(2, db_to_linear(power_db)));
}

inline Vector example1_mu() {
  Vector mu(8);
  mu << 0.5, 0.5, 0.75, 1.0, 0.5, 0.5, 0.75, 1.0;
  return mu;
}

inline Matrix table1_theta() {
  Matrix t(2, 8);
  t << 0.325, 0.311, 0.454, 0.565, 0.175, 0.189, 0.296, 0.435,
       0.175, 0.189, 0.296, 0.435, 0.325, 0.311, 0.454, 0.565;
  return t;
}

// B x A matrix made of A' circulant B x B blocks in natural group order.
inline Matrix random_circulant_beta_squared(int B, int a_prime, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  Matrix b2(B, B * a_prime);
  for (int i = 0; i < a_prime; ++i) {
    Vector base(B);
    for (int m = 0; m < B; ++m) base(m) = u(rng);
    for (int j = 0; j < B; ++j) {
      for (int m = 0; m < B; ++m) b2(m, i + a_prime * j) = base((m + j) % B);
    }
  }
  return b2;
}

inline Matrix random_beta_squared(int B, int A, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 2.0);
  Matrix b2(B, A);
  for (int m = 0; m < B; ++m)
    for (int k = 0; k < A; ++k) b2(m, k) = u(rng);
  return b2;
}

}  // namespace netmimo::testing
