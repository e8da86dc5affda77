#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace netmimo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Invalid input: malformed config, infeasible user fractions, violated preconditions.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical routine failed to deliver a result within its contract.
/// `residual` carries the last defect seen (NaN when not applicable).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  explicit NumericalError(const std::string& what)
      : NumericalError(what, std::numeric_limits<double>::quiet_NaN()) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Rates are computed in nats; bits only at reporting boundaries.
enum class LogBase { kNats, kBits };

inline double nats_to(LogBase base, double nats) {
  return base == LogBase::kBits ? nats / std::log(2.0) : nats;
}

}  // namespace netmimo
