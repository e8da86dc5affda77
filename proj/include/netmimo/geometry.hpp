#pragma once

#include "netmimo/common.hpp"

#include <vector>

namespace netmimo {

/// Distance-dependent pathloss alpha^2 = g0 / (1 + (d/delta)^exponent).
/// All fields linear / meters.
struct PathlossParams {
  double g0 = 1.0;
  double delta_m = 1.0;
  double exponent = 2.0;

  void validate() const;
};

/// Reference parameters of the mobile WiMAX evaluation setup.
PathlossParams wimax_pathloss();

/// Linear power gain alpha^2 at distance `distance_m` (meters).
double pathloss_gain(double distance_m, const PathlossParams& params);

struct Cluster {
  std::vector<int> bs;
  std::vector<int> groups;
};

/// One-dimensional wrap-around cellular layout on the segment [-M, M] km.
struct NetworkLayout {
  int num_cells = 0;
  int num_groups = 0;
  std::vector<double> bs_positions_km;
  std::vector<double> group_positions_km;
  PathlossParams pathloss;
  std::vector<double> bs_power;  // linear, unit-noise normalized
  std::vector<Cluster> clusters;

  double ring_length_km() const { return 2.0 * num_cells; }

  /// Shortest distance in meters between BS m and group k over the ring.
  double distance_m(int bs, int group) const;

  /// M x K matrix of alpha^2_{m,k}.
  Matrix gain_squared() const;

  /// Throws ConfigError unless clusters partition both the BS and group sets.
  void validate() const;
};

/// Per-cluster problem after folding out-of-cluster interference into the noise.
struct ClusterProblem {
  double gamma = 1.0;
  Matrix beta;   // B x A, strictly positive
  Vector power;  // per-BS power, length B
  // Global indices of the BSs / groups when the problem came from a layout.
  std::vector<int> bs_ids;
  std::vector<int> group_ids;

  int num_bs() const { return static_cast<int>(beta.rows()); }
  int num_groups() const { return static_cast<int>(beta.cols()); }
  Matrix beta_squared() const { return beta.array().square().matrix(); }
  double total_power() const { return power.sum(); }

  void validate() const;
};

/// Builds a problem directly from a matrix of squared gains beta^2_{m,k}.
ClusterProblem problem_from_beta_squared(const Matrix& beta_squared,
                                         double gamma, const Vector& power);

/// BSs at 2m - M - 1 km, `groups_per_cell` groups on a midpoint grid inside each
/// 2-km cell. Every BS starts as its own cluster.
NetworkLayout build_linear_layout(int num_cells, int groups_per_cell,
                                  const PathlossParams& params, double power);

/// Re-partitions the layout into clusters of `cluster_size` consecutive cells
/// (the last cluster may be smaller when the size does not divide M).
NetworkLayout partition_consecutive(NetworkLayout layout, int cluster_size);

/// Reduces cluster `cluster_index` to its normalized problem; out-of-cluster
/// BSs transmit at full power.
ClusterProblem cluster_reduce(const NetworkLayout& layout, int cluster_index,
                              double gamma);

/// User-group equivalence classes of a cluster with circulant gain blocks.
/// member[j][i] is the group in class i that sees the gains of member[0][i]
/// rotated by j BSs: beta^2_{(m+j) mod B, member[0][i]} = beta^2_{m, member[j][i]}.
struct EquivalenceClasses {
  bool is_symmetric = false;
  int a_prime = 0;
  std::vector<int> class_of;
  std::vector<std::vector<int>> member;
};

EquivalenceClasses detect_symmetry(const ClusterProblem& problem,
                                   double rel_tol = 1e-9);

/// Equivalent single-BS problem of a symmetric cluster: A' classes with
/// beta_i^2 = sum_m beta^2_{m,k}, total power P_sum / B. Its objective values
/// are those of the full cluster divided by B.
ClusterProblem reduce_symmetric(const ClusterProblem& problem,
                                const EquivalenceClasses& classes);

/// Expands per-class values (length A') to per-group values (length A).
Vector expand_classes(const Vector& per_class, const EquivalenceClasses& classes);

}  // namespace netmimo
