#include "netmimo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace netmimo {

void PathlossParams::validate() const {
  if (!(g0 > 0.0) || !(delta_m > 0.0) || !(exponent > 0.0)) {
    throw ConfigError("pathloss: g0, delta and exponent must be positive");
  }
}

PathlossParams wimax_pathloss() {
  return PathlossParams{db_to_linear(-91.64), 36.0, 3.504};
}

double pathloss_gain(double distance_m, const PathlossParams& params) {
  if (!(distance_m >= 0.0)) {
    throw ConfigError("pathloss_gain: distance must be non-negative");
  }
  return params.g0 / (1.0 + std::pow(distance_m / params.delta_m, params.exponent));
}

double NetworkLayout::distance_m(int bs, int group) const {
  const double ring = ring_length_km();
  double d = std::fmod(std::abs(bs_positions_km.at(bs) - group_positions_km.at(group)), ring);
  d = std::min(d, ring - d);
  return 1000.0 * d;
}

Matrix NetworkLayout::gain_squared() const {
  Matrix g(num_cells, num_groups);
  for (int m = 0; m < num_cells; ++m) {
    for (int k = 0; k < num_groups; ++k) {
      g(m, k) = pathloss_gain(distance_m(m, k), pathloss);
    }
  }
  return g;
}

namespace {

void check_partition(const std::vector<std::vector<int>>& sets, int n,
                     const char* what) {
  std::vector<int> seen(n, 0);
  for (const auto& s : sets) {
    for (int x : s) {
      if (x < 0 || x >= n) {
        throw ConfigError(std::string("layout: ") + what + " index out of range");
      }
      ++seen[x];
    }
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw ConfigError(std::string("layout: clusters do not partition the ") + what + " set");
  }
}

}  // namespace

void NetworkLayout::validate() const {
  pathloss.validate();
  if (num_cells < 1 || num_groups < 1) {
    throw ConfigError("layout: need at least one cell and one group");
  }
  if (static_cast<int>(bs_positions_km.size()) != num_cells ||
      static_cast<int>(bs_power.size()) != num_cells ||
      static_cast<int>(group_positions_km.size()) != num_groups) {
    throw ConfigError("layout: position/power vector sizes disagree with counts");
  }
  std::vector<std::vector<int>> bs_sets, group_sets;
  for (const auto& c : clusters) {
    bs_sets.push_back(c.bs);
    group_sets.push_back(c.groups);
  }
  check_partition(bs_sets, num_cells, "BS");
  check_partition(group_sets, num_groups, "group");
}

void ClusterProblem::validate() const {
  if (beta.rows() < 1 || beta.cols() < 1) {
    throw ConfigError("problem: empty gain matrix");
  }
  if (power.size() != beta.rows()) {
    throw ConfigError("problem: power vector length must equal the BS count");
  }
  if (!(gamma > 0.0)) {
    throw ConfigError("problem: gamma must be positive");
  }
  if (!(beta.array() > 0.0).all() || !beta.allFinite()) {
    throw ConfigError("problem: all channel gains must be finite and positive");
  }
  if ((power.array() < 0.0).any()) {
    throw ConfigError("problem: powers must be non-negative");
  }
}

ClusterProblem problem_from_beta_squared(const Matrix& beta_squared,
                                         double gamma, const Vector& power) {
  ClusterProblem p;
  p.gamma = gamma;
  p.beta = beta_squared.array().sqrt().matrix();
  p.power = power;
  p.validate();
  return p;
}

NetworkLayout build_linear_layout(int num_cells, int groups_per_cell,
                                  const PathlossParams& params, double power) {
  if (num_cells < 1 || groups_per_cell < 1) {
    throw ConfigError("layout: num_cells and groups_per_cell must be >= 1");
  }
  NetworkLayout layout;
  layout.num_cells = num_cells;
  layout.num_groups = num_cells * groups_per_cell;
  layout.pathloss = params;
  layout.bs_power.assign(num_cells, power);
  const double spacing = 2.0 / groups_per_cell;
  for (int m = 0; m < num_cells; ++m) {
    const double x = 2.0 * (m + 1) - num_cells - 1;
    layout.bs_positions_km.push_back(x);
    Cluster c{{m}, {}};
    for (int j = 0; j < groups_per_cell; ++j) {
      layout.group_positions_km.push_back(x - 1.0 + (j + 0.5) * spacing);
      c.groups.push_back(m * groups_per_cell + j);
    }
    layout.clusters.push_back(std::move(c));
  }
  layout.validate();
  return layout;
}

NetworkLayout partition_consecutive(NetworkLayout layout, int cluster_size) {
  if (cluster_size < 1 || cluster_size > layout.num_cells) {
    throw ConfigError("layout: cluster size must be in [1, num_cells]");
  }
  if (layout.num_groups % layout.num_cells != 0) {
    throw ConfigError("layout: group count must be a multiple of the cell count");
  }
  const int per_cell = layout.num_groups / layout.num_cells;
  layout.clusters.clear();
  for (int first = 0; first < layout.num_cells; first += cluster_size) {
    Cluster c;
    for (int m = first; m < std::min(first + cluster_size, layout.num_cells); ++m) {
      c.bs.push_back(m);
      for (int j = 0; j < per_cell; ++j) c.groups.push_back(m * per_cell + j);
    }
    layout.clusters.push_back(std::move(c));
  }
  layout.validate();
  return layout;
}

ClusterProblem cluster_reduce(const NetworkLayout& layout, int cluster_index,
                              double gamma) {
  if (cluster_index < 0 || cluster_index >= static_cast<int>(layout.clusters.size())) {
    throw ConfigError("cluster_reduce: cluster index out of range");
  }
  const Cluster& c = layout.clusters[cluster_index];
  if (c.bs.empty() || c.groups.empty()) {
    throw ConfigError("cluster_reduce: empty cluster");
  }
  std::vector<char> inside(layout.num_cells, 0);
  for (int m : c.bs) inside[m] = 1;

  const Matrix alpha2 = layout.gain_squared();
  ClusterProblem p;
  p.gamma = gamma;
  p.bs_ids = c.bs;
  p.group_ids = c.groups;
  p.beta.resize(c.bs.size(), c.groups.size());
  p.power.resize(c.bs.size());
  for (std::size_t b = 0; b < c.bs.size(); ++b) p.power(b) = layout.bs_power[c.bs[b]];
  for (std::size_t a = 0; a < c.groups.size(); ++a) {
    const int k = c.groups[a];
    double sigma2 = 1.0;
    for (int m = 0; m < layout.num_cells; ++m) {
      if (!inside[m]) sigma2 += alpha2(m, k) * layout.bs_power[m];
    }
    for (std::size_t b = 0; b < c.bs.size(); ++b) {
      p.beta(b, a) = std::sqrt(alpha2(c.bs[b], k) / sigma2);
    }
  }
  p.validate();
  return p;
}

namespace {

bool close_rel(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

// Column `k` of b2 equals column `rep` rotated by `shift` rows.
bool matches_rotation(const Matrix& b2, int k, int rep, int shift, double tol) {
  const int B = static_cast<int>(b2.rows());
  for (int m = 0; m < B; ++m) {
    if (!close_rel(b2(m, k), b2((m + shift) % B, rep), tol)) return false;
  }
  return true;
}

}  // namespace

EquivalenceClasses detect_symmetry(const ClusterProblem& problem, double rel_tol) {
  const Matrix b2 = problem.beta_squared();
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  EquivalenceClasses out;
  if (A % B != 0) return out;
  const int ap = A / B;

  // Natural indexing: groups (j-1)A' + i form class i.
  bool natural = true;
  for (int k = 0; k < A && natural; ++k) {
    for (int j = 1; j < B && natural; ++j) {
      natural = matches_rotation(b2, (k + ap * j) % A, k, j, rel_tol);
    }
  }

  out.a_prime = ap;
  out.class_of.assign(A, -1);
  out.member.assign(B, std::vector<int>(ap, -1));
  if (natural) {
    for (int j = 0; j < B; ++j) {
      for (int i = 0; i < ap; ++i) {
        out.member[j][i] = i + ap * j;
        out.class_of[i + ap * j] = i;
      }
    }
    out.is_symmetric = true;
    return out;
  }

  // Otherwise look for any re-indexing (e.g. mirror-ordered layouts).
  int cls = 0;
  for (int rep = 0; rep < A; ++rep) {
    if (out.class_of[rep] >= 0) continue;
    if (cls >= ap) return EquivalenceClasses{};
    out.class_of[rep] = cls;
    out.member[0][cls] = rep;
    for (int j = 1; j < B; ++j) {
      int found = -1;
      for (int k = 0; k < A; ++k) {
        if (out.class_of[k] < 0 && matches_rotation(b2, k, rep, j, rel_tol)) {
          found = k;
          break;
        }
      }
      if (found < 0) return EquivalenceClasses{};
      out.class_of[found] = cls;
      out.member[j][cls] = found;
    }
    ++cls;
  }
  out.is_symmetric = (cls == ap);
  if (!out.is_symmetric) return EquivalenceClasses{};
  return out;
}

ClusterProblem reduce_symmetric(const ClusterProblem& problem,
                                const EquivalenceClasses& classes) {
  if (!classes.is_symmetric) {
    throw ConfigError("reduce_symmetric: problem is not symmetric");
  }
  const Matrix b2 = problem.beta_squared();
  Matrix reduced(1, classes.a_prime);
  for (int i = 0; i < classes.a_prime; ++i) {
    reduced(0, i) = b2.col(classes.member[0][i]).sum();
  }
  Vector power(1);
  power(0) = problem.total_power() / problem.num_bs();
  return problem_from_beta_squared(reduced, problem.gamma, power);
}

Vector expand_classes(const Vector& per_class, const EquivalenceClasses& classes) {
  if (per_class.size() != classes.a_prime) {
    throw ConfigError("expand_classes: expected one value per class");
  }
  Vector out(classes.class_of.size());
  for (std::size_t k = 0; k < classes.class_of.size(); ++k) {
    out(k) = per_class(classes.class_of[k]);
  }
  return out;
}

}  // namespace netmimo
