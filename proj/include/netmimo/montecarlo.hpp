#pragma once

#include "netmimo/csit.hpp"
#include "netmimo/geometry.hpp"
#include "netmimo/scheduler.hpp"

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace netmimo {

/// One slot's channel for the active users of a cluster. Rows are antennas
/// (gamma*N per BS, BS-major), columns are users (group-major).
struct ChannelRealization {
  int n = 0;  // users per group
  ComplexMatrix h;
  std::vector<int> active_counts;
  std::vector<int> antenna_bs;  // row -> BS
  std::vector<int> user_group;  // column -> group
};

/// round(mu_k N) users per group; when the total exceeds max_streams, the
/// groups with the largest rounding remainders lose one user each.
std::vector<int> active_counts(const Vector& mu, int n, int max_streams);

/// Antennas per BS for N users per group; gamma*N must be an integer.
int antennas_per_bs(double gamma, int n);

/// Engine for block (m, k) of slot `slot`. Blocks and slots draw from
/// independent streams of the master seed.
std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t slot, int m, int k);

ChannelRealization sample_channel(const ClusterProblem& problem, const std::vector<int>& counts,
                                  int n, std::uint64_t seed, std::uint64_t slot = 0);

ChannelRealization sample_channel(const ClusterProblem& problem, const Vector& mu, int n,
                                  std::uint64_t seed, std::uint64_t slot = 0);

/// All N users of every group (may exceed the antenna count); the candidate
/// pool for greedy selection.
ChannelRealization sample_candidates(const ClusterProblem& problem, int n, std::uint64_t seed,
                                     std::uint64_t slot = 0);

struct FiniteZfResult {
  Vector lambda;     // per-user gain, 1 / [(H^H H)^-1]_ii
  ComplexMatrix v;   // unit-norm beamforming columns (empty unless requested)
  // max |offdiag(H^H V)| / max |diag(H^H V)|; NaN when not checked
  double diagonality_defect = std::numeric_limits<double>::quiet_NaN();
};

struct ZfOptions {
  bool want_beamformers = true;
  bool check_diagonal = false;
};

/// Zero-forcing gains and directions from a Householder QR of H.
FiniteZfResult zf_pseudo_inverse(const ComplexMatrix& h, const ZfOptions& options = {});

/// B x A matrix of per-BS beamformer energy per group, normalized by N.
Matrix empirical_theta(const FiniteZfResult& zf, const ChannelRealization& channel, int num_bs,
                       int num_groups);

/// Per-group mean of the finite-N gains (NaN for groups without users).
Vector group_mean(const Vector& per_user, const std::vector<int>& user_group, int num_groups);

struct UserSelection {
  std::vector<int> selected;  // column indices, in the order added
  Vector lambda;              // ZF gains of the selected users
  Vector q;                   // powers, (1/N) sum q <= p_sum
  Vector rate;                // nats
  double objective = 0.0;
};

/// Adds users one at a time, each time the one maximizing the weighted sum
/// rate after ZF and sum-power waterfilling on the enlarged set; stops when
/// nothing improves or max_streams is reached.
UserSelection greedy_user_selection(const ComplexMatrix& h, const Vector& weights, double p_sum,
                                    int n, int max_streams);

struct StreamAssignment {
  // One entry per stream: -1 idle, else the group and the user within it.
  std::vector<int> group;
  std::vector<int> user;
  int overflow = 0;  // draws turned idle because a group ran out of users
};

/// gamma*B*N i.i.d. draws with P(k) = mu_k / (gamma B), idle otherwise.
StreamAssignment probabilistic_schedule(const Vector& mu, double gamma, int num_bs, int n,
                                        std::mt19937_64& rng);

enum class FiniteScheduler { kGreedySelection, kProbabilistic };

struct FiniteSimConfig {
  FiniteScheduler scheduler = FiniteScheduler::kGreedySelection;
  int n = 1;
  int slots = 500;
  int burn_in = 100;  // slots excluded from the throughput average
  std::uint64_t seed = 1;
  TrainingConfig csit{true, 0.0, 0.0};
  // Greedy mode: per-user PF virtual queues with these V / a_max / warm-start.
  UtilityConfig utility{UtilityKind::kProportionalFair, 1.0, 100.0, 0.0, 1, 10, {}};
  // Probabilistic mode: the asymptotic PF plan is computed with these.
  GreedyOptions greedy{};
  PfOptions pf{};
};

struct FiniteSimResult {
  Vector user_throughput;   // per user, nats per channel use, after overhead
  Vector group_throughput;  // mean over each group's users
  Vector asymptotic;        // asymptotic PF per-user throughput of the same problem
  int overflow = 0;         // probabilistic mode: idle streams from group overflow
};

/// Time-averaged per-user throughput of a finite cluster with N users per group.
FiniteSimResult finite_sim_throughput(const ClusterProblem& problem, const FiniteSimConfig& config);

}  // namespace netmimo
