#include "netmimo/montecarlo.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace netmimo {

namespace {

std::mt19937_64 tagged_engine(std::uint64_t seed, std::uint64_t slot, std::uint32_t tag,
                              std::uint32_t a, std::uint32_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(slot >> 32),
                    tag, a, b};
  return std::mt19937_64(seq);
}

std::mt19937_64 schedule_engine(std::uint64_t seed, std::uint64_t slot) {
  return tagged_engine(seed, slot, 2u, 0u, 0u);
}

}  // namespace

std::vector<int> active_counts(const Vector& mu, int n, int max_streams) {
  if (n < 1) throw ConfigError("active_counts: N must be >= 1");
  std::vector<int> counts(mu.size());
  std::vector<double> remainder(mu.size());
  int total = 0;
  for (Eigen::Index k = 0; k < mu.size(); ++k) {
    if (!(mu(k) >= 0.0) || mu(k) > 1.0 + 1e-12) {
      throw ConfigError("active_counts: fractions must lie in [0, 1]");
    }
    const double x = mu(k) * n;
    counts[k] = static_cast<int>(std::lround(x));
    remainder[k] = x - std::floor(x);
    total += counts[k];
  }
  std::vector<int> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; total > max_streams; i = (i + 1) % order.size()) {
    if (counts[order[i]] > 0) {
      --counts[order[i]];
      --total;
    }
  }
  return counts;
}

int antennas_per_bs(double gamma, int n) {
  const double x = gamma * n;
  const long r = std::lround(x);
  if (n < 1 || r < 1 || std::abs(x - static_cast<double>(r)) > 1e-9) {
    throw ConfigError("montecarlo: gamma * N must be a positive integer");
  }
  return static_cast<int>(r);
}

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t slot, int m, int k) {
  return tagged_engine(seed, slot, 1u, static_cast<std::uint32_t>(m),
                       static_cast<std::uint32_t>(k));
}

namespace {

ChannelRealization fill_channel(const ClusterProblem& problem, const std::vector<int>& counts,
                                int n, std::uint64_t seed, std::uint64_t slot, bool pool) {
  problem.validate();
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  if (static_cast<int>(counts.size()) != A) {
    throw ConfigError("sample_channel: one user count per group expected");
  }
  const int ant = antennas_per_bs(problem.gamma, n);
  ChannelRealization c;
  c.n = n;
  c.active_counts = counts;
  for (int m = 0; m < B; ++m) c.antenna_bs.insert(c.antenna_bs.end(), ant, m);
  for (int k = 0; k < A; ++k) {
    if (counts[k] < 0 || counts[k] > n) {
      throw ConfigError("sample_channel: group user count outside [0, N]");
    }
    c.user_group.insert(c.user_group.end(), counts[k], k);
  }
  const int users = static_cast<int>(c.user_group.size());
  if (!pool && users > B * ant) {
    throw ConfigError("sample_channel: more active users (" + std::to_string(users) +
                      ") than antennas (" + std::to_string(B * ant) + ")");
  }
  c.h.resize(B * ant, users);
  std::normal_distribution<double> normal;
  const double inv_sqrt2 = std::sqrt(0.5);
  int col0 = 0;
  for (int k = 0; k < A; ++k) {
    for (int m = 0; m < B && counts[k] > 0; ++m) {
      std::mt19937_64 rng = block_engine(seed, slot, m, k);
      normal.reset();  // no cached draw may leak across blocks
      const double s = problem.beta(m, k) / std::sqrt(static_cast<double>(n)) * inv_sqrt2;
      for (int j = 0; j < counts[k]; ++j) {
        for (int r = 0; r < ant; ++r) {
          const double re = normal(rng);
          const double im = normal(rng);
          c.h(m * ant + r, col0 + j) = std::complex<double>(s * re, s * im);
        }
      }
    }
    col0 += counts[k];
  }
  return c;
}

}  // namespace

ChannelRealization sample_channel(const ClusterProblem& problem, const std::vector<int>& counts,
                                  int n, std::uint64_t seed, std::uint64_t slot) {
  return fill_channel(problem, counts, n, seed, slot, false);
}

ChannelRealization sample_candidates(const ClusterProblem& problem, int n, std::uint64_t seed,
                                     std::uint64_t slot) {
  return fill_channel(problem, std::vector<int>(problem.num_groups(), n), n, seed, slot, true);
}

ChannelRealization sample_channel(const ClusterProblem& problem, const Vector& mu, int n,
                                  std::uint64_t seed, std::uint64_t slot) {
  if (mu.size() != problem.num_groups()) {
    throw ConfigError("sample_channel: one fraction per group expected");
  }
  const int max_streams = problem.num_bs() * antennas_per_bs(problem.gamma, n);
  if (mu.sum() * n > max_streams + 0.5) {
    throw ConfigError("sample_channel: more users than antennas");
  }
  return sample_channel(problem, active_counts(mu, n, max_streams), n, seed, slot);
}

FiniteZfResult zf_pseudo_inverse(const ComplexMatrix& h, const ZfOptions& options) {
  const Eigen::Index rows = h.rows();
  const Eigen::Index cols = h.cols();
  FiniteZfResult out;
  if (cols == 0) {
    out.lambda.resize(0);
    out.v.resize(rows, 0);
    return out;
  }
  if (cols > rows) throw ConfigError("zf: more users than antennas");
  const Eigen::HouseholderQR<ComplexMatrix> qr(h);
  const auto r = qr.matrixQR().topLeftCorner(cols, cols).triangularView<Eigen::Upper>();
  const Vector rdiag = qr.matrixQR().diagonal().head(cols).cwiseAbs();
  const double cond = rdiag.maxCoeff() / rdiag.minCoeff();
  if (!(rdiag.minCoeff() > 0.0) || !(cond < 1e12)) {
    throw NumericalError("zf: channel is (numerically) rank deficient, |R| diagonal ratio " +
                             std::to_string(cond),
                         cond);
  }
  if (options.want_beamformers || options.check_diagonal) {
    // H (H^H H)^-1 = (H R^-1) R^-H; its column norms are 1 / sqrt(Lambda).
    ComplexMatrix v = h;
    r.solveInPlace<Eigen::OnTheRight>(v);
    r.adjoint().solveInPlace<Eigen::OnTheRight>(v);
    out.lambda = v.colwise().squaredNorm().transpose().cwiseInverse();
    v *= out.lambda.cwiseSqrt().cast<std::complex<double>>().asDiagonal();
    if (options.check_diagonal) {
      ComplexMatrix hv = h.adjoint() * v;
      const double diag = hv.diagonal().cwiseAbs().maxCoeff();
      hv.diagonal().setZero();
      out.diagonality_defect = hv.cwiseAbs().maxCoeff() / diag;
    }
    out.v = std::move(v);
  } else {
    // diag (H^H H)^-1 = squared row norms of R^-1
    ComplexMatrix rinv = ComplexMatrix::Identity(cols, cols);
    r.solveInPlace(rinv);
    out.lambda = rinv.rowwise().squaredNorm().cwiseInverse();
  }
  return out;
}

Matrix empirical_theta(const FiniteZfResult& zf, const ChannelRealization& channel, int num_bs,
                       int num_groups) {
  if (zf.v.cols() != static_cast<Eigen::Index>(channel.user_group.size()) ||
      zf.v.rows() != static_cast<Eigen::Index>(channel.antenna_bs.size())) {
    throw ConfigError("empirical_theta: beamformers do not match the channel");
  }
  Matrix theta = Matrix::Zero(num_bs, num_groups);
  for (Eigen::Index i = 0; i < zf.v.cols(); ++i) {
    const int k = channel.user_group[i];
    for (Eigen::Index r = 0; r < zf.v.rows(); ++r) {
      theta(channel.antenna_bs[r], k) += std::norm(zf.v(r, i));
    }
  }
  return theta / channel.n;
}

Vector group_mean(const Vector& per_user, const std::vector<int>& user_group, int num_groups) {
  Vector sum = Vector::Zero(num_groups);
  Vector count = Vector::Zero(num_groups);
  for (std::size_t i = 0; i < user_group.size(); ++i) {
    sum(user_group[i]) += per_user(i);
    count(user_group[i]) += 1.0;
  }
  return sum.cwiseQuotient(count);
}

UserSelection greedy_user_selection(const ComplexMatrix& h, const Vector& weights, double p_sum,
                                    int n, int max_streams) {
  const int K = static_cast<int>(h.cols());
  if (weights.size() != K) throw ConfigError("user selection: one weight per user expected");
  if (max_streams > h.rows()) throw ConfigError("user selection: max_streams exceeds antennas");
  const ComplexMatrix g = h.adjoint() * h;
  UserSelection out;
  ComplexMatrix inv(0, 0);  // (H_S^H H_S)^-1
  std::vector<char> used(K, 0);
  Vector lam, w;

  while (static_cast<int>(out.selected.size()) < max_streams) {
    const int s = static_cast<int>(out.selected.size());
    const Vector mu = Vector::Constant(s + 1, 1.0 / n);
    int best = -1;
    double best_obj = out.objective;
    Eigen::VectorXcd b(s), u(s), best_u(s);
    double best_schur = 0.0;
    lam.resize(s + 1);
    w.resize(s + 1);
    for (int i = 0; i < s; ++i) w(i) = weights(out.selected[i]);
    for (int c = 0; c < K; ++c) {
      const double gcc = g(c, c).real();
      if (used[c] || !(weights(c) > 0.0) || !(gcc > 0.0)) continue;
      for (int i = 0; i < s; ++i) b(i) = g(out.selected[i], c);
      u.noalias() = inv * b;
      const double schur = gcc - b.dot(u).real();
      if (!(schur > 1e-12 * gcc)) continue;
      for (int i = 0; i < s; ++i) {
        lam(i) = 1.0 / (inv(i, i).real() + std::norm(u(i)) / schur);
      }
      lam(s) = schur;
      w(s) = weights(c);
      const PowerAllocation a = waterfill_sum(w, lam, mu, p_sum);
      const double obj = weighted_sum_rate(w, lam, a.q, mu);
      if (obj > best_obj * (1.0 + 1e-12) && obj > 0.0) {
        best = c;
        best_obj = obj;
        best_u = u;
        best_schur = schur;
      }
    }
    if (best < 0) break;

    // Bordered inverse with the new user appended.
    ComplexMatrix next(s + 1, s + 1);
    next.topLeftCorner(s, s) = inv + best_u * best_u.adjoint() / best_schur;
    next.topRightCorner(s, 1) = -best_u / best_schur;
    next.bottomLeftCorner(1, s) = -best_u.adjoint() / best_schur;
    next(s, s) = 1.0 / best_schur;
    inv = std::move(next);
    used[best] = 1;
    out.selected.push_back(best);
    out.objective = best_obj;
  }

  const int s = static_cast<int>(out.selected.size());
  const Vector mu = Vector::Constant(s, 1.0 / n);
  out.lambda = inv.diagonal().real().cwiseInverse();
  w.resize(s);
  for (int i = 0; i < s; ++i) w(i) = weights(out.selected[i]);
  out.q = s ? waterfill_sum(w, out.lambda, mu, p_sum).q : Vector(0);
  out.rate = (1.0 + out.lambda.array() * out.q.array()).log().matrix();
  return out;
}

StreamAssignment probabilistic_schedule(const Vector& mu, double gamma, int num_bs, int n,
                                        std::mt19937_64& rng) {
  const int streams = num_bs * antennas_per_bs(gamma, n);
  const double capacity = gamma * num_bs;
  if ((mu.array() < 0.0).any() || mu.sum() > capacity * (1.0 + 1e-12)) {
    throw ConfigError("probabilistic_schedule: need mu >= 0 and sum(mu) <= gamma * B");
  }
  const int A = static_cast<int>(mu.size());
  std::vector<double> cumulative(A);
  double acc = 0.0;
  for (int k = 0; k < A; ++k) {
    acc += mu(k) / capacity;
    cumulative[k] = acc;
  }
  // Users handed out per group in the order of a lazily drawn random permutation.
  std::vector<std::vector<int>> perm(A);
  std::vector<int> used(A, 0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  StreamAssignment out;
  out.group.assign(streams, -1);
  out.user.assign(streams, -1);
  for (int i = 0; i < streams; ++i) {
    const double x = uniform(rng);
    const int k = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), x) -
                                   cumulative.begin());
    if (k >= A) continue;
    if (used[k] == n) {
      ++out.overflow;
      continue;
    }
    if (perm[k].empty()) {
      perm[k].resize(n);
      std::iota(perm[k].begin(), perm[k].end(), 0);
    }
    const int j = used[k];
    std::uniform_int_distribution<int> pick(j, n - 1);
    std::swap(perm[k][j], perm[k][pick(rng)]);
    out.group[i] = k;
    out.user[i] = perm[k][j];
    ++used[k];
  }
  return out;
}

FiniteSimResult finite_sim_throughput(const ClusterProblem& problem,
                                      const FiniteSimConfig& config) {
  problem.validate();
  if (config.slots < 1 || config.burn_in < 0 || config.burn_in >= config.slots) {
    throw ConfigError("finite simulation: need slots >= 1 and 0 <= burn_in < slots");
  }
  const int B = problem.num_bs();
  const int A = problem.num_groups();
  const int n = config.n;
  const int streams = B * antennas_per_bs(problem.gamma, n);
  const double p_sum = problem.total_power();

  // Trained CSIT: ZF on the estimate, scored by the lower bound. Scaling each
  // user's column by 1/sqrt(1 + I_k) leaves the ZF directions unchanged and
  // divides its gain by 1 + I_k, so sampling the rescaled problem is exact.
  ClusterProblem eff = problem;
  double overhead = 1.0;
  if (!config.csit.perfect) {
    const double p = training_power(config.csit, problem.gamma, problem.power);
    eff = trained_problem(problem, effective_gains(problem.beta, p));
    overhead = overhead_factor(config.csit, problem.gamma, B);
  }

  FiniteSimResult out;
  Vector sum = Vector::Zero(A * n);
  const PfResult plan = pf_operating_point(eff, config.greedy, config.pf);
  out.asymptotic = overhead * plan.throughput;

  if (config.scheduler == FiniteScheduler::kGreedySelection) {
    UtilityConfig u = config.utility;
    u.validate(A * n);
    if (!(u.a_max > 0.0)) u.a_max = default_a_max(eff);
    Vector queues = Vector::Zero(A * n);
    for (int t = 0; t < config.slots; ++t) {
      const ChannelRealization ch = sample_candidates(eff, n, config.seed, t);
      const Vector w = t < u.warm_start ? Vector::Ones(A * n) : queues;
      const UserSelection sel = greedy_user_selection(ch.h, w, p_sum, n, streams);
      Vector r = Vector::Zero(A * n);
      for (std::size_t i = 0; i < sel.selected.size(); ++i) r(sel.selected[i]) = sel.rate(i);
      queues = (queues - r).cwiseMax(0.0) + utility_subproblem(queues, u);
      if (t >= config.burn_in) sum += r;
    }
  } else {
    const Vector w_group = pf_weights(plan.throughput);
    std::vector<double> cumulative;
    double acc = 0.0;
    for (double s : plan.shares) cumulative.push_back(acc += s);
    for (int t = 0; t < config.slots; ++t) {
      std::mt19937_64 rng = schedule_engine(config.seed, t);
      const double x = std::uniform_real_distribution<double>(0.0, acc)(rng);
      const std::size_t pick = std::min<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin(),
          plan.schedules.size() - 1);
      const StreamAssignment sa =
          probabilistic_schedule(plan.schedules[pick], problem.gamma, B, n, rng);
      out.overflow += sa.overflow;

      std::vector<int> counts(A, 0);
      std::vector<std::vector<int>> users(A);
      for (int i = 0; i < streams; ++i) {
        if (sa.group[i] < 0) continue;
        ++counts[sa.group[i]];
        users[sa.group[i]].push_back(sa.user[i]);
      }
      const ChannelRealization ch = sample_channel(eff, counts, n, config.seed, t);
      const FiniteZfResult zf = zf_pseudo_inverse(ch.h, ZfOptions{false, false});
      const int s = static_cast<int>(ch.user_group.size());
      if (s == 0) continue;
      Vector w(s);
      for (int i = 0; i < s; ++i) w(i) = w_group(ch.user_group[i]);
      const Vector mu = Vector::Constant(s, 1.0 / n);
      const PowerAllocation a = waterfill_sum(w, zf.lambda, mu, p_sum);
      if (t < config.burn_in) continue;
      int col = 0;
      for (int k = 0; k < A; ++k) {
        for (int user : users[k]) {
          sum(k * n + user) += std::log1p(zf.lambda(col) * a.q(col));
          ++col;
        }
      }
    }
  }
  out.user_throughput = overhead * sum / (config.slots - config.burn_in);
  out.group_throughput.resize(A);
  for (int k = 0; k < A; ++k) out.group_throughput(k) = out.user_throughput.segment(k * n, n).mean();
  return out;
}

}  // namespace netmimo
