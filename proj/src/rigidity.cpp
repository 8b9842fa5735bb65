#include "ordembed/rigidity.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>

#include "ordembed/error.hpp"

namespace ordembed {

namespace {

struct Trial {
  bool local = false;
  bool global = false;
  int rank = 0;
  int stress_rank = 0;
  std::string diagnostic;
};

Eigen::MatrixXd rigidity_matrix(std::span<const Edge> edges,
                                const Eigen::MatrixXd &p) {
  const int d = static_cast<int>(p.rows());
  const int n = static_cast<int>(p.cols());
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(edges.size(), d * n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    const Eigen::VectorXd diff = p.col(i) - p.col(j);
    r.block(e, d * i, 1, d) = diff.transpose();
    r.block(e, d * j, 1, d) = -diff.transpose();
  }
  return r;
}

// Stress matrix of the self-stress w: off-diagonal -w_ij, zero row sums.
Eigen::MatrixXd stress_matrix(std::span<const Edge> edges,
                              const Eigen::VectorXd &w, int n) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    omega(i, j) -= w(e);
    omega(j, i) -= w(e);
    omega(i, i) += w(e);
    omega(j, j) += w(e);
  }
  return omega;
}

Eigen::MatrixXd random_configuration(int d, int n, double scale,
                                     std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, scale);
  Eigen::MatrixXd p(d, n);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < d; ++a)
      p(a, j) = u(rng);
  return p;
}

Eigen::VectorXd random_vector(Eigen::Index m, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd h(m);
  for (Eigen::Index i = 0; i < m; ++i)
    h(i) = g(rng);
  return h;
}

Trial run_trial(std::span<const Edge> edges, int n, int d, std::uint64_t seed,
                int trial, const RigidityOptions &opts, bool want_global) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::mt19937_64 rng(seq);
  const Eigen::MatrixXd p = random_configuration(d, n, opts.config_scale, rng);
  const Eigen::Index m = static_cast<Eigen::Index>(edges.size());
  const Eigen::Index c = static_cast<Eigen::Index>(d) * n;
  const int expected = d * n - d * (d + 1) / 2;

  Trial t;
  if (m == 0) {
    t.diagnostic = "no edges";
    return t;
  }
  const Eigen::MatrixXd r = rigidity_matrix(edges, p);

  Eigen::VectorXd stress;
  if (m > c) {
    // Reduce to the c x c triangular factor; the left null space of R is
    // Q * [null(T^T) ; anything].
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(r);
    const Eigen::MatrixXd tri =
        qr.matrixQR().topRows(c).triangularView<Eigen::Upper>();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(
        tri, want_global ? Eigen::ComputeFullU : 0);
    t.rank = numerical_rank(svd.singularValues(), m, c, opts.rel_tol);
    t.local = t.rank == expected;
    if (want_global && t.local) {
      const Eigen::VectorXd h = random_vector(m, rng);
      const auto u0 = svd.matrixU().rightCols(c - t.rank);
      Eigen::VectorXd z(m);
      z.head(c) = u0 * (u0.transpose() * h.head(c));
      z.tail(m - c) = h.tail(m - c);
      stress = qr.householderQ() * z;
    }
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(r,
                                       want_global ? Eigen::ComputeFullU : 0);
    t.rank = numerical_rank(svd.singularValues(), m, c, opts.rel_tol);
    t.local = t.rank == expected;
    if (want_global && t.local && t.rank < m) {
      const Eigen::VectorXd h = random_vector(m, rng);
      const auto u0 = svd.matrixU().rightCols(m - t.rank);
      stress = u0 * (u0.transpose() * h);
    }
  }
  if (!want_global)
    return t;
  if (!t.local) {
    t.diagnostic = "not locally rigid (rank " + std::to_string(t.rank) +
                   " < " + std::to_string(expected) + ")";
    return t;
  }
  if (stress.size() == 0) {
    t.diagnostic = "no self-stress: graph is not redundantly rigid";
    return t;
  }
  const Eigen::MatrixXd omega = stress_matrix(edges, stress, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega,
                                                    Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
  const double tol = n * ev.maxCoeff() * opts.rel_tol;
  t.stress_rank = static_cast<int>((ev.array() > tol).count());
  t.global = t.stress_rank == n - d - 1;
  if (!t.global)
    t.diagnostic = "stress rank " + std::to_string(t.stress_rank) + " < " +
                   std::to_string(n - d - 1);
  return t;
}

void validate(std::span<const Edge> edges, int n, int d) {
  require(d >= 1, ErrorKind::kInvalidParameter, "dimension must be >= 1");
  require(n >= 1, ErrorKind::kInvalidInput, "graph has no vertices");
  for (auto [a, b] : edges)
    require(a >= 0 && b >= 0 && a < n && b < n && a != b,
            ErrorKind::kInvalidInput, "invalid edge in rigidity input");
}

bool is_complete(std::span<const Edge> edges, int n) {
  UGraph g(n, edges);
  return g.edge_count() == static_cast<std::size_t>(n) * (n - 1) / 2;
}

// Cheap necessary conditions for global rigidity with n >= d + 2.
std::string fast_reject_reason(std::span<const Edge> edges, int n, int d) {
  UGraph g(n, edges);
  if (!g.connected())
    return "disconnected";
  for (int v = 0; v < n; ++v)
    if (g.degree(v) < d + 1)
      return "vertex " + std::to_string(v) + " has degree " +
             std::to_string(g.degree(v)) + " < " + std::to_string(d + 1);
  return {};
}

template <class Key>
Trial vote(int trials, Key key, auto run) {
  trials = std::max(1, trials);
  std::map<decltype(key(Trial{})), std::pair<int, Trial>> tally;
  for (int i = 0; i < trials; ++i) {
    Trial t = run(i);
    auto &slot = tally[key(t)];
    if (slot.first == 0)
      slot.second = t;
    if (++slot.first * 2 > trials)
      return slot.second;
  }
  // No strict majority (even trial count split): most votes, first seen.
  auto best = tally.begin();
  for (auto it = tally.begin(); it != tally.end(); ++it)
    if (it->second.first > best->second.first)
      best = it;
  return best->second.second;
}

} // namespace

int numerical_rank(const Eigen::VectorXd &singular_values, Eigen::Index rows,
                   Eigen::Index cols, double rel_tol) {
  if (singular_values.size() == 0)
    return 0;
  const double tol = static_cast<double>(std::max(rows, cols)) *
                     singular_values.maxCoeff() * rel_tol;
  return static_cast<int>((singular_values.array() > tol).count());
}

LocalRigidity local_rigidity(std::span<const Edge> edges, int n, int d,
                             std::uint64_t seed, const RigidityOptions &opts) {
  validate(edges, n, d);
  if (n <= d + 1) {
    const bool complete = is_complete(edges, n);
    return {complete, static_cast<int>(UGraph(n, edges).edge_count())};
  }
  Trial t = vote(
      opts.trials, [](const Trial &x) { return x.local; },
      [&](int i) { return run_trial(edges, n, d, seed, i, opts, false); });
  return {t.local, t.rank};
}

RigidityReport global_rigidity(std::span<const Edge> edges, int n, int d,
                               std::uint64_t seed,
                               const RigidityOptions &opts) {
  validate(edges, n, d);
  RigidityReport rep;
  if (n <= d + 1) {
    const bool complete = is_complete(edges, n);
    rep.locally_rigid = rep.globally_rigid = complete;
    rep.rigidity_rank = static_cast<int>(UGraph(n, edges).edge_count());
    rep.diagnostic = complete ? "simplex" : "incomplete graph on <= d+1 vertices";
    return rep;
  }
  if (opts.fast_reject) {
    const std::string why = fast_reject_reason(edges, n, d);
    if (!why.empty()) {
      rep.diagnostic = "fast rejection (local rigidity not evaluated): " + why;
      return rep;
    }
  }
  int used = 0;
  Trial t = vote(
      opts.trials,
      [](const Trial &x) { return std::pair(x.local, x.global); },
      [&](int i) {
        ++used;
        return run_trial(edges, n, d, seed, i, opts, true);
      });
  rep.locally_rigid = t.local;
  rep.globally_rigid = t.global;
  rep.rigidity_rank = t.rank;
  rep.stress_rank = t.stress_rank;
  rep.trials = used;
  rep.diagnostic = t.diagnostic;
  return rep;
}

} // namespace ordembed
