#include "ordembed/lp_embed.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ordembed/error.hpp"
#include "ordembed/seeding.hpp"

namespace ordembed {

int LpEmProblem::distance_var(int i, int j) const {
  if (i > j)
    std::swap(i, j);
  // Row-major upper triangle without the diagonal.
  return i * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::vector<Triangle> sample_triangles(const Digraph &g, int budget,
                                       std::uint64_t seed) {
  const int n = g.size();
  std::vector<Triangle> out;
  if (budget <= 0 || n < 3)
    return out;
  const long long all = static_cast<long long>(n) * (n - 1) / 2 * (n - 2);
  std::mt19937_64 rng(derive_seed(seed, {0x747269}));

  const UGraph u = symmetrize(g);
  std::vector<Triangle> local;
  for (int m = 0; m < n; ++m) {
    const auto nb = u.neighbors(m);
    for (std::size_t a = 0; a < nb.size(); ++a)
      for (std::size_t b = a + 1; b < nb.size(); ++b)
        local.push_back({nb[a], nb[b], m});
  }
  std::shuffle(local.begin(), local.end(), rng);
  std::set<Triangle> seen;
  for (const Triangle &t : local) {
    if (static_cast<int>(out.size()) == budget)
      return out;
    out.push_back(t);
    seen.insert(t);
  }
  if (budget >= all) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int m = 0; m < n; ++m)
          if (m != i && m != j && !seen.count({i, j, m}))
            out.push_back({i, j, m});
    return out;
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  while (static_cast<int>(out.size()) < budget) {
    int i = pick(rng), j = pick(rng);
    const int m = pick(rng);
    if (i == j || m == i || m == j)
      continue;
    if (i > j)
      std::swap(i, j);
    if (seen.insert({i, j, m}).second)
      out.push_back({i, j, m});
  }
  return out;
}

LpEmProblem build_lp(const Digraph &g, const LpEmConfig &config) {
  const int n = g.size();
  require(n >= 3, ErrorKind::kInvalidInput, "LP embedding needs n >= 3");
  require(n <= config.max_n, ErrorKind::kInvalidParameter,
          "n = " + std::to_string(n) + " exceeds the LP size guard max_n = " +
              std::to_string(config.max_n));
  require(config.margin_factor > 0, ErrorKind::kInvalidParameter,
          "margin factor must be > 0");
  const double v = config.total_radius > 0 ? config.total_radius : n;
  const int budget = config.triangle_budget < 0 ? 20 * n : config.triangle_budget;

  LpEmProblem p;
  p.n = n;
  p.margin = config.margin_factor * v / n;
  p.triangles = sample_triangles(g, budget, config.seed);
  LinearProgram &lp = p.lp;

  const int pairs = n * (n - 1) / 2;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      lp.names.push_back("d_" + std::to_string(i) + "_" + std::to_string(j));
  for (int i = 0; i < n; ++i)
    lp.names.push_back("r_" + std::to_string(i));
  int next = pairs + n;
  auto suffix = [](int i, int j) {
    return std::to_string(i) + "_" + std::to_string(j);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const bool edge = g.has_edge(i, j);
      const int slack = next++;
      lp.names.push_back((edge ? "a_" : "b_") + suffix(i, j));
      LpRow row;
      row.terms = {{p.distance_var(i, j), 1.0}, {p.radius_var(i), -1.0}};
      if (edge) {
        // D_ij <= R_i + alpha_ij
        row.terms.emplace_back(slack, -1.0);
        row.sense = RowSense::kLe;
        row.rhs = 0.0;
        row.name = "e_" + suffix(i, j);
      } else {
        // D_ij >= R_i - beta_ij + eps
        row.terms.emplace_back(slack, 1.0);
        row.sense = RowSense::kGe;
        row.rhs = p.margin;
        row.name = "n_" + suffix(i, j);
      }
      lp.rows.push_back(std::move(row));
    }
  LpRow total;
  for (int i = 0; i < n; ++i)
    total.terms.emplace_back(p.radius_var(i), 1.0);
  total.sense = RowSense::kEq;
  total.rhs = v;
  total.name = "budget";
  lp.rows.push_back(std::move(total));
  for (const Triangle &t : p.triangles) {
    LpRow row;
    row.terms = {{p.distance_var(t[0], t[1]), 1.0},
                 {p.distance_var(t[0], t[2]), -1.0},
                 {p.distance_var(t[2], t[1]), -1.0}};
    row.sense = RowSense::kLe;
    row.rhs = 0.0;
    row.name = "t_" + suffix(t[0], t[1]) + "_" + std::to_string(t[2]);
    lp.rows.push_back(std::move(row));
  }
  lp.cost = Eigen::VectorXd::Zero(next);
  lp.cost.tail(next - pairs - n).setOnes();
  return p;
}

LpEmResult lp_solve(const Digraph &g, const LpEmConfig &config) {
  LpEmResult r;
  r.problem = build_lp(g, config);
  const auto solver = make_lp_solver(config.solver);
  const LpSolution s = solver->solve(r.problem.lp);
  const int n = r.problem.n;
  r.x = s.x;
  r.objective = s.objective;
  r.iterations = s.iterations;
  r.violation = lp_violation(r.problem.lp, s.x);
  r.distances = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      r.distances(i, j) = r.distances(j, i) =
          std::max(0.0, s.x(r.problem.distance_var(i, j)));
  r.radii = s.x.segment(r.problem.radius_var(0), n);
  return r;
}

LpEmResult lp_solve(const KnnGraph &g, const LpEmConfig &config) {
  return lp_solve(g.graph(), config);
}

PointCloud lpem_embed(const KnnGraph &g, int d, const LpEmConfig &config) {
  const LpEmResult r = lp_solve(g, config);
  return stress_mds(r.distances, d, config.mds).cloud;
}

} // namespace ordembed
