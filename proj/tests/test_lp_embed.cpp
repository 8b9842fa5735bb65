#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ordembed/error.hpp"
#include "ordembed/knn.hpp"
#include "ordembed/lp_embed.hpp"
#include "ordembed/metrics.hpp"
#include "ordembed/synthetic.hpp"
#include "support.hpp"

using namespace ordembed;

namespace {

LinearProgram textbook() {
  // min -x - y  s.t.  x + 2y <= 4,  3x + y <= 6
  LinearProgram lp;
  lp.cost = Eigen::Vector2d(-1.0, -1.0);
  lp.names = {"x", "y"};
  lp.rows.push_back({{{0, 1.0}, {1, 2.0}}, RowSense::kLe, 4.0, "c1"});
  lp.rows.push_back({{{0, 3.0}, {1, 1.0}}, RowSense::kLe, 6.0, "c2"});
  return lp;
}

LinearProgram random_feasible(std::mt19937_64 &rng, int vars, int rows) {
  // Rows built around a known nonnegative point so the program is feasible;
  // positive costs keep it bounded.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x0 = testing::uniform_matrix(vars, 1, rng, 0.0, 2.0);
  LinearProgram lp;
  lp.cost = testing::uniform_matrix(vars, 1, rng, 0.1, 1.0);
  for (int r = 0; r < rows; ++r) {
    LpRow row;
    double lhs = 0.0;
    for (int v = 0; v < vars; ++v) {
      const double c = u(rng);
      row.terms.emplace_back(v, c);
      lhs += c * x0(v);
    }
    row.sense = r % 3 == 0 ? RowSense::kEq : r % 3 == 1 ? RowSense::kGe
                                                        : RowSense::kLe;
    row.rhs = row.sense == RowSense::kEq ? lhs
              : row.sense == RowSense::kGe ? lhs - 0.5
                                           : lhs + 0.5;
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

double random_baseline(const KnnGraph &g, std::uint64_t seed) {
  double sum = 0.0;
  for (int t = 0; t < 5; ++t)
    sum += a_error(g, testing::uniform_cloud(2, g.size(), seed * 31 + t));
  return sum / 5;
}

} // namespace

TEST_CASE("solvers agree on small programs") {
  for (const auto &name : {"simplex", "ipm"}) {
    const auto s = make_lp_solver(name)->solve(textbook());
    CAPTURE(name);
    CHECK(s.objective == doctest::Approx(-2.8).epsilon(1e-9));
    CHECK(s.x(0) == doctest::Approx(1.6).epsilon(1e-7));
    CHECK(s.x(1) == doctest::Approx(1.2).epsilon(1e-7));
  }
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    std::mt19937_64 rng(seed);
    const LinearProgram lp = random_feasible(rng, 4 + seed % 8, 2 + seed % 5);
    const LpSolution a = SimplexSolver().solve(lp);
    const LpSolution b = InteriorPointSolver().solve(lp);
    CAPTURE(seed);
    CHECK(lp_violation(lp, a.x) < 1e-9);
    CHECK(lp_violation(lp, b.x) < 1e-7);
    CHECK(std::abs(a.objective - b.objective) < 1e-6 * (1 + std::abs(a.objective)));
  }
}

TEST_CASE("solver failures") {
  LinearProgram infeasible;
  infeasible.cost = Eigen::VectorXd::Ones(1);
  infeasible.rows.push_back({{{0, 1.0}}, RowSense::kLe, -1.0, "neg"});
  LinearProgram unbounded;
  unbounded.cost = -Eigen::VectorXd::Ones(1);
  unbounded.rows.push_back({{{0, 1.0}}, RowSense::kGe, 1.0, "lo"});
  for (const auto &name : {"simplex", "ipm"}) {
    CAPTURE(name);
    const auto solver = make_lp_solver(name);
    CHECK_THROWS_AS(solver->solve(infeasible), Error);
    CHECK_THROWS_AS(solver->solve(unbounded), Error);
  }
  CHECK_THROWS_AS(make_lp_solver("glpk"), Error);
}

TEST_CASE("complete graph on three points needs no slack") {
  Digraph g(3, {{1, 2}, {0, 2}, {0, 1}});
  for (const char *solver : {"simplex", "ipm"}) {
    LpEmConfig c;
    c.solver = solver;
    const LpEmResult r = lp_solve(g, c);
    CHECK(r.objective < 1e-8);
    CHECK(r.violation < 1e-6);
    CHECK(r.radii.sum() == doctest::Approx(3.0));
  }
}

TEST_CASE("solutions satisfy every emitted constraint") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const int n = 10 + 4 * static_cast<int>(seed);
    const PointCloud x = testing::uniform_cloud(2, n, seed);
    const KnnGraph g = build_knn_graph(x, 3 + seed % 4);
    LpEmConfig c;
    c.seed = seed;
    const LpEmResult r = lp_solve(g, c);
    CAPTURE(seed);
    CHECK(r.violation < 1e-6);
    // Independent re-check against the graph, not the emitted rows.
    const LpEmProblem &p = r.problem;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j)
          continue;
        const double slack = r.x(p.radius_var(n - 1) + 1 + i * (n - 1) +
                                 (j < i ? j : j - 1));
        if (g.graph().has_edge(i, j))
          CHECK(r.distances(i, j) <= r.radii(i) + slack + 1e-6);
        else
          CHECK(r.distances(i, j) >= r.radii(i) - slack + p.margin - 1e-6);
      }
    for (const Triangle &t : p.triangles)
      CHECK(r.distances(t[0], t[1]) <=
            r.distances(t[0], t[2]) + r.distances(t[2], t[1]) + 1e-6);
    CHECK(std::abs(r.radii.sum() - n) < 1e-6);
    CHECK(r.distances == r.distances.transpose());
    if (n <= 18) {
      c.solver = "simplex";
      CHECK(lp_solve(g, c).objective ==
            doctest::Approx(r.objective).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("realizable ordinal data gives zero objective") {
  // True distances with radii halfway to the next neighbor satisfy every
  // constraint when the gaps exceed the margin after scaling.
  int tested = 0;
  for (std::uint64_t seed = 0; tested < 5 && seed < 50; ++seed) {
    const int n = 14, k = 4;
    const PointCloud x = testing::uniform_cloud(2, n, 500 + seed);
    const KnnGraph g = build_knn_graph(x, k);
    Eigen::MatrixXd dist(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dist(i, j) = (x.point(i) - x.point(j)).norm();
    Eigen::VectorXd radius(n);
    double gap = 1e300;
    for (int i = 0; i < n; ++i) {
      std::vector<double> row;
      for (int j = 0; j < n; ++j)
        if (j != i)
          row.push_back(dist(i, j));
      std::sort(row.begin(), row.end());
      radius(i) = 0.5 * (row[k - 1] + row[k]);
      gap = std::min(gap, row[k] - radius(i));
    }
    const double scale = n / radius.sum();
    if (gap * scale < 2e-3)
      continue;
    ++tested;
    const LpEmResult r = lp_solve(g, LpEmConfig{.seed = seed});
    CHECK(r.objective < 1e-7);
  }
  CHECK(tested == 5);
}

TEST_CASE("triangle samples are nested and valid") {
  std::mt19937_64 rng(4);
  const Digraph g = testing::random_digraph(25, 0.15, rng);
  const auto big = sample_triangles(g, 800, 9);
  REQUIRE(big.size() == 800);
  std::set<Triangle> unique(big.begin(), big.end());
  CHECK(unique.size() == big.size());
  for (const Triangle &t : big) {
    CHECK(t[0] < t[1]);
    CHECK(t[2] != t[0]);
    CHECK(t[2] != t[1]);
  }
  for (int budget : {0, 10, 100, 400}) {
    const auto small = sample_triangles(g, budget, 9);
    REQUIRE(static_cast<int>(small.size()) == budget);
    CHECK(std::equal(small.begin(), small.end(), big.begin()));
  }
  // Budget beyond every triple returns all of them.
  const Digraph tiny(5, {{1}, {2}, {3}, {4}, {0}});
  CHECK(sample_triangles(tiny, 1000, 1).size() == 5 * 4 / 2 * 3);
}

TEST_CASE("objective never decreases with more triangles") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const PointCloud x = generate(default_spec(DensityKind::kPC, seed), 20);
    const KnnGraph g = build_knn_graph(x, 6);
    double last = -1.0;
    for (int budget : {0, 20, 80, 200, 400, 1000}) {
      LpEmConfig c;
      c.seed = seed;
      c.triangle_budget = budget;
      const double obj = lp_solve(g, c).objective;
      CAPTURE(budget);
      CHECK(obj >= last - 1e-6);
      last = obj;
    }
  }
}

TEST_CASE("LP embedding beats random coordinates in the dense regime") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PointCloud x = generate(default_spec(DensityKind::kPC, seed), 30);
    const KnnGraph g = build_knn_graph(x, 15);
    LpEmConfig c;
    c.seed = seed;
    const double lp = a_error(g, lpem_embed(g, 2, c));
    const double rnd = random_baseline(g, seed);
    CAPTURE(seed);
    CAPTURE(lp);
    CAPTURE(rnd);
    CHECK(lp < rnd);
  }
}

TEST_CASE("LP embedding of a Gaussian sample, n = 100, k = 50") {
  SyntheticDensitySpec spec = default_spec(DensityKind::kGauss, 3);
  const PointCloud x = generate(spec, 100);
  const KnnGraph g = build_knn_graph(x, 50);
  const double lp = a_error(g, lpem_embed(g, 2, LpEmConfig{.seed = 3}));
  const double rnd = random_baseline(g, 3);
  CAPTURE(lp);
  CAPTURE(rnd);
  CHECK(lp < 0.5 * rnd);
}

TEST_CASE("guards, determinism and export") {
  const PointCloud x = testing::uniform_cloud(2, 40, 1);
  const KnnGraph g = build_knn_graph(x, 5);
  CHECK_THROWS_AS(lp_solve(g, LpEmConfig{.max_n = 30}), Error);
  try {
    lp_solve(g, LpEmConfig{.max_n = 30});
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kInvalidParameter);
  }
  const PointCloud small = testing::uniform_cloud(2, 12, 2);
  const KnnGraph h = build_knn_graph(small, 3);
  CHECK(lpem_embed(h, 2, LpEmConfig{.seed = 5}) ==
        lpem_embed(h, 2, LpEmConfig{.seed = 5}));

  std::ostringstream out;
  write_lp(out, textbook());
  CHECK(out.str() == "Minimize\n obj: - x - y\nSubject To\n c1: x + 2 y <= 4\n"
                     " c2: 3 x + y <= 6\nBounds\n x >= 0\n y >= 0\nEnd\n");

  const LpEmProblem p = build_lp(h.graph(), LpEmConfig{.triangle_budget = 7});
  CHECK(p.lp.rows.size() == std::size_t(12 * 11 + 1 + 7));
  CHECK(p.lp.variables() == 12 * 11 / 2 + 12 + 12 * 11);
  CHECK(p.margin == doctest::Approx(1e-3));
  std::set<int> ids;
  for (int i = 0; i < 12; ++i)
    for (int j = i + 1; j < 12; ++j) {
      CHECK(p.distance_var(i, j) == p.distance_var(j, i));
      ids.insert(p.distance_var(i, j));
    }
  CHECK(ids.size() == 66);
  CHECK(*ids.rbegin() == 65);
}
