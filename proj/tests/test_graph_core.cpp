#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "ordembed/error.hpp"
#include "ordembed/io.hpp"
#include "ordembed/knn.hpp"
#include "ordembed/metrics.hpp"
#include "ordembed/synthetic.hpp"
#include "support.hpp"

using namespace ordembed;

namespace {

// Fully sorts each row of the distance matrix by (distance, id).
std::vector<std::vector<int>> knn_by_full_sort(const Eigen::MatrixXd &x, int k) {
  const int n = static_cast<int>(x.cols());
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> row;
    for (int j = 0; j < n; ++j)
      if (j != i)
        row.emplace_back((x.col(i) - x.col(j)).norm(), j);
    std::sort(row.begin(), row.end());
    for (int t = 0; t < k; ++t)
      out[i].push_back(row[t].second);
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

// 2D similarity alignment: both reflection classes, optimal angle and scale in
// closed form.
double procrustes_2d_oracle(const Eigen::MatrixXd &ref,
                            const Eigen::MatrixXd &cand) {
  Eigen::MatrixXd x = ref.colwise() - ref.rowwise().mean();
  Eigen::MatrixXd y0 = cand.colwise() - cand.rowwise().mean();
  double best = 1e300;
  for (double s : {1.0, -1.0}) {
    Eigen::MatrixXd y = y0;
    y.row(1) *= s;
    double a = 0, b = 0;
    for (int i = 0; i < x.cols(); ++i) {
      a += x(0, i) * y(0, i) + x(1, i) * y(1, i);
      b += x(1, i) * y(0, i) - x(0, i) * y(1, i);
    }
    const double th = std::atan2(b, a);
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::MatrixXd ry = r * y;
    const double c = (x.array() * ry.array()).sum() / y.squaredNorm();
    best = std::min(best, (x - c * ry).squaredNorm() / x.squaredNorm());
  }
  return best;
}

} // namespace

TEST_CASE("knn on collinear triple") {
  Eigen::MatrixXd x(1, 3);
  x << 0, 1, 3;
  KnnGraph g = build_knn_graph(PointCloud(x), 1);
  CHECK(g.out(0)[0] == 1);
  CHECK(g.out(1)[0] == 0);
  CHECK(g.out(2)[0] == 1);
  CHECK(g.graph().edge_count() == 3);
}

TEST_CASE("knn ties go to smaller id") {
  Eigen::MatrixXd x(1, 3);
  x << 0, -1, 1;
  KnnGraph g = build_knn_graph(PointCloud(x), 1);
  CHECK(g.out(0)[0] == 1);
}

TEST_CASE("sparse and dense k rules") {
  CHECK(sparse_k(1000) == 14);
  CHECK(sparse_k(500) == 13);
  CHECK(dense_k(1000) == static_cast<int>(std::ceil(std::sqrt(1000 * std::log(1000.0)))));
}

TEST_CASE("knn agrees with full-sort oracle") {
  SUBCASE("10 uniform 2D points, k=3") {
    Eigen::MatrixXd x = testing::uniform_cloud(2, 10, 42).coords();
    KnnGraph g = build_knn_graph(PointCloud(x), 3);
    auto want = knn_by_full_sort(x, 3);
    for (int i = 0; i < 10; ++i)
      CHECK(std::vector<int>(g.out(i).begin(), g.out(i).end()) == want[i]);
  }
  SUBCASE("200 random instances") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> nd(2, 50), dd(1, 3);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = nd(rng), d = dd(rng);
      Eigen::MatrixXd x = testing::uniform_matrix(d, n, rng);
      std::uniform_int_distribution<int> kd(1, n - 1);
      const int k = kd(rng);
      KnnGraph g = build_knn_graph(PointCloud(x), k);
      auto want = knn_by_full_sort(x, k);
      bool ok = true;
      for (int i = 0; i < n; ++i)
        ok &= std::vector<int>(g.out(i).begin(), g.out(i).end()) == want[i];
      CHECK_MESSAGE(ok, "trial " << trial);
    }
  }
}

TEST_CASE("knn rejects bad k") {
  PointCloud c = testing::uniform_cloud(2, 5, 1);
  CHECK_THROWS_AS(build_knn_graph(c, 5), Error);
  CHECK_THROWS_AS(build_knn_graph(c, 0), Error);
}

TEST_CASE("a_error basics") {
  std::mt19937_64 rng(3);
  Digraph a = testing::random_digraph(3, 0.5, rng);
  CHECK(a_error(a, a) == 0.0);

  Digraph x(3, {{1}, {2}, {}});
  Digraph y(3, {{1, 2}, {}, {}});
  CHECK(a_error(x, y) == doctest::Approx(2.0 / 9.0).epsilon(1e-15));

  CHECK_THROWS_AS(a_error(x, Digraph(4, {{}, {}, {}, {}})), Error);
}

TEST_CASE("a_error matches dense count on random pairs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> nd(1, 30);
  std::uniform_real_distribution<double> pd(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const int n = nd(rng);
    Digraph a = testing::random_digraph(n, pd(rng), rng);
    Digraph b = testing::random_digraph(n, pd(rng), rng);
    const int diff = (testing::dense_adjacency(a) - testing::dense_adjacency(b))
                         .cwiseAbs()
                         .sum();
    const double e = a_error(a, b);
    CHECK(e == static_cast<double>(diff) / (n * n));
    CHECK(e == a_error(b, a));
    CHECK(e >= 0.0);
    CHECK(e <= 1.0);
    CHECK((e == 0.0) == (a == b));
  }
}

TEST_CASE("a_error worst case for disjoint k-regular graphs") {
  const int n = 50000, k = 22;
  std::vector<std::vector<int>> ta(n), tb(n);
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= k; ++j) {
      ta[i].push_back((i + j) % n);
      tb[i].push_back((i + k + j) % n);
    }
  const double e = a_error(Digraph(n, std::move(ta)), Digraph(n, std::move(tb)));
  CHECK(e == doctest::Approx(8.8e-4).epsilon(1e-12));
}

TEST_CASE("procrustes invariance") {
  Eigen::MatrixXd sq(2, 4);
  sq << 0, 1, 1, 0, 0, 0, 1, 1;
  const double th = std::numbers::pi / 6;
  Eigen::Matrix2d r;
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  Eigen::MatrixXd moved = 7.0 * r * sq;
  CHECK(procrustes_error(PointCloud(sq), PointCloud(moved)) < 1e-10);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 3;
    Eigen::MatrixXd x = testing::gaussian_matrix(d, 12, rng);
    Eigen::MatrixXd y = x + 0.3 * testing::gaussian_matrix(d, 12, rng);
    const double base = procrustes_error(PointCloud(x), PointCloud(y));
    Eigen::MatrixXd q = testing::random_orthogonal(d, rng, t % 2 == 1);
    Eigen::MatrixXd y2 = 3.5 * q * y;
    y2.colwise() += testing::gaussian_matrix(d, 1, rng).col(0);
    CHECK(std::abs(procrustes_error(PointCloud(x), PointCloud(y2)) - base) <
          1e-9);
    CHECK(procrustes_error(PointCloud(x), PointCloud(2.0 * q * x)) < 1e-10);
  }
}

TEST_CASE("procrustes matches 2D closed-form oracle") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd x = testing::uniform_matrix(2, 8, rng);
    Eigen::MatrixXd y = 0.5 * testing::random_orthogonal(2, rng, t % 2) * x;
    y.col(t % 8) += Eigen::Vector2d(0.4, -0.2);
    const double got = procrustes_error(PointCloud(x), PointCloud(y));
    CHECK(got == doctest::Approx(procrustes_2d_oracle(x, y)).epsilon(1e-12));
    CHECK(got > 1e-4);
  }
}

TEST_CASE("procrustes fit maps candidate onto reference") {
  std::mt19937_64 rng(21);
  Eigen::MatrixXd x = testing::gaussian_matrix(3, 10, rng);
  Eigen::MatrixXd y = 0.2 * testing::random_orthogonal(3, rng, true) * x;
  y.colwise() += Eigen::Vector3d(1, 2, 3);
  SimilarityFit fit = procrustes_fit(PointCloud(x), PointCloud(y));
  CHECK((fit.apply(y) - x).norm() < 1e-10);
  CHECK(fit.scale == doctest::Approx(5.0));
}

TEST_CASE("procrustes degenerate reference") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 4);
  Eigen::MatrixXd y = Eigen::MatrixXd::Random(2, 4);
  try {
    procrustes_error(PointCloud(x), PointCloud(y));
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDegenerateInput);
  }
}

TEST_CASE("generators") {
  SUBCASE("PC mass ratio") {
    PointCloud c = generate(default_spec(DensityKind::kPC, 1), 100000);
    const double right = (c.coords().row(0).array() > 0.5).count();
    const double left = c.size() - right;
    CHECK(std::abs(right / left - 4.0) < 0.1);
    CHECK(c.coords().minCoeff() >= 0.0);
    CHECK(c.coords().maxCoeff() <= 1.0);
  }
  SUBCASE("PCS mass ratio") {
    PointCloud c = generate(default_spec(DensityKind::kPCS, 2), 100000);
    int inside = 0;
    for (int i = 0; i < c.size(); ++i) {
      const auto p = c.point(i);
      inside += p(0) >= 0.25 && p(0) <= 0.75 && p(1) >= 0.25 && p(1) <= 0.75;
    }
    // density ratio = (inside / 0.25) / (outside / 0.75)
    const double ratio = (inside / 0.25) / ((c.size() - inside) / 0.75);
    CHECK(std::abs(ratio - 2.0) < 0.1);
    CHECK(c.coords().minCoeff() >= 0.0);
    CHECK(c.coords().maxCoeff() <= 1.0);
  }
  SUBCASE("Gauss mean") {
    SyntheticDensitySpec s = default_spec(DensityKind::kGauss, 3);
    s.center = 0.7;
    PointCloud c = generate(s, 100000);
    CHECK((c.coords().rowwise().mean().array() - 0.7).abs().maxCoeff() < 0.02);
  }
  SUBCASE("halfcube support and ratio") {
    PointCloud c = generate(default_spec(DensityKind::kHalfCube, 4), 50000);
    CHECK(c.dim() == 3);
    CHECK(c.coords().minCoeff() >= 0.0);
    CHECK(c.coords().maxCoeff() <= 1.0);
    const double right = (c.coords().row(0).array() > 0.5).count();
    CHECK(std::abs(right / (c.size() - right) - 4.0) < 0.2);
  }
  SUBCASE("donut support") {
    PointCloud c = generate(default_spec(DensityKind::kDonut, 5), 5000);
    for (int i = 0; i < c.size(); ++i) {
      const auto p = c.point(i);
      const double q = kDonutMajor - std::hypot(p(0), p(1));
      CHECK(q * q + p(2) * p(2) <= kDonutMinor * kDonutMinor);
    }
  }
  SUBCASE("determinism") {
    for (auto kind : {DensityKind::kPC, DensityKind::kPCS, DensityKind::kGauss,
                      DensityKind::kHalfCube, DensityKind::kDonut}) {
      auto s = default_spec(kind, 99);
      CHECK(generate(s, 300) == generate(s, 300));
      s.seed = 100;
      CHECK_FALSE(generate(s, 300) == generate(default_spec(kind, 99), 300));
    }
  }
  SUBCASE("bad dims") {
    auto s = default_spec(DensityKind::kPC);
    s.dim = 3;
    CHECK_THROWS_AS(generate(s, 10), Error);
    s = default_spec(DensityKind::kPC);
    s.ratio = 0.0;
    CHECK_THROWS_AS(generate(s, 10), Error);
  }
}

TEST_CASE("true densities integrate to one") {
  std::mt19937_64 rng(17);
  for (auto kind : {DensityKind::kPC, DensityKind::kPCS, DensityKind::kHalfCube}) {
    auto s = default_spec(kind);
    const int m = 200000;
    double acc = 0;
    Eigen::MatrixXd pts = testing::uniform_matrix(s.dim, m, rng);
    for (int i = 0; i < m; ++i)
      acc += true_density(s, pts.col(i));
    CHECK(acc / m == doctest::Approx(1.0).epsilon(0.01));
  }
  auto s = default_spec(DensityKind::kDonut);
  Eigen::MatrixXd pts = testing::uniform_matrix(3, 400000, rng, -1.4, 1.4);
  double acc = 0;
  for (int i = 0; i < pts.cols(); ++i)
    acc += true_density(s, pts.col(i));
  CHECK(acc / pts.cols() * std::pow(2.8, 3) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("cloud csv round trip") {
  Eigen::MatrixXd x(2, 3);
  x << 0.1, 1.0 / 3.0, -2.5e-300, std::numbers::pi, 1e10, -0.0;
  PointCloud c(x);
  std::stringstream ss;
  write_cloud(ss, c);
  CHECK(read_cloud(ss) == c);

  PointCloud labelled(x, {"a", "b", "c"});
  auto path = std::filesystem::temp_directory_path() / "ordembed_rt.csv";
  save_cloud(path, labelled);
  CHECK(load_cloud(path) == labelled);
  std::filesystem::remove(path);
}

TEST_CASE("cloud csv with leading label column and 1101 rows") {
  std::stringstream ss;
  ss << "city,lat,lon\n";
  for (int i = 0; i < 1101; ++i)
    ss << "c" << i << "," << 30 + i * 0.01 << "," << -100 - i * 0.02 << "\n";
  PointCloud c = read_cloud(ss);
  CHECK(c.size() == 1101);
  CHECK(c.dim() == 2);
  CHECK(c.labels()[5] == "c5");

  std::stringstream plain;
  plain << "lat,lon\n";
  for (int i = 0; i < 1101; ++i)
    plain << 30 + i * 0.01 << "," << -100 - i * 0.02 << "\n";
  CHECK(read_cloud(plain).size() == 1101);
}

TEST_CASE("cloud csv errors carry line numbers") {
  std::stringstream ss("x1,x2\n1,2\n3\n");
  try {
    read_cloud(ss);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kParseError);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::stringstream bad("x1,x2\n1,2\n3,abc\n");
  CHECK_THROWS_AS(read_cloud(bad), Error);
}

TEST_CASE("edge list parsing") {
  std::stringstream ok("# n=3 k=1\n0 1\n1 0\n2 1\n");
  EdgeList e = read_edge_list(ok);
  CHECK(e.graph.size() == 3);
  CHECK(e.k == 1);
  CHECK(e.graph.has_edge(2, 1));

  std::stringstream loop("0 1\n1 1\n");
  try {
    read_edge_list(loop);
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(err.kind() == ErrorKind::kParseError);
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
  std::stringstream dup("0 1\n# comment\n0 1\n");
  try {
    read_edge_list(dup);
    FAIL("expected throw");
  } catch (const Error &err) {
    CHECK(std::string(err.what()).find("line 3") != std::string::npos);
  }
  std::stringstream junk("0 x\n");
  CHECK_THROWS_AS(read_edge_list(junk), Error);
}

TEST_CASE("knn graph file round trip") {
  KnnGraph g = build_knn_graph(testing::uniform_cloud(2, 40, 8), 5);
  auto path = std::filesystem::temp_directory_path() / "ordembed_rt.edges";
  save_edge_list(path, g);
  CHECK(load_knn_graph(path) == g);
  std::filesystem::remove(path);

  std::stringstream trip;
  write_adjacency_triplets(trip, g.graph());
  std::string first;
  std::getline(trip, first);
  CHECK(first == "0," + std::to_string(g.out(0)[0]) + ",1");
}
