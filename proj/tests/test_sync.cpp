#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "ordembed/error.hpp"
#include "ordembed/knn.hpp"
#include "ordembed/metrics.hpp"
#include "ordembed/seeding.hpp"
#include "ordembed/sync.hpp"
#include "ordembed/synthetic.hpp"
#include "support.hpp"

using namespace ordembed;

namespace {

Eigen::MatrixXd columns(const Eigen::MatrixXd &x, const std::vector<int> &ids) {
  Eigen::MatrixXd out(x.rows(), ids.size());
  for (std::size_t c = 0; c < ids.size(); ++c)
    out.col(c) = x.col(ids[c]);
  return out;
}

struct Similarity {
  double c;
  Eigen::MatrixXd o;
  Eigen::VectorXd t;
  Eigen::MatrixXd apply(const Eigen::MatrixXd &y) const {
    return (c * o * y).colwise() + t;
  }
};

Similarity random_similarity(int d, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> scale(0.2, 5.0);
  std::bernoulli_distribution flip(0.5);
  Similarity s;
  s.c = scale(rng);
  s.o = testing::random_orthogonal(d, rng, flip(rng));
  s.t = 10.0 * testing::gaussian_matrix(d, 1, rng);
  return s;
}

// Patch embedder returning the true patch coordinates under a random
// similarity drawn from the patch seed.
PatchEmbedder truth_embedder(const Eigen::MatrixXd &truth) {
  return [truth](const Patch &p, const Digraph &, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_similarity(static_cast<int>(truth.rows()), rng)
        .apply(columns(truth, p.all));
  };
}

struct Instance {
  PointCloud truth;
  KnnGraph graph;
  PatchSet patches;
};

Instance make_instance(int d, int n, int mps, std::uint64_t seed,
                       bool skip_rigidity = true) {
  Instance in;
  in.truth = testing::uniform_cloud(d, n, seed);
  in.graph = build_knn_graph(in.truth, sparse_k(n) + 2);
  DecomposeOptions o;
  o.dim = d;
  o.mps = mps;
  o.seed = seed;
  o.skip_rigidity = skip_rigidity;
  in.patches = decompose(in.graph, o);
  return in;
}

std::vector<LocalEmbedding> transformed_patches(const Instance &in,
                                                std::mt19937_64 &rng,
                                                std::vector<Similarity> *sims =
                                                    nullptr) {
  std::vector<LocalEmbedding> local;
  for (const auto &p : in.patches.patches) {
    const Similarity s = random_similarity(in.truth.dim(), rng);
    local.push_back({p.id, p.all, s.apply(columns(in.truth.coords(), p.all)),
                     EmbeddingSource::kGroundTruthSimilarity});
    if (sims)
      sims->push_back(s);
  }
  return local;
}

// Complete graph on the union of the given vertex sets.
UGraph complete_within(int n, const std::vector<std::vector<int>> &sets) {
  std::vector<Edge> e;
  for (const auto &s : sets)
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = i + 1; j < s.size(); ++j)
        e.emplace_back(std::min(s[i], s[j]), std::max(s[i], s[j]));
  std::sort(e.begin(), e.end());
  e.erase(std::unique(e.begin(), e.end()), e.end());
  return UGraph(n, e);
}

} // namespace

TEST_CASE("two-patch scale example") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd y = testing::uniform_matrix(2, 12, rng);
  std::vector<int> ids(12);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<LocalEmbedding> local{{0, ids, y}, {1, ids, 2.0 * y}};
  const auto r = scale_sync(local, {{0, 1, 12}});
  CHECK(r.lambda(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.lambda(1, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.lambda(0, 0) == 1.0);
  CHECK(r.scales(1) / r.scales(0) == doctest::Approx(2.0).epsilon(1e-12));
  const Eigen::MatrixXd a = local[0].coords / r.scales(0);
  const Eigen::MatrixXd b = local[1].coords / r.scales(1);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("identical patches get equal scales") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd y = testing::uniform_matrix(3, 9, rng);
  std::vector<int> ids(9);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<LocalEmbedding> local(4, LocalEmbedding{0, ids, y});
  std::vector<PatchEdge> edges;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      edges.push_back({a, b, 9});
  const auto r = scale_sync(local, edges);
  for (int i = 0; i < 4; ++i)
    CHECK(r.scales(i) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("scale sync recovers scale ratios") {
  SUBCASE("full overlap, five patches") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.1, 10.0);
      const Eigen::MatrixXd y = testing::uniform_matrix(2, 15, rng);
      std::vector<int> ids(15);
      std::iota(ids.begin(), ids.end(), 0);
      std::vector<double> c(5);
      std::vector<LocalEmbedding> local;
      for (int i = 0; i < 5; ++i) {
        c[i] = u(rng);
        const Eigen::MatrixXd o = testing::random_orthogonal(2, rng);
        local.push_back({i, ids, c[i] * o * y});
      }
      std::vector<PatchEdge> edges;
      for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b)
          edges.push_back({a, b, 15});
      const auto r = scale_sync(local, edges);
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
          CHECK(std::abs(r.scales(i) / r.scales(j) / (c[i] / c[j]) - 1.0) <
                1e-10);
      for (const auto &e : edges)
        CHECK(r.lambda(e.a, e.b) * r.lambda(e.b, e.a) ==
              doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("partial overlap on a sparse patch graph") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Instance in = make_instance(2, 300, 60, seed);
      std::mt19937_64 rng(seed + 100);
      std::vector<Similarity> sims;
      const auto local = transformed_patches(in, rng, &sims);
      const auto r = scale_sync(local, in.patches.edges);
      for (std::size_t i = 0; i < sims.size(); ++i)
        CHECK(std::abs(r.scales(i) / r.scales(0) / (sims[i].c / sims[0].c) -
                       1.0) < 1e-10);
      CHECK(r.scales.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("unnormalized power iteration is biased off complete patch graphs") {
  // Path of three patches: Lambda itself has the true scales as a Perron
  // vector only when all degrees agree.
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd x = testing::uniform_matrix(2, 30, rng);
  std::vector<int> p0(12), p1(12), p2(12);
  std::iota(p0.begin(), p0.end(), 0);
  std::iota(p1.begin(), p1.end(), 9);
  std::iota(p2.begin(), p2.end(), 18);
  const std::vector<double> c{1.0, 3.0, 0.5};
  std::vector<LocalEmbedding> local{{0, p0, c[0] * columns(x, p0)},
                                    {1, p1, c[1] * columns(x, p1)},
                                    {2, p2, c[2] * columns(x, p2)}};
  const std::vector<PatchEdge> edges{{0, 1, 3}, {1, 2, 3}};
  ScaleSyncOptions plain;
  plain.degree_normalized = false;
  const auto biased = scale_sync(local, edges, plain);
  const auto exact = scale_sync(local, edges);
  CHECK(std::abs(exact.scales(1) / exact.scales(0) - 3.0) < 1e-10);
  CHECK(std::abs(exact.scales(2) / exact.scales(0) - 0.5) < 1e-10);
  CHECK(std::abs(biased.scales(1) / biased.scales(0) - 3.0) > 1e-3);
}

TEST_CASE("scale sync input errors") {
  std::vector<int> ids{0, 1, 2, 3};
  Eigen::MatrixXd y(2, 4);
  y << 0, 0, 1, 1, 0, 0, 0, 1; // points 0 and 1 coincide
  std::vector<LocalEmbedding> local{{0, ids, y}, {1, ids, y}};
  // 6 pairs, one zero distance skipped: still enough.
  CHECK(scale_sync(local, {{0, 1, 4}}).scales(0) ==
        doctest::Approx(1.0).epsilon(1e-14));

  Eigen::MatrixXd z(2, 3);
  z << 0, 0, 1, 0, 0, 1; // two ratios left after skipping
  const std::vector<int> three_ids{0, 1, 2};
  std::vector<LocalEmbedding> bad{{0, three_ids, z}, {1, three_ids, z}};
  try {
    scale_sync(bad, {{0, 1, 3}});
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kDegenerateInput);
  }

  std::vector<LocalEmbedding> three{{0, ids, y}, {1, ids, y}, {2, ids, y}};
  try {
    scale_sync(three, {{0, 1, 4}});
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kStructuralError);
  }
}

TEST_CASE("pairwise alignment") {
  std::mt19937_64 rng(11);
  SUBCASE("rotation recovered exactly") {
    const Eigen::MatrixXd y = testing::uniform_matrix(2, 8, rng);
    const double th = 0.7;
    Eigen::MatrixXd r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::MatrixXd yj = (r * y).colwise() + Eigen::Vector2d(3, -1);
    const Eigen::MatrixXd h = pairwise_align(y, yj);
    CHECK((h - r).norm() < 1e-10);
  }
  SUBCASE("reflection detected") {
    const Eigen::MatrixXd y = testing::uniform_matrix(3, 10, rng);
    const Eigen::MatrixXd f = testing::random_orthogonal(3, rng, true);
    const Eigen::MatrixXd h = pairwise_align(y, f * y);
    CHECK(h.determinant() == doctest::Approx(-1.0));
    CHECK((h - f).norm() < 1e-10);
  }
  SUBCASE("random transforms on shared vertices") {
    for (int trial = 0; trial < 50; ++trial) {
      const int d = 2 + trial % 2;
      const Eigen::MatrixXd x = testing::uniform_matrix(d, 40, rng);
      std::vector<int> a(25), b(25);
      std::iota(a.begin(), a.end(), 0);
      std::iota(b.begin(), b.end(), 15);
      const Similarity si = random_similarity(d, rng);
      Similarity sj = random_similarity(d, rng);
      sj.c = si.c;
      LocalEmbedding p{0, a, si.apply(columns(x, a))};
      LocalEmbedding q{1, b, sj.apply(columns(x, b))};
      const Eigen::MatrixXd h = pairwise_align(p, q);
      CHECK((h.transpose() * h - Eigen::MatrixXd::Identity(d, d)).norm() <
            1e-12);
      // residual on the 10 shared vertices
      Eigen::MatrixXd yi = p.coords.rightCols(10);
      Eigen::MatrixXd yj = q.coords.leftCols(10);
      yi.colwise() -= yi.rowwise().mean();
      yj.colwise() -= yj.rowwise().mean();
      CHECK((h * yi - yj).norm() < 1e-9);
    }
  }
  SUBCASE("degenerate shared sets") {
    Eigen::MatrixXd line(2, 5);
    line << 0, 1, 2, 3, 4, 0, 2, 4, 6, 8;
    CHECK_THROWS_AS(pairwise_align(line, line), Error);
    try {
      pairwise_align(line, line);
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::kDegenerateAlignment);
    }
    const Eigen::MatrixXd two = testing::uniform_matrix(2, 2, rng);
    CHECK_THROWS_AS(pairwise_align(two, two), Error);
  }
}

TEST_CASE("rotation sync") {
  SUBCASE("single patch") {
    const auto r = rotation_sync({}, 1, 3);
    CHECK(r.h[0] == Eigen::MatrixXd::Identity(3, 3));
  }
  SUBCASE("two patches") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd rot = testing::random_orthogonal(2, rng);
    const auto r = rotation_sync({{0, 1, rot}}, 2, 2);
    CHECK((r.h[0] - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-10);
    CHECK((r.h[1] * r.h[0].transpose() - rot).norm() < 1e-10);
    CHECK(r.consistency < 1e-10);
  }
  SUBCASE("noiseless recovery up to gauge") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      std::mt19937_64 rng(seed);
      const int d = 2 + seed % 2;
      const int np = 10;
      std::bernoulli_distribution flip(0.5), keep(seed % 3 ? 0.4 : 1.0);
      std::vector<Eigen::MatrixXd> o;
      for (int i = 0; i < np; ++i)
        o.push_back(testing::random_orthogonal(d, rng, flip(rng)));
      std::vector<Alignment> al;
      for (int a = 0; a < np; ++a)
        for (int b = a + 1; b < np; ++b)
          if (b == a + 1 || keep(rng))
            al.push_back({a, b, o[b] * o[a].transpose()});
      const auto r = rotation_sync(al, np, d);
      // h_i = O_i G for a single orthogonal G
      const Eigen::MatrixXd g = o[0].transpose() * r.h[0];
      double worst = 0.0;
      for (int i = 0; i < np; ++i) {
        CHECK((r.h[i].transpose() * r.h[i] - Eigen::MatrixXd::Identity(d, d))
                  .norm() < 1e-8);
        worst = std::max(worst, (r.h[i] - o[i] * g).norm());
      }
      CHECK(worst < 1e-8);
    }
  }
  SUBCASE("disconnected alignments") {
    Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(rotation_sync({{0, 1, i2}}, 3, 2), Error);
  }
}

TEST_CASE("translation sync") {
  std::mt19937_64 rng(21);
  SUBCASE("single patch is recentred") {
    const Eigen::MatrixXd y =
        (testing::uniform_matrix(2, 10, rng).array() + 5.0).matrix();
    std::vector<int> ids(10);
    std::iota(ids.begin(), ids.end(), 0);
    const auto r = translation_sync({{0, ids, y}}, complete_within(10, {ids}));
    const Eigen::MatrixXd expect = y.colwise() - y.rowwise().mean();
    CHECK((r.coords - expect).norm() < 1e-12);
    CHECK(r.residual.maxCoeff() < 1e-12);
  }
  SUBCASE("offset patches") {
    const Eigen::MatrixXd x = testing::uniform_matrix(2, 16, rng);
    std::vector<int> a(10), b(10);
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 6);
    const Eigen::Vector2d t(4.0, -7.0);
    std::vector<LocalEmbedding> local{
        {0, a, columns(x, a)}, {1, b, columns(x, b).colwise() + t}};
    const auto r = translation_sync(local, complete_within(16, {a, b}));
    const Eigen::MatrixXd expect = x.colwise() - x.rowwise().mean();
    CHECK((r.coords - expect).norm() < 1e-12);
    CHECK(r.residual.maxCoeff() < 1e-12);
    CHECK((r.translations[1] - r.translations[0] + t).norm() < 1e-12);
  }
  SUBCASE("noiseless multi-patch") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const int d = 2 + seed % 2;
      const Instance in = make_instance(d, 150, 50, seed);
      std::vector<LocalEmbedding> local;
      std::mt19937_64 r2(seed);
      for (const auto &p : in.patches.patches) {
        const Eigen::VectorXd t = testing::gaussian_matrix(d, 1, r2);
        local.push_back({p.id, p.all, columns(in.truth.coords(), p.all).colwise() + t});
      }
      const auto r = translation_sync(local, symmetrize(in.graph.graph()));
      CHECK(procrustes_error(in.truth, PointCloud(r.coords)) < 1e-8);
      CHECK(r.residual.maxCoeff() < 1e-9);
    }
  }
  SUBCASE("uncovered vertex") {
    std::vector<int> a{0, 1, 2};
    const auto g = complete_within(4, {{0, 1, 2, 3}});
    try {
      translation_sync({{0, a, testing::uniform_matrix(2, 3, rng)}}, g);
      FAIL("expected an error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::kStructuralError);
    }
  }
}

TEST_CASE("identity-stub pipeline is exact") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (int d : {2, 3}) {
      const Instance in = make_instance(d, 400, 120, seed, seed % 5 != 0);
      AsapConfig cfg;
      cfg.dim = d;
      cfg.seed = seed;
      cfg.source = EmbeddingSource::kGroundTruthSimilarity;
      const SyncSolution s = asap_embed(in.graph, in.patches, cfg,
                                        truth_embedder(in.truth.coords()));
      CHECK(procrustes_error(in.truth, s.fused) < 1e-6);
      CHECK(s.fused.size() == 400);
      CHECK(s.warnings.empty());
      for (const auto &h : s.rotations)
        CHECK((h.transpose() * h - Eigen::MatrixXd::Identity(d, d)).norm() <
              1e-8);
      for (double c : s.scales)
        CHECK(c > 0.0);
    }
  }
}

TEST_CASE("gauge invariance") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int d = 2 + seed % 2;
    const Instance in = make_instance(d, 250, 80, seed);
    std::mt19937_64 rng(seed + 7);
    // Noisy local embeddings so the check is not trivially exact.
    auto local = transformed_patches(in, rng);
    for (auto &p : local)
      p.coords += 0.01 * testing::gaussian_matrix(d, p.coords.cols(), rng);
    const Similarity g = random_similarity(d, rng);
    auto moved = local;
    for (auto &p : moved)
      p.coords = g.apply(p.coords);
    const UGraph ug = symmetrize(in.graph.graph());
    const auto a = synchronize(local, ug, d);
    const auto b = synchronize(moved, ug, d);
    CHECK(procrustes_error(a.fused, b.fused) < 1e-9);
  }
}

TEST_CASE("skipping scale sync breaks exactness with unequal scales") {
  const Instance in = make_instance(2, 300, 80, 4);
  std::mt19937_64 rng(4);
  const auto local = transformed_patches(in, rng);
  const UGraph ug = symmetrize(in.graph.graph());
  SyncOptions skip;
  skip.skip_scale_sync = true;
  CHECK(procrustes_error(in.truth, synchronize(local, ug, 2).fused) < 1e-8);
  CHECK(procrustes_error(in.truth, synchronize(local, ug, 2, skip).fused) >
        1e-3);
}

TEST_CASE("degenerate patch edge is dropped") {
  // Patches 0 and 1 share three collinear points; both also overlap patch 2
  // in general position.
  std::mt19937_64 rng(9);
  Eigen::MatrixXd x = testing::uniform_matrix(2, 30, rng);
  for (int v = 0; v < 3; ++v)
    x.col(v) = Eigen::Vector2d(0.1 * v, 0.2 * v);
  std::vector<int> p0, p1, p2;
  for (int v = 0; v < 3; ++v) {
    p0.push_back(v);
    p1.push_back(v);
  }
  for (int v = 3; v < 12; ++v)
    p0.push_back(v);
  for (int v = 12; v < 21; ++v)
    p1.push_back(v);
  for (int v = 3; v < 30; ++v)
    p2.push_back(v);
  std::vector<LocalEmbedding> local;
  for (const auto &ids : {p0, p1, p2}) {
    const Similarity s = random_similarity(2, rng);
    local.push_back({static_cast<int>(local.size()), ids,
                     s.apply(columns(x, ids))});
  }
  const UGraph g = complete_within(30, {p0, p1, p2});
  const auto s = synchronize(local, g, 2);
  REQUIRE(s.dropped_edges.size() == 1);
  CHECK(s.dropped_edges[0].a == 0);
  CHECK(s.dropped_edges[0].b == 1);
  CHECK(s.warnings.size() == 1);
  CHECK(procrustes_error(PointCloud(x), s.fused) < 1e-8);
}

TEST_CASE("failed patch embeddings") {
  const Instance in = make_instance(2, 300, 100, 2);
  const auto truth = truth_embedder(in.truth.coords());
  AsapConfig cfg;
  cfg.seed = 2;
  SUBCASE("retried once with a new seed") {
    std::vector<std::uint64_t> first(in.patches.patches.size(), 0);
    auto flaky = [&](const Patch &p, const Digraph &g, std::uint64_t seed) {
      if (first[p.id] == 0) {
        first[p.id] = seed;
        throw Error(ErrorKind::kNumericalError, "non-finite energy");
      }
      CHECK(seed != first[p.id]);
      return truth(p, g, seed);
    };
    const auto s = asap_embed(in.graph, in.patches, cfg, flaky);
    CHECK(s.warnings.empty());
    CHECK(procrustes_error(in.truth, s.fused) < 1e-6);
  }
  SUBCASE("excluded after a second failure") {
    auto broken = [&](const Patch &p, const Digraph &g, std::uint64_t seed) {
      Eigen::MatrixXd y = truth(p, g, seed);
      if (p.id == 1)
        y(0, 0) = std::nan("");
      return y;
    };
    try {
      const auto s = asap_embed(in.graph, in.patches, cfg, broken);
      CHECK(s.patch_ids.size() + 1 == in.patches.patches.size());
      REQUIRE(!s.warnings.empty());
      CHECK(s.warnings[0].find("patch 1 excluded") != std::string::npos);
    } catch (const Error &e) {
      // Removing the patch may uncover vertices or split the patch graph.
      CHECK(e.kind() == ErrorKind::kStructuralError);
      const std::string what = e.what();
      CHECK((what.find("translation_sync:") != std::string::npos ||
             what.find("patch_graph:") != std::string::npos));
    }
  }
}

TEST_CASE("errors carry the stage name") {
  std::vector<int> a{0, 1, 2, 3}, b{4, 5, 6, 7};
  std::mt19937_64 rng(1);
  std::vector<LocalEmbedding> local{{0, a, testing::uniform_matrix(2, 4, rng)},
                                    {1, b, testing::uniform_matrix(2, 4, rng)}};
  try {
    synchronize(local, complete_within(8, {a, b}), 2);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::kStructuralError);
    CHECK(std::string(e.what()).find("patch_graph: ") != std::string::npos);
  }
}

TEST_CASE("LOE pipeline is deterministic across thread counts") {
  SyntheticDensitySpec spec = default_spec(DensityKind::kPC, 5);
  const PointCloud x = generate(spec, 300);
  const KnnGraph g = build_knn_graph(x, sparse_k(300));
  AsapConfig cfg;
  cfg.mps = 100;
  cfg.seed = 5;
  cfg.loe.max_iters = 30;
  cfg.threads = 1;
  const auto one = asap_embed(g, cfg);
  cfg.threads = 3;
  const auto three = asap_embed(g, cfg);
  CHECK(one.fused.coords() == three.fused.coords());
  CHECK(to_json(one) == to_json(three));
  CHECK(a_error(g, one.fused) < 0.1);
}

TEST_CASE("solution JSON") {
  const Instance in = make_instance(2, 200, 80, 3);
  AsapConfig cfg;
  const auto s = asap_embed(in.graph, in.patches, cfg,
                            truth_embedder(in.truth.coords()));
  const auto j = nlohmann::json::parse(to_json(s));
  CHECK(j["scales"].size() == s.scales.size());
  CHECK(j["fused"].size() == 200);
  CHECK(j["rotations"][1].size() == 4);
  CHECK(j["rotations"][1][1].get<double>() == s.rotations[1](0, 1));
  CHECK(!j.contains("stage_seconds"));
  CHECK(nlohmann::json::parse(to_json(s, true)).contains("stage_seconds"));
}
