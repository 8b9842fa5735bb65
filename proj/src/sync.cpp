#include "ordembed/sync.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "json.hpp"
#include "ordembed/error.hpp"
#include "ordembed/linalg.hpp"
#include "ordembed/parallel.hpp"
#include "ordembed/seeding.hpp"

namespace ordembed {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Calls fn, re-throwing library errors with the stage name in front.
template <class F> auto staged(const char *stage, F &&fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error &e) {
    throw Error(e.kind(), std::string(stage) + ": " + e.detail());
  }
}

// Column pairs (i in p, j in q) of the vertices both patches contain.
std::vector<std::pair<int, int>> shared_columns(const LocalEmbedding &p,
                                                const LocalEmbedding &q) {
  std::vector<std::pair<int, int>> out;
  const auto &x = p.vertices;
  const auto &y = q.vertices;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i] < y[j])
      ++i;
    else if (y[j] < x[i])
      ++j;
    else
      out.emplace_back(static_cast<int>(i++), static_cast<int>(j++));
  }
  return out;
}

double median(std::vector<double> &v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + m, v.end());
  const double hi = v[m];
  if (v.size() % 2)
    return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + m);
  return 0.5 * (lo + hi);
}

void require_connected(int count, const std::vector<Edge> &edges,
                       const char *what) {
  if (count <= 1)
    return;
  std::vector<int> comp;
  const int nc = UGraph(count, edges).components(comp);
  require(nc == 1, ErrorKind::kStructuralError,
          std::string(what) + " is disconnected (" + std::to_string(nc) +
              " components)");
}

int centered_rank(const Eigen::MatrixXd &y) {
  const Eigen::MatrixXd c = y.colwise() - y.rowwise().mean();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(c).singularValues();
  if (sv.size() == 0 || sv(0) == 0.0)
    return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-9 * sv(0))
      ++r;
  return r;
}

} // namespace

const char *to_string(EmbeddingSource s) {
  switch (s) {
  case EmbeddingSource::kLoe:
    return "loe";
  case EmbeddingSource::kGroundTruthSimilarity:
    return "ground-truth-similarity";
  case EmbeddingSource::kExternal:
    return "external";
  }
  return "?";
}

double distance_ratio_median(const LocalEmbedding &p, const LocalEmbedding &q) {
  const auto shared = shared_columns(p, q);
  std::vector<double> ratios;
  ratios.reserve(shared.size() * (shared.size() - (shared.empty() ? 0 : 1)) / 2);
  for (std::size_t s = 0; s < shared.size(); ++s)
    for (std::size_t t = s + 1; t < shared.size(); ++t) {
      const double dp =
          (p.coords.col(shared[s].first) - p.coords.col(shared[t].first)).norm();
      const double dq = (q.coords.col(shared[s].second) -
                         q.coords.col(shared[t].second))
                            .norm();
      if (dp > 0.0 && dq > 0.0)
        ratios.push_back(dp / dq);
    }
  require(ratios.size() >= 3, ErrorKind::kDegenerateInput,
          "patches " + std::to_string(p.patch) + " and " +
              std::to_string(q.patch) + " have fewer than 3 usable distance "
              "ratios");
  return median(ratios);
}

ScaleSyncResult scale_sync(const std::vector<LocalEmbedding> &local,
                           const std::vector<PatchEdge> &edges,
                           const ScaleSyncOptions &opts) {
  const int np = static_cast<int>(local.size());
  require(np > 0, ErrorKind::kInvalidInput, "no patches");
  std::vector<Edge> ue;
  for (const auto &e : edges) {
    require(e.a >= 0 && e.b < np && e.a < e.b, ErrorKind::kInvalidInput,
            "patch edge out of range");
    ue.emplace_back(e.a, e.b);
  }
  require_connected(np, ue, "patch graph");

  ScaleSyncResult r;
  r.lambda = Eigen::MatrixXd::Identity(np, np);
  for (const auto &e : edges) {
    const double m = distance_ratio_median(local[e.a], local[e.b]);
    r.lambda(e.a, e.b) = m;
    r.lambda(e.b, e.a) = 1.0 / m;
  }

  Eigen::MatrixXd m = r.lambda;
  if (opts.degree_normalized)
    for (int i = 0; i < np; ++i)
      m.row(i) /= (m.row(i).array() > 0).count();

  Eigen::VectorXd v = Eigen::VectorXd::Ones(np);
  double change = 0.0;
  for (r.iterations = 1; r.iterations <= opts.max_iters; ++r.iterations) {
    Eigen::VectorXd next = m * v;
    next /= next.mean();
    change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (change <= opts.tol * v.cwiseAbs().maxCoeff())
      break;
  }
  if (r.iterations > opts.max_iters) {
    std::ostringstream msg;
    msg << "scale power iteration did not converge, last change " << change;
    throw Error(ErrorKind::kNumericalError, msg.str());
  }
  require(v.minCoeff() > 0.0, ErrorKind::kNumericalError,
          "scale eigenvector is not positive");
  r.scales = v;
  return r;
}

Eigen::MatrixXd pairwise_align(const Eigen::MatrixXd &yi,
                               const Eigen::MatrixXd &yj) {
  require(yi.rows() == yj.rows() && yi.cols() == yj.cols(),
          ErrorKind::kInvalidInput, "alignment inputs differ in shape");
  const int d = static_cast<int>(yi.rows());
  require(yi.cols() >= d + 1, ErrorKind::kDegenerateAlignment,
          "fewer than d + 1 shared vertices");
  require(centered_rank(yi) == d && centered_rank(yj) == d,
          ErrorKind::kDegenerateAlignment,
          "shared vertices do not span the embedding dimension");
  const Eigen::MatrixXd a = yi.colwise() - yi.rowwise().mean();
  const Eigen::MatrixXd b = yj.colwise() - yj.rowwise().mean();
  return polar_factor(b * a.transpose());
}

Eigen::MatrixXd pairwise_align(const LocalEmbedding &p,
                               const LocalEmbedding &q) {
  const auto shared = shared_columns(p, q);
  const Eigen::Index d = p.coords.rows();
  Eigen::MatrixXd yi(d, shared.size()), yj(d, shared.size());
  for (std::size_t s = 0; s < shared.size(); ++s) {
    yi.col(s) = p.coords.col(shared[s].first);
    yj.col(s) = q.coords.col(shared[s].second);
  }
  return pairwise_align(yi, yj);
}

RotationSyncResult rotation_sync(const std::vector<Alignment> &alignments,
                                 int patches, int d) {
  require(patches > 0 && d > 0, ErrorKind::kInvalidParameter,
          "need at least one patch and d >= 1");
  RotationSyncResult r;
  if (patches == 1) {
    r.h.assign(1, Eigen::MatrixXd::Identity(d, d));
    r.eigenvalues = Eigen::VectorXd::Ones(d);
    return r;
  }

  std::vector<Edge> ue;
  std::vector<int> degree(patches, 0);
  for (const auto &al : alignments) {
    require(al.a >= 0 && al.b >= 0 && al.a < patches && al.b < patches &&
                al.a != al.b,
            ErrorKind::kInvalidInput, "alignment patch index out of range");
    require(al.h.rows() == d && al.h.cols() == d, ErrorKind::kInvalidInput,
            "alignment is not d x d");
    ue.emplace_back(al.a, al.b);
    ++degree[al.a];
    ++degree[al.b];
  }
  require_connected(patches, ue, "alignment graph");

  // Block (a, b) relates the frames as h_a h_b^T, the transpose of the
  // measured a -> b map.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(alignments.size() * 2 * d * d);
  for (const auto &al : alignments) {
    const double w = 1.0 / std::sqrt(double(degree[al.a]) * degree[al.b]);
    for (int r0 = 0; r0 < d; ++r0)
      for (int c0 = 0; c0 < d; ++c0) {
        trip.emplace_back(al.a * d + r0, al.b * d + c0, w * al.h(c0, r0));
        trip.emplace_back(al.b * d + r0, al.a * d + c0, w * al.h(r0, c0));
      }
  }
  SparseMatrix s(patches * d, patches * d);
  s.setFromTriplets(trip.begin(), trip.end());

  const EigenPairs ep = top_eigenpairs(s, d);
  r.eigenvalues = ep.values;
  r.eigen_residual = ep.max_residual;

  r.h.resize(patches);
  for (int i = 0; i < patches; ++i)
    r.h[i] = polar_factor(ep.vectors.middleRows(i * d, d) /
                          std::sqrt(double(degree[i])));
  const Eigen::MatrixXd gauge = r.h[0].transpose();
  for (auto &h : r.h)
    h = h * gauge;
  for (auto &h : r.h)
    h = polar_factor(h);

  for (const auto &al : alignments)
    r.consistency = std::max(
        r.consistency, (r.h[al.b] * r.h[al.a].transpose() - al.h).norm());
  return r;
}

TranslationSyncResult translation_sync(const std::vector<LocalEmbedding> &aligned,
                                       const UGraph &g) {
  const int n = g.size();
  require(!aligned.empty(), ErrorKind::kInvalidInput, "no patches");
  const Eigen::Index d = aligned.front().coords.rows();
  TranslationSyncResult r;

  std::vector<int> covered(n, 0);
  std::vector<int> pos(n, -1);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, d);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v)
      v = parent[v] = parent[parent[v]];
    return v;
  };

  for (const auto &p : aligned) {
    require(p.coords.rows() == d &&
                p.coords.cols() == static_cast<Eigen::Index>(p.vertices.size()),
            ErrorKind::kInvalidInput, "patch coordinate shape mismatch");
    for (std::size_t c = 0; c < p.vertices.size(); ++c) {
      const int v = p.vertices[c];
      require(v >= 0 && v < n, ErrorKind::kInvalidInput,
              "patch vertex out of range");
      pos[v] = static_cast<int>(c);
      ++covered[v];
    }
    for (std::size_t c = 0; c < p.vertices.size(); ++c) {
      const int a = p.vertices[c];
      for (int b : g.neighbors(a)) {
        if (b <= a || pos[b] < 0)
          continue;
        const Eigen::VectorXd diff = p.coords.col(c) - p.coords.col(pos[b]);
        rhs.row(a) += diff.transpose();
        rhs.row(b) -= diff.transpose();
        trip.emplace_back(a, a, 1.0);
        trip.emplace_back(b, b, 1.0);
        trip.emplace_back(a, b, -1.0);
        trip.emplace_back(b, a, -1.0);
        parent[find(a)] = find(b);
        ++r.equations;
      }
    }
    for (int v : p.vertices)
      pos[v] = -1;
  }

  for (int v = 0; v < n; ++v)
    require(covered[v] > 0, ErrorKind::kStructuralError,
            "vertex " + std::to_string(v) + " is in no patch");
  int roots = 0;
  for (int v = 0; v < n; ++v)
    roots += find(v) == v;
  require(roots == 1, ErrorKind::kStructuralError,
          "translation system is disconnected (" + std::to_string(roots) +
              " components)");

  r.coords = Eigen::MatrixXd::Zero(d, n);
  if (n > 1) {
    // Vertex 0 is pinned to the origin; the rest solve the reduced Laplacian.
    std::vector<Eigen::Triplet<double>> reduced;
    reduced.reserve(trip.size());
    for (const auto &t : trip)
      if (t.row() > 0 && t.col() > 0)
        reduced.emplace_back(t.row() - 1, t.col() - 1, t.value());
    SparseMatrix lap(n - 1, n - 1);
    lap.setFromTriplets(reduced.begin(), reduced.end());
    Eigen::SimplicialLDLT<SparseMatrix> solver(lap);
    require(solver.info() == Eigen::Success, ErrorKind::kStructuralError,
            "translation system is singular");
    const Eigen::MatrixXd x = solver.solve(rhs.bottomRows(n - 1));
    require(solver.info() == Eigen::Success && x.allFinite(),
            ErrorKind::kNumericalError, "translation solve failed");
    r.coords.rightCols(n - 1) = x.transpose();
  }
  r.coords.colwise() -= r.coords.rowwise().mean();

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(n);
  r.translations.reserve(aligned.size());
  for (const auto &p : aligned) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
    for (std::size_t c = 0; c < p.vertices.size(); ++c)
      t += r.coords.col(p.vertices[c]) - p.coords.col(c);
    t /= static_cast<double>(p.vertices.size());
    for (std::size_t c = 0; c < p.vertices.size(); ++c)
      sq(p.vertices[c]) +=
          (r.coords.col(p.vertices[c]) - p.coords.col(c) - t).squaredNorm();
    r.translations.push_back(std::move(t));
  }
  r.residual.resize(n);
  for (int v = 0; v < n; ++v)
    r.residual(v) = std::sqrt(sq(v) / covered[v]);
  return r;
}

SyncSolution synchronize(std::vector<LocalEmbedding> local, const UGraph &g,
                         int d, const SyncOptions &opts) {
  const int np = static_cast<int>(local.size());
  require(np > 0, ErrorKind::kInvalidInput, "no patch embeddings");
  for (const auto &p : local) {
    require(p.coords.rows() == d &&
                p.coords.cols() == static_cast<Eigen::Index>(p.vertices.size()),
            ErrorKind::kInvalidInput,
            "patch " + std::to_string(p.patch) + " coordinates are not d x |P|");
    require(p.coords.allFinite(), ErrorKind::kInvalidInput,
            "patch " + std::to_string(p.patch) + " coordinates not finite");
    require(std::is_sorted(p.vertices.begin(), p.vertices.end()),
            ErrorKind::kInvalidInput, "patch vertex list not sorted");
  }

  SyncSolution sol;
  sol.patch_count = np;
  for (const auto &p : local)
    sol.patch_ids.push_back(p.patch);

  auto t0 = Clock::now();
  const auto edges = staged("patch_graph", [&] {
    std::vector<Patch> tmp(np);
    for (int i = 0; i < np; ++i)
      tmp[i].all = local[i].vertices;
    return build_patch_edges(tmp, d, true);
  });

  sol.scales.assign(np, 1.0);
  if (!opts.skip_scale_sync) {
    const auto sr = staged("scale_sync", [&] {
      return scale_sync(local, edges, opts.scale);
    });
    for (int i = 0; i < np; ++i) {
      sol.scales[i] = sr.scales(i);
      if (opts.scale.divide)
        local[i].coords /= sr.scales(i);
      else
        local[i].coords *= sr.scales(i);
    }
  }
  sol.stage_seconds["scale_sync"] = seconds_since(t0);

  t0 = Clock::now();
  std::vector<Alignment> alignments;
  for (const auto &e : edges) {
    try {
      alignments.push_back({e.a, e.b, pairwise_align(local[e.a], local[e.b])});
    } catch (const Error &err) {
      if (err.kind() != ErrorKind::kDegenerateAlignment)
        throw Error(err.kind(), std::string("pairwise_align: ") + err.detail());
      sol.dropped_edges.push_back(e);
      sol.warnings.push_back("dropped patch edge " + std::to_string(e.a) +
                             "-" + std::to_string(e.b) + ": " + err.detail());
    }
  }
  sol.stage_seconds["pairwise_align"] = seconds_since(t0);

  t0 = Clock::now();
  const auto rs = staged("rotation_sync",
                         [&] { return rotation_sync(alignments, np, d); });
  for (int i = 0; i < np; ++i)
    local[i].coords = rs.h[i].transpose() * local[i].coords;
  sol.rotations = rs.h;
  sol.stage_seconds["rotation_sync"] = seconds_since(t0);

  t0 = Clock::now();
  auto ts = staged("translation_sync",
                   [&] { return translation_sync(local, g); });
  sol.translations = std::move(ts.translations);
  sol.residual = std::move(ts.residual);
  sol.fused = PointCloud(std::move(ts.coords));
  sol.stage_seconds["translation_sync"] = seconds_since(t0);
  return sol;
}

PatchEmbedder loe_patch_embedder(const LoeConfig &config, int d, double delta) {
  return [config, d, delta](const Patch &, const Digraph &local,
                            std::uint64_t seed) {
    LoeConfig c = config;
    c.seed = seed;
    c.init = LoeInit::kRandomGaussian;
    c.initial.reset();
    const auto p = OrdinalProblem::from_graph(local, d, delta);
    return loe_embed(p, c).x;
  };
}

SyncSolution asap_embed(const KnnGraph &graph, const AsapConfig &config,
                        const PatchEmbedder &embedder, PatchSet *patches_out) {
  const auto t0 = Clock::now();
  DecomposeOptions dopt;
  dopt.mps = config.mps;
  dopt.dim = config.dim;
  dopt.seed = config.seed;
  dopt.skip_rigidity = config.skip_rigidity;
  dopt.threads = config.threads;
  PatchSet ps = staged("decompose", [&] { return decompose(graph, dopt); });
  const double decompose_seconds = seconds_since(t0);
  SyncSolution sol = asap_embed(graph, ps, config, embedder);
  sol.stage_seconds["decompose"] = decompose_seconds;
  if (patches_out)
    *patches_out = std::move(ps);
  return sol;
}

SyncSolution asap_embed(const KnnGraph &graph, const PatchSet &patches,
                        const AsapConfig &config, const PatchEmbedder &embedder) {
  const int d = config.dim;
  require(d >= 1, ErrorKind::kInvalidParameter, "dim must be >= 1");
  require(!patches.patches.empty(), ErrorKind::kInvalidInput, "no patches");
  const PatchEmbedder embed =
      embedder ? embedder : loe_patch_embedder(config.loe, d, config.delta);

  const std::size_t np = patches.patches.size();
  std::vector<Eigen::MatrixXd> coords(np);
  std::vector<std::string> failure(np);
  const auto t0 = Clock::now();
  parallel_for(np, resolve_threads(config.threads), [&](std::size_t i) {
    const Patch &p = patches.patches[i];
    const Digraph sub = induced_digraph(graph.graph(), p.all);
    for (std::uint64_t attempt = 0; attempt < 2; ++attempt) {
      try {
        Eigen::MatrixXd x =
            embed(p, sub, derive_seed(config.seed, {0x656du, std::uint64_t(p.id),
                                                    attempt}));
        require(x.rows() == d &&
                    x.cols() == static_cast<Eigen::Index>(p.all.size()),
                ErrorKind::kNumericalError, "embedding has the wrong shape");
        require(x.allFinite(), ErrorKind::kNumericalError,
                "embedding is not finite");
        coords[i] = std::move(x);
        failure[i].clear();
        return;
      } catch (const Error &e) {
        failure[i] = e.detail();
      }
    }
  });
  const double embed_seconds = seconds_since(t0);

  std::vector<LocalEmbedding> local;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < np; ++i) {
    if (!failure[i].empty()) {
      warnings.push_back("patch " + std::to_string(patches.patches[i].id) +
                         " excluded: " + failure[i]);
      continue;
    }
    local.push_back({patches.patches[i].id, patches.patches[i].all,
                     std::move(coords[i]), config.source});
  }
  require(!local.empty(), ErrorKind::kNumericalError,
          "embed: every patch embedding failed");

  SyncSolution sol = synchronize(std::move(local), symmetrize(graph.graph()), d,
                                 config.sync);
  sol.patch_count = static_cast<int>(np);
  sol.warnings.insert(sol.warnings.begin(), warnings.begin(), warnings.end());
  sol.stage_seconds["embed"] = embed_seconds;
  return sol;
}

std::string to_json(const SyncSolution &s, bool include_timing) {
  using nlohmann::json;
  json j;
  j["patch_ids"] = s.patch_ids;
  j["patch_count"] = s.patch_count;
  j["scales"] = s.scales;
  j["rotations"] = json::array();
  for (const auto &h : s.rotations) {
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < h.rows(); ++r)
      for (Eigen::Index c = 0; c < h.cols(); ++c)
        flat.push_back(h(r, c));
    j["rotations"].push_back(flat);
  }
  j["translations"] = json::array();
  for (const auto &t : s.translations)
    j["translations"].push_back(std::vector<double>(t.data(), t.data() + t.size()));
  j["fused"] = json::array();
  const auto &x = s.fused.coords();
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::vector<double> p(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      p[r] = x(r, c);
    j["fused"].push_back(p);
  }
  j["residual"] =
      std::vector<double>(s.residual.data(), s.residual.data() + s.residual.size());
  j["warnings"] = s.warnings;
  j["dropped_edges"] = json::array();
  for (const auto &e : s.dropped_edges)
    j["dropped_edges"].push_back({e.a, e.b});
  if (include_timing)
    j["stage_seconds"] = s.stage_seconds;
  return j.dump(1);
}

void save_sync_solution(const std::filesystem::path &path,
                        const SyncSolution &s) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput,
          "cannot write " + path.string());
  out << to_json(s) << '\n';
}

} // namespace ordembed
