#include "ordembed/patches.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "ordembed/error.hpp"
#include "ordembed/linalg.hpp"
#include "ordembed/parallel.hpp"
#include "ordembed/seeding.hpp"

namespace ordembed {

namespace {

double kmeans_once(const Eigen::MatrixXd &x, int clusters, std::mt19937_64 &rng,
                   std::vector<int> &label) {
  const int n = static_cast<int>(x.cols());
  Eigen::MatrixXd centers(x.rows(), clusters);
  std::uniform_int_distribution<int> pick(0, n - 1);
  centers.col(0) = x.col(pick(rng));
  Eigen::VectorXd d2 = (x.colwise() - centers.col(0)).colwise().squaredNorm();
  for (int c = 1; c < clusters; ++c) {
    const double total = d2.sum();
    int chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      chosen = n - 1;
      for (int i = 0; i < n; ++i) {
        r -= d2(i);
        if (r < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.col(c) = x.col(chosen);
    d2 = d2.cwiseMin((x.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }

  label.assign(n, -1);
  std::vector<int> count(clusters);
  Eigen::VectorXd best_d2(n);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double v = (x.col(i) - centers.col(c)).squaredNorm();
        if (v < best) {
          best = v;
          arg = c;
        }
      }
      best_d2(i) = best;
      if (label[i] != arg) {
        label[i] = arg;
        changed = true;
      }
    }
    std::fill(count.begin(), count.end(), 0);
    for (int i = 0; i < n; ++i)
      ++count[label[i]];
    // Refill empty clusters with the point farthest from its center.
    for (int c = 0; c < clusters; ++c) {
      if (count[c] > 0)
        continue;
      int far = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i)
        if (count[label[i]] > 1 && best_d2(i) > far_d) {
          far_d = best_d2(i);
          far = i;
        }
      --count[label[far]];
      label[far] = c;
      best_d2(far) = 0.0;
      count[c] = 1;
      changed = true;
    }
    centers.setZero();
    for (int i = 0; i < n; ++i)
      centers.col(label[i]) += x.col(i);
    for (int c = 0; c < clusters; ++c)
      centers.col(c) /= count[c];
    if (!changed)
      break;
  }
  double wcss = 0.0;
  for (int i = 0; i < n; ++i)
    wcss += (x.col(i) - centers.col(label[i])).squaredNorm();
  return wcss;
}

// Rows of D^{-1/2} U for the top eigenvectors U of D^{-1/2} A D^{-1/2},
// returned as columns (count x n).
Eigen::MatrixXd spectral_features(const UGraph &g, int count,
                                  std::uint64_t seed) {
  Eigen::VectorXd isd;
  const SparseMatrix s = normalized_adjacency(g, isd);
  const EigenPairs ep = top_eigenpairs(s, count, seed);
  return (isd.asDiagonal() * ep.vectors).transpose();
}

std::vector<int> cluster_connected(const UGraph &g, int clusters,
                                   std::uint64_t seed, int restarts) {
  const int n = g.size();
  if (clusters == 1)
    return std::vector<int>(n, 0);
  if (clusters == n) {
    std::vector<int> id(n);
    std::iota(id.begin(), id.end(), 0);
    return id;
  }
  const Eigen::MatrixXd f = spectral_features(g, clusters, seed);
  return kmeans(f, clusters, seed, restarts);
}

// Allots `total` clusters over components: one each, the remainder by
// largest fractional share, never more than a component's size.
std::vector<int> allot(const std::vector<int> &sizes, int total) {
  const int c = static_cast<int>(sizes.size());
  const double n = std::accumulate(sizes.begin(), sizes.end(), 0.0);
  std::vector<int> share(c, 1);
  int left = total - c;
  while (left > 0) {
    int best = -1;
    double best_deficit = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < c; ++i) {
      if (share[i] >= sizes[i])
        continue;
      const double deficit = total * sizes[i] / n - share[i];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = i;
      }
    }
    ++share[best];
    --left;
  }
  return share;
}

std::vector<int> in_patch_degree(const UGraph &g, const std::vector<int> &all,
                                 const std::vector<int> &query) {
  std::vector<int> deg(query.size(), 0);
  for (std::size_t q = 0; q < query.size(); ++q)
    for (int w : g.neighbors(query[q]))
      deg[q] += std::binary_search(all.begin(), all.end(), w);
  return deg;
}

// Removes the `drop` lowest in-patch-degree vertices of `added` (ties: smaller
// id first).
void drop_lowest(const UGraph &g, std::vector<int> &all,
                 std::vector<int> &added, std::size_t drop) {
  const std::vector<int> deg = in_patch_degree(g, all, added);
  std::vector<std::size_t> order(added.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return deg[a] < deg[b];
  });
  std::vector<char> gone(added.size(), 0);
  for (std::size_t i = 0; i < drop; ++i)
    gone[order[i]] = 1;
  std::vector<int> kept;
  std::vector<int> removed;
  for (std::size_t i = 0; i < added.size(); ++i)
    (gone[i] ? removed : kept).push_back(added[i]);
  added = std::move(kept);
  std::vector<int> rest;
  std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(),
                      std::back_inserter(rest));
  all = std::move(rest);
}

bool patch_is_rigid(const UGraph &g, const std::vector<int> &all,
                    const DecomposeOptions &opts, int patch, int round) {
  const UGraph sub = g.induced(all);
  return global_rigidity(sub, opts.dim,
                         derive_seed(opts.seed, {0x71u, std::uint64_t(patch),
                                                 std::uint64_t(round)}),
                         opts.rigidity)
      .globally_rigid;
}

} // namespace

Patch expand_patch(const UGraph &g, std::vector<int> core, int id,
                   const DecomposeOptions &opts) {
  Patch p;
  p.id = id;
  std::sort(core.begin(), core.end());
  std::vector<int> added;
  for (int v : core)
    for (int w : g.neighbors(v))
      if (!std::binary_search(core.begin(), core.end(), w))
        added.push_back(w);
  std::sort(added.begin(), added.end());
  added.erase(std::unique(added.begin(), added.end()), added.end());
  std::vector<int> all;
  std::set_union(core.begin(), core.end(), added.begin(), added.end(),
                 std::back_inserter(all));
  if (all.size() > static_cast<std::size_t>(opts.mps))
    drop_lowest(g, all, added, all.size() - opts.mps);

  if (!opts.skip_rigidity) {
    int round = 0;
    bool rigid = patch_is_rigid(g, all, opts, id, round);
    while (!rigid && !added.empty() && 3 * all.size() >= 4 * core.size()) {
      const std::size_t drop = (added.size() + 3) / 4;
      drop_lowest(g, all, added, drop);
      ++round;
      rigid = patch_is_rigid(g, all, opts, id, round);
    }
    p.rigid = rigid;
    p.pruning_rounds = round;
  }
  p.core = std::move(core);
  p.all = std::move(all);
  return p;
}

namespace {

std::vector<std::vector<int>> split_oversized(const UGraph &g,
                                              std::vector<int> cluster,
                                              int mps, std::uint64_t seed,
                                              int restarts) {
  if (static_cast<int>(cluster.size()) <= mps)
    return {std::move(cluster)};
  const UGraph sub = g.induced(cluster);
  const std::vector<int> half = spectral_cluster(sub, 2, seed, restarts);
  std::vector<int> a, b;
  for (std::size_t i = 0; i < cluster.size(); ++i)
    (half[i] == 0 ? a : b).push_back(cluster[i]);
  auto left = split_oversized(g, std::move(a), mps, splitmix64(seed), restarts);
  auto right =
      split_oversized(g, std::move(b), mps, splitmix64(seed + 1), restarts);
  left.insert(left.end(), right.begin(), right.end());
  return left;
}

} // namespace

std::vector<int> kmeans(const Eigen::MatrixXd &points, int clusters,
                        std::uint64_t seed, int restarts, double *wcss) {
  const int n = static_cast<int>(points.cols());
  require(clusters >= 1 && clusters <= n, ErrorKind::kInvalidParameter,
          "k-means needs 1 <= clusters <= n");
  std::vector<int> best, label;
  double best_w = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::mt19937_64 rng(derive_seed(seed, {0x6b6du, std::uint64_t(r)}));
    const double w = kmeans_once(points, clusters, rng, label);
    if (w < best_w) {
      best_w = w;
      best = label;
    }
  }
  if (wcss)
    *wcss = best_w;
  return best;
}

std::vector<int> spectral_cluster(const UGraph &g, int clusters,
                                  std::uint64_t seed, int restarts) {
  const int n = g.size();
  require(clusters >= 1, ErrorKind::kInvalidParameter, "need >= 1 cluster");
  require(clusters <= n, ErrorKind::kInvalidParameter,
          "more clusters (" + std::to_string(clusters) + ") than vertices (" +
              std::to_string(n) + ")");
  std::vector<int> comp;
  const int nc = g.components(comp);
  if (nc == 1)
    return cluster_connected(g, clusters, seed, restarts);
  require(nc <= clusters, ErrorKind::kStructuralError,
          "graph has " + std::to_string(nc) + " components but only " +
              std::to_string(clusters) + " clusters requested");

  std::vector<std::vector<int>> members(nc);
  for (int v = 0; v < n; ++v)
    members[comp[v]].push_back(v);
  std::vector<int> sizes(nc);
  for (int c = 0; c < nc; ++c)
    sizes[c] = static_cast<int>(members[c].size());
  const std::vector<int> share = allot(sizes, clusters);

  std::vector<int> label(n);
  int offset = 0;
  for (int c = 0; c < nc; ++c) {
    const UGraph sub = g.induced(members[c]);
    const std::vector<int> local = cluster_connected(
        sub, share[c], derive_seed(seed, {0x636du, std::uint64_t(c)}),
        restarts);
    for (std::size_t i = 0; i < members[c].size(); ++i)
      label[members[c][i]] = offset + local[i];
    offset += share[c];
  }
  return label;
}

int cluster_count(int n, int mps) {
  return static_cast<int>((2 * static_cast<long long>(n) + mps - 1) / mps);
}

UGraph PatchSet::patch_graph() const {
  std::vector<Edge> e;
  for (const auto &pe : edges)
    e.emplace_back(pe.a, pe.b);
  return UGraph(static_cast<int>(patches.size()), e);
}

std::vector<PatchEdge> build_patch_edges(const std::vector<Patch> &patches,
                                         int dim, bool require_connected) {
  const int np = static_cast<int>(patches.size());
  std::vector<PatchEdge> edges;
  for (int a = 0; a < np; ++a)
    for (int b = a + 1; b < np; ++b) {
      const auto &x = patches[a].all;
      const auto &y = patches[b].all;
      int overlap = 0;
      for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
        if (x[i] < y[j])
          ++i;
        else if (y[j] < x[i])
          ++j;
        else {
          ++overlap;
          ++i;
          ++j;
        }
      }
      if (overlap >= dim + 1)
        edges.push_back({a, b, overlap});
    }
  if (require_connected && np > 1) {
    std::vector<Edge> ue;
    for (const auto &e : edges)
      ue.emplace_back(e.a, e.b);
    std::vector<int> comp;
    const int nc = UGraph(np, ue).components(comp);
    if (nc > 1) {
      std::ostringstream msg;
      msg << "patch graph has " << nc << " components:";
      for (int c = 0; c < nc; ++c) {
        msg << " {";
        bool first = true;
        for (int p = 0; p < np; ++p)
          if (comp[p] == c) {
            msg << (first ? "" : ",") << p;
            first = false;
          }
        msg << "}";
      }
      throw Error(ErrorKind::kStructuralError, msg.str());
    }
  }
  return edges;
}

PatchSet decompose(const KnnGraph &graph, const DecomposeOptions &opts) {
  const int n = graph.size();
  require(opts.dim >= 1, ErrorKind::kInvalidParameter, "dim must be >= 1");
  require(opts.mps > opts.dim + 1, ErrorKind::kInvalidParameter,
          "mps must exceed dim + 1");
  const UGraph g = symmetrize(graph.graph());

  std::vector<std::vector<int>> cores;
  if (n <= opts.mps) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    cores.push_back(std::move(all));
  } else {
    const int nclusters = cluster_count(n, opts.mps);
    const std::vector<int> label =
        spectral_cluster(g, nclusters, opts.seed, opts.kmeans_restarts);
    std::vector<std::vector<int>> groups(nclusters);
    for (int v = 0; v < n; ++v)
      groups[label[v]].push_back(v);
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (groups[c].empty())
        continue;
      auto parts = split_oversized(
          g, std::move(groups[c]), opts.mps,
          derive_seed(opts.seed, {0x7370u, std::uint64_t(c)}),
          opts.kmeans_restarts);
      for (auto &p : parts)
        cores.push_back(std::move(p));
    }
  }

  PatchSet ps;
  ps.n = n;
  ps.dim = opts.dim;
  ps.patches.resize(cores.size());
  parallel_for(cores.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    ps.patches[i] = expand_patch(g, cores[i], static_cast<int>(i), opts);
  });
  ps.edges = build_patch_edges(ps.patches, opts.dim);
  return ps;
}

std::string to_json(const PatchSet &ps) {
  nlohmann::json j;
  j["n"] = ps.n;
  j["dim"] = ps.dim;
  j["patches"] = nlohmann::json::array();
  for (const auto &p : ps.patches)
    j["patches"].push_back(
        {{"id", p.id}, {"core", p.core}, {"all", p.all}, {"rigid", p.rigid}});
  j["edges"] = nlohmann::json::array();
  for (const auto &e : ps.edges)
    j["edges"].push_back({e.a, e.b, e.overlap});
  return j.dump(1);
}

PatchSet patch_set_from_json(const std::string &text) {
  try {
    const auto j = nlohmann::json::parse(text);
    PatchSet ps;
    ps.patches.clear();
    int max_vertex = -1;
    for (const auto &jp : j.at("patches")) {
      Patch p;
      p.id = jp.at("id").get<int>();
      p.core = jp.at("core").get<std::vector<int>>();
      p.all = jp.at("all").get<std::vector<int>>();
      p.rigid = jp.at("rigid").get<bool>();
      std::sort(p.core.begin(), p.core.end());
      std::sort(p.all.begin(), p.all.end());
      require(std::includes(p.all.begin(), p.all.end(), p.core.begin(),
                            p.core.end()),
              ErrorKind::kParseError, "patch core not contained in patch");
      if (!p.all.empty())
        max_vertex = std::max(max_vertex, p.all.back());
      ps.patches.push_back(std::move(p));
    }
    for (const auto &je : j.at("edges")) {
      const auto v = je.get<std::vector<int>>();
      require(v.size() == 3, ErrorKind::kParseError,
              "patch edge must be [i, j, overlap]");
      ps.edges.push_back({v[0], v[1], v[2]});
    }
    ps.n = j.contains("n") ? j["n"].get<int>() : max_vertex + 1;
    ps.dim = j.contains("dim") ? j["dim"].get<int>() : 0;
    return ps;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorKind::kParseError, std::string("patch set JSON: ") + e.what());
  }
}

void save_patch_set(const std::filesystem::path &path, const PatchSet &ps) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput,
          "cannot write " + path.string());
  out << to_json(ps) << '\n';
}

PatchSet load_patch_set(const std::filesystem::path &path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kInvalidInput,
          "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return patch_set_from_json(ss.str());
}

} // namespace ordembed
