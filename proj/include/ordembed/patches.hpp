#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"
#include "ordembed/rigidity.hpp"

namespace ordembed {

// Cluster label in [0, clusters) per vertex, from k-means on the rows of the
// leading random-walk Laplacian eigenvectors. Disconnected graphs are
// clustered per component with clusters allotted proportionally to size.
std::vector<int> spectral_cluster(const UGraph &g, int clusters,
                                  std::uint64_t seed, int restarts = 10);

// Best-of-`restarts` k-means++ / Lloyd on the columns of `points`.
std::vector<int> kmeans(const Eigen::MatrixXd &points, int clusters,
                        std::uint64_t seed, int restarts = 10,
                        double *wcss = nullptr);

struct Patch {
  int id = 0;
  std::vector<int> core; // sorted
  std::vector<int> all;  // sorted, superset of core
  bool rigid = false;
  int pruning_rounds = 0;
};

struct PatchEdge {
  int a = 0, b = 0; // a < b
  int overlap = 0;

  friend bool operator==(const PatchEdge &, const PatchEdge &) = default;
};

struct PatchSet {
  int n = 0;
  int dim = 0;
  std::vector<Patch> patches;
  std::vector<PatchEdge> edges; // sorted by (a, b)

  UGraph patch_graph() const;
};

struct DecomposeOptions {
  int mps = 200;
  int dim = 2;
  std::uint64_t seed = 0;
  bool skip_rigidity = false;
  int threads = 1;
  int kmeans_restarts = 10;
  RigidityOptions rigidity;
};

// Clusters -> 1-hop expansion capped at mps -> rigidity-guided pruning ->
// patch graph with the overlap >= dim + 1 rule.
PatchSet decompose(const KnnGraph &graph, const DecomposeOptions &opts);

int cluster_count(int n, int mps);

// One patch from a core cluster of the symmetrized graph `g`: 1-hop
// expansion capped at opts.mps, then pruning of added vertices while the
// patch is not globally rigid and still at least 4/3 the size of its core.
Patch expand_patch(const UGraph &g, std::vector<int> core, int id,
                   const DecomposeOptions &opts);

// Builds the patch graph of `patches` with overlap >= dim + 1, throwing a
// structural error listing the components when it is disconnected.
std::vector<PatchEdge> build_patch_edges(const std::vector<Patch> &patches,
                                         int dim, bool require_connected = true);

std::string to_json(const PatchSet &ps);
PatchSet patch_set_from_json(const std::string &text);
void save_patch_set(const std::filesystem::path &path, const PatchSet &ps);
PatchSet load_patch_set(const std::filesystem::path &path);

} // namespace ordembed
