#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"
#include "ordembed/loe.hpp"
#include "ordembed/patches.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

enum class EmbeddingSource { kLoe, kGroundTruthSimilarity, kExternal };

const char *to_string(EmbeddingSource s);

struct LocalEmbedding {
  int patch = 0;
  std::vector<int> vertices; // sorted global ids
  Eigen::MatrixXd coords;    // d x |vertices|
  EmbeddingSource source = EmbeddingSource::kExternal;
};

struct ScaleSyncOptions {
  // Divide patch coordinates by the recovered scale (as opposed to
  // multiplying).
  bool divide = true;
  // Power iteration on diag(deg + 1)^{-1} Lambda instead of Lambda. The two
  // agree on complete patch graphs; only the normalized form has the true
  // scales as its Perron vector on sparser ones.
  bool degree_normalized = true;
  double tol = 1e-12;
  int max_iters = 10000;
};

struct ScaleSyncResult {
  Eigen::MatrixXd lambda;  // N x N, zero off the patch graph
  Eigen::VectorXd scales;  // Perron vector, mean 1
  int iterations = 0;
};

// Median over unordered shared pairs (a, b) of |y_a - y_b| in patch `p`
// divided by the same distance in patch `q`.
double distance_ratio_median(const LocalEmbedding &p, const LocalEmbedding &q);

// Requires a connected patch graph over `edges` (patch indices into
// `local`).
ScaleSyncResult scale_sync(const std::vector<LocalEmbedding> &local,
                           const std::vector<PatchEdge> &edges,
                           const ScaleSyncOptions &opts = {});

// Orthogonal H minimizing ||H (Y_i - c_i) - (Y_j - c_j)||_F over the shared
// columns, so H maps patch-i coordinates into patch j's frame. Reflections
// are allowed. Throws DegenerateAlignment when the centered shared
// configuration has rank < d.
Eigen::MatrixXd pairwise_align(const Eigen::MatrixXd &yi,
                               const Eigen::MatrixXd &yj);

// Shared-vertex version for two local embeddings.
Eigen::MatrixXd pairwise_align(const LocalEmbedding &p,
                               const LocalEmbedding &q);

struct Alignment {
  int a = 0, b = 0;  // patch indices
  Eigen::MatrixXd h; // maps patch-a coordinates into patch b's frame
};

struct RotationSyncResult {
  // h[i] maps global coordinates into patch i's frame, h[0] = I. Patch i is
  // placed in the global frame by h[i]^T.
  std::vector<Eigen::MatrixXd> h;
  Eigen::VectorXd eigenvalues; // top d of D^{-1/2} H D^{-1/2}
  double eigen_residual = 0.0;
  // max over edges of ||h[b] h[a]^T - H_ab||_F
  double consistency = 0.0;
};

RotationSyncResult rotation_sync(const std::vector<Alignment> &alignments,
                                 int patches, int d);

struct TranslationSyncResult {
  Eigen::MatrixXd coords;                 // d x n, zero mean
  std::vector<Eigen::VectorXd> translations; // per patch
  Eigen::VectorXd residual;               // per-vertex RMS misfit
  int equations = 0;
};

// Least-squares x_a - x_b = y^k_a - y^k_b over every edge {a, b} of `g`
// inside each patch k. `aligned` holds patch coordinates already scaled and
// rotated into the global frame.
TranslationSyncResult translation_sync(const std::vector<LocalEmbedding> &aligned,
                                       const UGraph &g);

struct SyncSolution {
  std::vector<int> patch_ids; // patches that took part, in input order
  std::vector<double> scales;
  std::vector<Eigen::MatrixXd> rotations; // h_i, global -> patch frame
  std::vector<Eigen::VectorXd> translations;
  PointCloud fused;
  Eigen::VectorXd residual;
  std::vector<std::string> warnings;
  std::vector<PatchEdge> dropped_edges;
  std::map<std::string, double> stage_seconds;
  int patch_count = 0; // before exclusions
};

struct SyncOptions {
  bool skip_scale_sync = false;
  ScaleSyncOptions scale;
};

// Scale, rotation and translation synchronization of given local
// embeddings. Patch-graph edges come from the vertex overlap (>= d + 1).
SyncSolution synchronize(std::vector<LocalEmbedding> local, const UGraph &g,
                         int d, const SyncOptions &opts = {});

// Embeds one patch: receives the patch, the directed graph induced on
// patch.all and a seed; returns d x |patch.all| coordinates.
using PatchEmbedder = std::function<Eigen::MatrixXd(
    const Patch &, const Digraph &, std::uint64_t)>;

PatchEmbedder loe_patch_embedder(const LoeConfig &config, int d,
                                 double delta = 1.0);

struct AsapConfig {
  int dim = 2;
  int mps = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  bool skip_rigidity = false;
  SyncOptions sync;
  LoeConfig loe;
  double delta = 1.0;
  EmbeddingSource source = EmbeddingSource::kLoe;
};

// decompose -> embed patches in parallel -> synchronize. A patch whose
// embedding throws or is non-finite is retried once with a fresh seed, then
// excluded with a warning. Errors are tagged with the failing stage.
SyncSolution asap_embed(const KnnGraph &graph, const AsapConfig &config,
                        const PatchEmbedder &embedder = {},
                        PatchSet *patches_out = nullptr);

// Same, on a precomputed decomposition.
SyncSolution asap_embed(const KnnGraph &graph, const PatchSet &patches,
                        const AsapConfig &config,
                        const PatchEmbedder &embedder = {});

// Stage timings are left out unless asked for, so that output is
// reproducible.
std::string to_json(const SyncSolution &s, bool include_timing = false);
void save_sync_solution(const std::filesystem::path &path,
                        const SyncSolution &s);

} // namespace ordembed
