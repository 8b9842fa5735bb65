#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ordembed/density.hpp"
#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"
#include "ordembed/sync.hpp"

namespace ordembed {

enum class Method { kAsapLoe, kLoeBfgs, kLoeMm, kLe, kLpem };

Method parse_method(const std::string &name);
std::string to_string(Method m);

struct EmbedConfig {
  Method method = Method::kAsapLoe;
  int dim = 2;
  int mps = 200;
  int iters = 100;     // LOE iterations (per patch for asap-loe)
  double delta = 1.0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool skip_scale_sync = false;
  bool skip_rigidity = false;
  std::string lp_solver = "ipm";
};

struct EmbedOutcome {
  PointCloud cloud;
  double seconds = 0.0;
  std::optional<SyncSolution> sync; // asap-loe only
  std::vector<std::string> warnings;
};

EmbedOutcome embed_graph(const KnnGraph &graph, const EmbedConfig &config);

struct RunRecord {
  std::string method;
  std::string dataset;
  int n = 0;
  int k = 0;
  std::string k_rule; // sparse, dense or the literal k
  int dim = 2;
  int mps = 0;
  int iters = 0;
  double delta = 1.0;
  std::uint64_t seed = 0;
  double seconds = 0.0;
  // Present iff ground truth was supplied.
  std::optional<double> a_error;
  std::optional<double> scaled_a_error; // (n / k) * nnz(A - A0)
  std::optional<long long> misplaced;   // true edges missing from the estimate
  std::optional<double> procrustes;
  std::vector<std::string> artifacts;
};

RunRecord make_record(const EmbedConfig &config, const KnnGraph &graph,
                      const std::string &dataset, const std::string &k_rule);

// Fills the metric fields from the estimate against the truth.
void evaluate(RunRecord &record, const KnnGraph &graph, const PointCloud &truth,
              const PointCloud &estimate);

// Column names shared by every CSV of records; `seconds` is the only
// wall-clock column.
const std::vector<std::string> &record_columns();
void write_record_header(std::ostream &out);
void write_record_row(std::ostream &out, const RunRecord &r);
std::string to_json(const RunRecord &r);

// Embeds the graph, then estimates a density from the embedding. With a
// reference the embedding is similarity-aligned onto it (used to compare
// against a known density); otherwise it is rescaled into the unit box.
struct DensityRun {
  EmbedOutcome embedding;
  DensityGrid grid;
};
DensityRun density_pipeline(const KnnGraph &graph, const EmbedConfig &embed,
                            const TvMpleConfig &density,
                            const PointCloud *reference = nullptr);

} // namespace ordembed
