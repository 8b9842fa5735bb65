#include "ordembed/runs.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "json.hpp"
#include "ordembed/baselines.hpp"
#include "ordembed/error.hpp"
#include "ordembed/knn.hpp"
#include "ordembed/loe.hpp"
#include "ordembed/lp_embed.hpp"
#include "ordembed/metrics.hpp"

namespace ordembed {

namespace {

const std::pair<Method, const char *> kMethodNames[] = {
    {Method::kAsapLoe, "asap-loe"}, {Method::kLoeBfgs, "loe-bfgs"},
    {Method::kLoeMm, "loe-mm"},     {Method::kLe, "le"},
    {Method::kLpem, "lpem"}};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

Method parse_method(const std::string &name) {
  for (const auto &[m, s] : kMethodNames)
    if (name == s)
      return m;
  throw Error(ErrorKind::kInvalidParameter, "unknown method '" + name + "'");
}

std::string to_string(Method m) {
  for (const auto &[id, s] : kMethodNames)
    if (id == m)
      return s;
  return "?";
}

EmbedOutcome embed_graph(const KnnGraph &graph, const EmbedConfig &config) {
  require(config.dim >= 1, ErrorKind::kInvalidParameter, "dimension must be >= 1");
  require(config.iters >= 1, ErrorKind::kInvalidParameter, "iters must be >= 1");
  require(config.delta > 0, ErrorKind::kInvalidParameter, "delta must be > 0");
  EmbedOutcome out;
  const auto t0 = std::chrono::steady_clock::now();
  switch (config.method) {
  case Method::kAsapLoe: {
    AsapConfig a;
    a.dim = config.dim;
    a.mps = config.mps;
    a.seed = config.seed;
    a.threads = config.threads;
    a.skip_rigidity = config.skip_rigidity;
    a.sync.skip_scale_sync = config.skip_scale_sync;
    a.loe.max_iters = config.iters;
    a.delta = config.delta;
    SyncSolution s = asap_embed(graph, a);
    out.cloud = s.fused;
    out.warnings = s.warnings;
    out.sync = std::move(s);
    break;
  }
  case Method::kLoeBfgs:
  case Method::kLoeMm: {
    const OrdinalProblem p =
        OrdinalProblem::from_graph(graph.graph(), config.dim, config.delta);
    LoeConfig c;
    c.max_iters = config.iters;
    c.method = config.method == Method::kLoeMm ? LoeMethod::kMm : LoeMethod::kBfgs;
    c.seed = config.seed;
    const LoeResult r = loe_embed(p, c);
    if (r.line_search_failed)
      out.warnings.push_back("line search failed; best iterate returned");
    out.cloud = PointCloud(r.x);
    break;
  }
  case Method::kLe:
    out.cloud = laplacian_eigenmaps(graph, config.dim);
    break;
  case Method::kLpem: {
    LpEmConfig c;
    c.seed = config.seed;
    c.solver = config.lp_solver;
    out.cloud = lpem_embed(graph, config.dim, c);
    break;
  }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

RunRecord make_record(const EmbedConfig &config, const KnnGraph &graph,
                      const std::string &dataset, const std::string &k_rule) {
  RunRecord r;
  r.method = to_string(config.method);
  r.dataset = dataset;
  r.n = graph.size();
  r.k = graph.k();
  r.k_rule = k_rule.empty() ? std::to_string(graph.k()) : k_rule;
  r.dim = config.dim;
  r.mps = config.method == Method::kAsapLoe ? config.mps : 0;
  const bool iterative = config.method != Method::kLe && config.method != Method::kLpem;
  r.iters = iterative ? config.iters : 0;
  r.delta = config.delta;
  r.seed = config.seed;
  return r;
}

void evaluate(RunRecord &record, const KnnGraph &graph, const PointCloud &truth,
              const PointCloud &estimate) {
  require(truth.size() == graph.size() && estimate.size() == graph.size(),
          ErrorKind::kInvalidInput,
          "truth, estimate and graph must have the same number of points");
  const Digraph est = build_knn_graph(estimate, graph.k()).graph();
  const double n = graph.size();
  record.a_error = a_error(graph.graph(), est);
  record.scaled_a_error = *record.a_error * n / graph.k();
  record.misplaced = static_cast<long long>(misplaced_edges(graph.graph(), est));
  if (truth.dim() == estimate.dim())
    record.procrustes = procrustes_error(truth, estimate);
  else
    record.procrustes.reset();
}

const std::vector<std::string> &record_columns() {
  static const std::vector<std::string> cols = {
      "method", "dataset", "n",        "k",         "k_rule",
      "d",      "mps",     "iters",    "delta",     "seed",
      "seconds", "a_error", "scaled_a_error", "misplaced", "procrustes"};
  return cols;
}

void write_record_header(std::ostream &out) {
  const auto &cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << '\n';
}

void write_record_row(std::ostream &out, const RunRecord &r) {
  auto opt = [](const std::optional<double> &v) { return v ? fmt(*v) : ""; };
  out << r.method << ',' << r.dataset << ',' << r.n << ',' << r.k << ','
      << r.k_rule << ',' << r.dim << ',' << r.mps << ',' << r.iters << ','
      << fmt(r.delta) << ',' << r.seed << ',' << fmt(r.seconds) << ','
      << opt(r.a_error) << ',' << opt(r.scaled_a_error) << ','
      << (r.misplaced ? std::to_string(*r.misplaced) : "") << ','
      << opt(r.procrustes) << '\n';
}

std::string to_json(const RunRecord &r) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  j["dataset"] = r.dataset;
  j["n"] = r.n;
  j["k"] = r.k;
  j["k_rule"] = r.k_rule;
  j["d"] = r.dim;
  j["mps"] = r.mps;
  j["iters"] = r.iters;
  j["delta"] = r.delta;
  j["seed"] = r.seed;
  j["seconds"] = r.seconds;
  if (r.a_error) {
    j["a_error"] = *r.a_error;
    j["scaled_a_error"] = *r.scaled_a_error;
    j["misplaced"] = *r.misplaced;
  }
  if (r.procrustes)
    j["procrustes"] = *r.procrustes;
  j["artifacts"] = r.artifacts;
  return j.dump(2);
}

DensityRun density_pipeline(const KnnGraph &graph, const EmbedConfig &embed,
                            const TvMpleConfig &density,
                            const PointCloud *reference) {
  require(embed.dim == 2, ErrorKind::kInvalidParameter,
          "density estimation needs a 2-dimensional embedding");
  DensityRun run;
  run.embedding = embed_graph(graph, embed);
  run.grid = density_from_embedding(run.embedding.cloud, reference, density);
  return run;
}

} // namespace ordembed
