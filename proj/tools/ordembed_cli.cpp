#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ordembed/density.hpp"
#include "ordembed/error.hpp"
#include "ordembed/io.hpp"
#include "ordembed/knn.hpp"
#include "ordembed/lp_embed.hpp"
#include "ordembed/parallel.hpp"
#include "ordembed/runs.hpp"
#include "ordembed/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ordembed;

namespace {

struct Options {
  std::string dataset = "pc";
  std::string points, graph, truth, est;
  int n = 1000;
  std::string k = "sparse";
  int d = 2;
  std::string method = "asap-loe";
  int mps = 200;
  int iters = 100;
  double delta = 1.0;
  double lambda = 1e-4;
  int resolution = 64;
  std::uint64_t seed = 0;
  int seeds = 1;
  int threads = 1;
  std::string out = ".";
  bool skip_scale_sync = false;
  bool skip_rigidity = false;
  std::string export_lp;
  std::string lp_solver = "ipm";
  std::vector<std::string> methods;
  bool from_points = false;
};

struct Data {
  std::string name;
  std::optional<SyntheticDensitySpec> spec;
  std::optional<PointCloud> truth;
  std::optional<KnnGraph> graph;
  std::string k_rule;
};

int resolve_k(const std::string &rule, int n) {
  if (rule == "sparse")
    return sparse_k(n);
  if (rule == "dense")
    return dense_k(n);
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(rule, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  require(used == rule.size() && used > 0, ErrorKind::kInvalidParameter,
          "--k must be sparse, dense or an integer, got '" + rule + "'");
  return k;
}

// Points (and graph) from --graph / --points / --dataset, in that order of
// preference for the graph.
Data load_data(const Options &o, bool need_graph, std::uint64_t seed) {
  Data data;
  data.name = o.dataset;
  if (!o.graph.empty()) {
    data.graph = load_knn_graph(o.graph);
    data.k_rule = std::to_string(data.graph->k());
    if (!o.truth.empty())
      data.truth = load_cloud(o.truth);
    else if (!o.points.empty())
      data.truth = load_cloud(o.points);
    if (o.dataset == "file" || o.dataset.empty())
      data.name = "file";
    else
      data.spec = default_spec(parse_density_kind(o.dataset), seed);
    return data;
  }
  if (o.dataset == "file") {
    require(!o.points.empty(), ErrorKind::kInvalidParameter,
            "--dataset file needs --points or --graph");
    data.truth = load_cloud(o.points);
  } else {
    require(o.n >= 2, ErrorKind::kInvalidParameter, "--n must be >= 2");
    data.spec = default_spec(parse_density_kind(o.dataset), seed);
    data.truth = generate(*data.spec, o.n);
  }
  if (need_graph) {
    data.k_rule = o.k;
    data.graph = build_knn_graph(*data.truth, resolve_k(o.k, data.truth->size()));
  }
  return data;
}

EmbedConfig embed_config(const Options &o, std::uint64_t seed) {
  EmbedConfig c;
  c.method = parse_method(o.method);
  c.dim = o.d;
  c.mps = o.mps;
  c.iters = o.iters;
  c.delta = o.delta;
  c.seed = seed;
  c.threads = o.threads;
  c.skip_scale_sync = o.skip_scale_sync;
  c.skip_rigidity = o.skip_rigidity;
  c.lp_solver = o.lp_solver;
  return c;
}

fs::path out_path(const Options &o, const std::string &file) {
  fs::create_directories(o.out);
  return fs::path(o.out) / file;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorKind::kInvalidInput,
          "cannot write " + path.string());
  f << text;
}

void warn(const std::vector<std::string> &warnings) {
  for (const auto &w : warnings)
    std::cerr << "warning: " << w << '\n';
}

void cmd_generate(const Options &o) {
  require(o.dataset != "file", ErrorKind::kInvalidParameter,
          "generate needs a synthetic --dataset");
  const Data data = load_data(o, false, o.seed);
  const fs::path p = out_path(o, "points.csv");
  save_cloud(p, *data.truth);
  std::cout << p.string() << '\n';
}

void cmd_graph(const Options &o) {
  Options in = o;
  in.graph.clear();
  const Data data = load_data(in, true, o.seed);
  const fs::path p = out_path(o, "graph.edges");
  save_edge_list(p, *data.graph);
  if (data.spec)
    save_cloud(out_path(o, "points.csv"), *data.truth);
  std::cout << p.string() << '\n';
}

void cmd_embed(const Options &o) {
  const Data data = load_data(o, true, o.seed);
  const EmbedConfig cfg = embed_config(o, o.seed);
  RunRecord record = make_record(cfg, *data.graph, data.name, data.k_rule);
  if (!o.export_lp.empty()) {
    require(cfg.method == Method::kLpem, ErrorKind::kInvalidParameter,
            "--export-lp needs --method lpem");
    LpEmConfig lc;
    lc.seed = cfg.seed;
    std::ostringstream lp;
    write_lp(lp, build_lp(data.graph->graph(), lc).lp);
    if (fs::path(o.export_lp).has_parent_path())
      fs::create_directories(fs::path(o.export_lp).parent_path());
    write_text(o.export_lp, lp.str());
    record.artifacts.push_back(o.export_lp);
  }
  const EmbedOutcome r = embed_graph(*data.graph, cfg);
  warn(r.warnings);
  record.seconds = r.seconds;
  const fs::path cloud = out_path(o, "embedding.csv");
  save_cloud(cloud, r.cloud);
  record.artifacts.push_back(cloud.string());
  if (r.sync) {
    const fs::path s = out_path(o, "sync.json");
    write_text(s, to_json(*r.sync) + "\n");
    record.artifacts.push_back(s.string());
  }
  if (data.spec) {
    save_edge_list(out_path(o, "graph.edges"), *data.graph);
    save_cloud(out_path(o, "points.csv"), *data.truth);
  }
  if (data.truth)
    evaluate(record, *data.graph, *data.truth, r.cloud);
  const std::string json = to_json(record);
  write_text(out_path(o, "record.json"), json + "\n");
  std::cout << json << '\n';
}

void cmd_eval(const Options &o) {
  require(!o.truth.empty() && !o.est.empty() && !o.graph.empty(),
          ErrorKind::kInvalidParameter, "eval needs --truth, --est and --graph");
  const KnnGraph g = load_knn_graph(o.graph);
  const PointCloud truth = load_cloud(o.truth);
  const PointCloud est = load_cloud(o.est);
  EmbedConfig cfg = embed_config(o, o.seed);
  RunRecord record = make_record(cfg, g, o.dataset, std::to_string(g.k()));
  evaluate(record, g, truth, est);
  const std::string json = to_json(record);
  write_text(out_path(o, "record.json"), json + "\n");
  std::cout << json << '\n';
}

void cmd_density(const Options &o) {
  TvMpleConfig t;
  t.lambda = o.lambda;
  t.resolution = o.resolution;
  nlohmann::ordered_json j;
  DensityGrid grid;
  std::optional<SyntheticDensitySpec> spec;
  if (o.from_points) {
    const Data data = load_data(o, false, o.seed);
    spec = data.spec;
    if (spec && (spec->kind == DensityKind::kPC || spec->kind == DensityKind::kPCS))
      t.domain = Box{};
    grid = tv_mple(*data.truth, t);
    j["source"] = "points";
  } else {
    const Data data = load_data(o, true, o.seed);
    spec = data.spec;
    const EmbedConfig cfg = embed_config(o, o.seed);
    const PointCloud *ref = data.truth ? &*data.truth : nullptr;
    if (ref && ref->dim() != 2)
      ref = nullptr;
    if (ref && spec &&
        (spec->kind == DensityKind::kPC || spec->kind == DensityKind::kPCS))
      t.domain = Box{};
    const DensityRun run = density_pipeline(*data.graph, cfg, t, ref);
    warn(run.embedding.warnings);
    grid = run.grid;
    RunRecord record = make_record(cfg, *data.graph, data.name, data.k_rule);
    record.seconds = run.embedding.seconds;
    if (data.truth)
      evaluate(record, *data.graph, *data.truth, run.embedding.cloud);
    j["source"] = "embedding";
    j["aligned"] = ref != nullptr;
    j["record"] = nlohmann::ordered_json::parse(to_json(record));
  }
  warn(grid.warnings);
  const fs::path stem = out_path(o, "density");
  save_density(stem, grid);
  j["lambda"] = grid.lambda;
  j["resolution"] = grid.resolution();
  j["iterations"] = grid.iterations;
  j["domain"] = {grid.domain.x0, grid.domain.x1, grid.domain.y0, grid.domain.y1};
  j["mass"] = grid.mass();
  if (spec && spec->dim == 2 && (o.from_points || j["aligned"].get<bool>()))
    j["l1_error"] = density_l1_error(grid, *spec);
  j["warnings"] = grid.warnings;
  write_text(out_path(o, "density.json"), j.dump(2) + "\n");
  std::cout << j.dump(2) << '\n';
}

struct Cell {
  int seed_index;
  Method method;
  int param; // iters for LOE, mps for ASAP, unused otherwise
};

std::vector<Cell> parse_cells(const std::vector<std::string> &specs, int seeds) {
  require(!specs.empty(), ErrorKind::kInvalidParameter,
          "pareto needs --methods, e.g. loe-bfgs:5,10 asap-loe:100");
  std::vector<std::pair<Method, int>> grid;
  for (const std::string &s : specs) {
    const auto colon = s.find(':');
    const Method m = parse_method(s.substr(0, colon));
    if (colon == std::string::npos) {
      grid.emplace_back(m, 0);
      continue;
    }
    std::stringstream values(s.substr(colon + 1));
    std::string v;
    while (std::getline(values, v, ',')) {
      std::size_t used = 0;
      int x = 0;
      try {
        x = std::stoi(v, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      require(used == v.size() && used > 0 && x > 0,
              ErrorKind::kInvalidParameter, "bad pareto value '" + v + "' in " + s);
      grid.emplace_back(m, x);
    }
  }
  std::vector<Cell> cells;
  for (int s = 0; s < seeds; ++s)
    for (const auto &[m, p] : grid)
      cells.push_back({s, m, p});
  return cells;
}

void cmd_pareto(const Options &o) {
  require(o.seeds >= 1, ErrorKind::kInvalidParameter, "--seeds must be >= 1");
  const std::vector<Cell> cells = parse_cells(o.methods, o.seeds);
  std::vector<Data> data;
  for (int s = 0; s < o.seeds; ++s)
    data.push_back(load_data(o, true, o.seed + s));

  // Cells run concurrently when threads > 1; each embedding is then
  // single-threaded.
  const int threads = resolve_threads(o.threads);
  std::vector<RunRecord> rows(cells.size());
  std::vector<std::vector<std::string>> warnings(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t c) {
    const Cell &cell = cells[c];
    const Data &d = data[cell.seed_index];
    EmbedConfig cfg = embed_config(o, o.seed + cell.seed_index);
    cfg.method = cell.method;
    cfg.threads = threads > 1 ? 1 : o.threads;
    if (cell.method == Method::kAsapLoe && cell.param > 0)
      cfg.mps = cell.param;
    else if ((cell.method == Method::kLoeBfgs || cell.method == Method::kLoeMm) &&
             cell.param > 0)
      cfg.iters = cell.param;
    const EmbedOutcome r = embed_graph(*d.graph, cfg);
    RunRecord rec = make_record(cfg, *d.graph, d.name, d.k_rule);
    rec.seconds = r.seconds;
    if (d.truth)
      evaluate(rec, *d.graph, *d.truth, r.cloud);
    rows[c] = std::move(rec);
    warnings[c] = r.warnings;
  });
  for (const auto &w : warnings)
    warn(w);
  std::ostringstream csv;
  write_record_header(csv);
  for (const RunRecord &r : rows)
    write_record_row(csv, r);
  const fs::path p = out_path(o, "pareto.csv");
  write_text(p, csv.str());
  std::cout << csv.str();
}

int exit_code(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::kInvalidParameter:
  case ErrorKind::kInvalidInput:
  case ErrorKind::kDegenerateInput:
  case ErrorKind::kParseError:
    return 2;
  default:
    return 3;
  }
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Ordinal embedding from k-nearest-neighbor graphs"};
  app.set_config("--config", "", "TOML file with any of the flags below");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  app.add_option("--dataset", o.dataset, "pc, pcs, gauss, halfcube, donut or file")
      ->check(CLI::IsMember({"pc", "pcs", "gauss", "halfcube", "donut", "file"}));
  app.add_option("--points", o.points, "point cloud CSV");
  app.add_option("--graph", o.graph, "kNN edge list");
  app.add_option("--truth", o.truth, "ground-truth point cloud CSV");
  app.add_option("--est", o.est, "estimated point cloud CSV");
  app.add_option("--n", o.n, "number of generated points");
  app.add_option("--k", o.k, "sparse, dense or an integer");
  app.add_option("--d", o.d, "embedding dimension")->check(CLI::PositiveNumber);
  app.add_option("--method", o.method, "asap-loe, loe-bfgs, loe-mm, le or lpem")
      ->check(CLI::IsMember({"asap-loe", "loe-bfgs", "loe-mm", "le", "lpem"}));
  app.add_option("--methods", o.methods, "pareto grid: method[:v1,v2,...] ...");
  app.add_option("--mps", o.mps, "maximum patch size");
  app.add_option("--iters", o.iters, "LOE iterations");
  app.add_option("--delta", o.delta, "ordinal margin");
  app.add_option("--lambda", o.lambda, "TV weight of the density estimate");
  app.add_option("--resolution", o.resolution, "density grid cells per side");
  app.add_option("--seed", o.seed, "random seed");
  app.add_option("--seeds", o.seeds, "pareto: seeds seed .. seed + seeds - 1");
  o.threads = default_threads();
  app.add_option("--threads", o.threads,
                 "worker threads (default: ORDEMBED_THREADS, else 1)");
  app.add_option("--out", o.out, "output directory");
  app.add_flag("--skip-scale-sync", o.skip_scale_sync);
  app.add_flag("--skip-rigidity", o.skip_rigidity);
  app.add_option("--export-lp", o.export_lp, "write the LP (method lpem)");
  app.add_option("--lp-solver", o.lp_solver, "ipm or simplex")
      ->check(CLI::IsMember({"ipm", "simplex"}));
  app.add_flag("--from-points", o.from_points,
               "density: estimate from the points instead of an embedding");

  auto *generate = app.add_subcommand("generate", "sample a synthetic point cloud");
  auto *graph = app.add_subcommand("graph", "build a kNN graph");
  auto *embed = app.add_subcommand("embed", "embed a kNN graph");
  auto *eval = app.add_subcommand("eval", "score an embedding against the truth");
  auto *density = app.add_subcommand("density", "TV-penalized density estimate");
  auto *pareto = app.add_subcommand("pareto", "method x parameter grid as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    require(o.threads >= 1, ErrorKind::kInvalidParameter,
            "--threads (or ORDEMBED_THREADS) must be >= 1");
    if (*generate)
      cmd_generate(o);
    else if (*graph)
      cmd_graph(o);
    else if (*embed)
      cmd_embed(o);
    else if (*eval)
      cmd_eval(o);
    else if (*density)
      cmd_density(o);
    else if (*pareto)
      cmd_pareto(o);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
