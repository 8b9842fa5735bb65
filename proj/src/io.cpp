#include "ordembed/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ordembed/error.hpp"

namespace ordembed {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double &v) {
  if (s.empty())
    return false;
  if (s.front() == '+')
    s.remove_prefix(1);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_int(std::string_view s, long long &v) {
  if (s.empty())
    return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

[[noreturn]] void parse_fail(std::size_t line, const std::string &msg) {
  throw Error(ErrorKind::kParseError,
              "line " + std::to_string(line) + ": " + msg);
}

std::ifstream open_in(const std::filesystem::path &path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kInvalidInput,
          "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path &path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::kInvalidInput,
          "cannot write " + path.string());
  return out;
}

} // namespace

// Rows are numeric except for at most one label column, which must be the
// first or the last. A first row that fails to parse as data is the header.
PointCloud read_cloud(std::istream &in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> values;
  std::vector<std::string> labels;
  int dim = -1;
  int label_col = -2; // -2 unknown, -1 none, else column index
  int ncols = -1;
  bool seen_row = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty())
      continue;
    const auto fields = split_csv(body);
    std::vector<bool> numeric(fields.size());
    double tmp;
    int bad = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      numeric[c] = parse_double(fields[c], tmp);
      bad += !numeric[c];
    }
    if (!seen_row) {
      seen_row = true;
      const bool looks_header =
          bad > 1 || (bad == 1 && fields.size() == 1) ||
          (bad == 1 && numeric.front() && numeric.back());
      if (looks_header)
        continue;
    }
    if (ncols < 0) {
      ncols = static_cast<int>(fields.size());
      if (bad == 0)
        label_col = -1;
      else if (bad == 1 && !numeric.back() && ncols > 1)
        label_col = ncols - 1;
      else if (bad == 1 && !numeric.front() && ncols > 1)
        label_col = 0;
      else
        parse_fail(lineno, "malformed row");
      dim = ncols - (label_col >= 0 ? 1 : 0);
    }
    if (static_cast<int>(fields.size()) != ncols)
      parse_fail(lineno, "expected " + std::to_string(ncols) +
                             " columns, got " + std::to_string(fields.size()));
    for (int c = 0; c < ncols; ++c) {
      if (c == label_col) {
        labels.emplace_back(fields[c]);
        continue;
      }
      double v;
      if (!parse_double(fields[c], v))
        parse_fail(lineno, "non-numeric coordinate '" +
                               std::string(fields[c]) + "'");
      if (!std::isfinite(v))
        parse_fail(lineno, "non-finite coordinate");
      values.push_back(v);
    }
  }
  if (dim <= 0)
    throw Error(ErrorKind::kParseError, "no data rows");
  const Eigen::Index n = static_cast<Eigen::Index>(values.size()) / dim;
  Eigen::MatrixXd x = Eigen::Map<Eigen::MatrixXd>(values.data(), dim, n);
  return PointCloud(std::move(x), std::move(labels));
}

void write_cloud(std::ostream &out, const PointCloud &cloud) {
  for (int a = 0; a < cloud.dim(); ++a)
    out << (a ? "," : "") << 'x' << a + 1;
  if (cloud.has_labels())
    out << ",label";
  out << '\n';
  out << std::setprecision(17);
  for (int i = 0; i < cloud.size(); ++i) {
    for (int a = 0; a < cloud.dim(); ++a)
      out << (a ? "," : "") << cloud.coords()(a, i);
    if (cloud.has_labels())
      out << ',' << cloud.labels()[i];
    out << '\n';
  }
}

PointCloud load_cloud(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_cloud(in);
}

void save_cloud(const std::filesystem::path &path, const PointCloud &cloud) {
  auto out = open_out(path);
  write_cloud(out, cloud);
}

EdgeList read_edge_list(std::istream &in) {
  std::string line;
  std::size_t lineno = 0;
  long long header_n = -1;
  std::optional<int> k;
  std::vector<std::pair<long long, long long>> edges;
  std::vector<std::size_t> edge_line;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = trim(line);
    if (body.empty())
      continue;
    if (body.front() == '#') {
      if (lineno == 1) {
        std::istringstream hs{std::string(body.substr(1))};
        std::string tok;
        while (hs >> tok) {
          long long v;
          if (tok.rfind("n=", 0) == 0) {
            if (!parse_int(std::string_view(tok).substr(2), v) || v < 0)
              parse_fail(lineno, "bad header field '" + tok + "'");
            header_n = v;
          } else if (tok.rfind("k=", 0) == 0) {
            if (!parse_int(std::string_view(tok).substr(2), v) || v < 0)
              parse_fail(lineno, "bad header field '" + tok + "'");
            k = static_cast<int>(v);
          }
        }
      }
      continue;
    }
    std::istringstream ls{std::string(body)};
    std::string a, b, extra;
    long long s, t;
    if (!(ls >> a >> b) || (ls >> extra) || !parse_int(a, s) ||
        !parse_int(b, t))
      parse_fail(lineno, "expected 'src dst'");
    if (s < 0 || t < 0)
      parse_fail(lineno, "negative vertex id");
    if (s == t)
      parse_fail(lineno, "self-loop at vertex " + std::to_string(s));
    edges.emplace_back(s, t);
    edge_line.push_back(lineno);
  }

  long long n = header_n;
  if (n < 0) {
    n = 0;
    for (auto [s, t] : edges)
      n = std::max({n, s + 1, t + 1});
  }
  std::vector<std::vector<int>> out(n);
  std::set<std::pair<long long, long long>> seen;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [s, t] = edges[e];
    if (s >= n || t >= n)
      parse_fail(edge_line[e], "vertex id out of range for n=" +
                                   std::to_string(n));
    if (!seen.insert(edges[e]).second)
      parse_fail(edge_line[e], "duplicate edge " + std::to_string(s) + " " +
                                   std::to_string(t));
    out[s].push_back(static_cast<int>(t));
  }
  return EdgeList{Digraph(static_cast<int>(n), std::move(out)), k};
}

EdgeList load_edge_list(const std::filesystem::path &path) {
  auto in = open_in(path);
  return read_edge_list(in);
}

KnnGraph load_knn_graph(const std::filesystem::path &path) {
  EdgeList e = load_edge_list(path);
  if (!e.k)
    throw Error(ErrorKind::kParseError,
                path.string() + ": missing '# n=<n> k=<k>' header");
  const int k = *e.k;
  for (int v = 0; v < e.graph.size(); ++v)
    if (e.graph.out_degree(v) != k)
      throw Error(ErrorKind::kParseError,
                  path.string() + ": vertex " + std::to_string(v) + " has " +
                      std::to_string(e.graph.out_degree(v)) +
                      " out-edges, header says k=" + std::to_string(k));
  return KnnGraph(std::move(e.graph), k);
}

void write_edge_list(std::ostream &out, const Digraph &g,
                     std::optional<int> k) {
  if (k)
    out << "# n=" << g.size() << " k=" << *k << '\n';
  for (int v = 0; v < g.size(); ++v)
    for (int w : g.out(v))
      out << v << ' ' << w << '\n';
}

void save_edge_list(const std::filesystem::path &path, const KnnGraph &g) {
  auto out = open_out(path);
  write_edge_list(out, g.graph(), g.k());
}

void write_adjacency_triplets(std::ostream &out, const Digraph &g) {
  for (int v = 0; v < g.size(); ++v)
    for (int w : g.out(v))
      out << v << ',' << w << ",1\n";
}

} // namespace ordembed
