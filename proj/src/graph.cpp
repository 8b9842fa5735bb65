#include "ordembed/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ordembed/error.hpp"

namespace ordembed {

Digraph::Digraph(int n, std::vector<std::vector<int>> out_neighbors)
    : out_(std::move(out_neighbors)) {
  require(n >= 0 && static_cast<int>(out_.size()) == n,
          ErrorKind::kInvalidInput, "adjacency list count must equal n");
  for (int v = 0; v < n; ++v) {
    auto &row = out_[v];
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size(); ++i) {
      const int w = row[i];
      if (w < 0 || w >= n)
        throw Error(ErrorKind::kInvalidInput,
                    "edge " + std::to_string(v) + "->" + std::to_string(w) +
                        " out of range");
      if (w == v)
        throw Error(ErrorKind::kInvalidInput,
                    "self-loop at vertex " + std::to_string(v));
      if (i > 0 && row[i - 1] == w)
        throw Error(ErrorKind::kInvalidInput,
                    "duplicate edge " + std::to_string(v) + "->" +
                        std::to_string(w));
    }
    edges_ += row.size();
  }
}

bool Digraph::has_edge(int from, int to) const {
  const auto &row = out_[from];
  return std::binary_search(row.begin(), row.end(), to);
}

int Digraph::regular_degree() const {
  if (out_.empty())
    return -1;
  const auto k = out_[0].size();
  for (const auto &row : out_)
    if (row.size() != k)
      return -1;
  return static_cast<int>(k);
}

UGraph::UGraph(int n, std::span<const Edge> edges) : adj_(n) {
  for (auto [a, b] : edges) {
    require(a >= 0 && a < n && b >= 0 && b < n && a != b,
            ErrorKind::kInvalidInput, "invalid undirected edge");
    adj_[a].push_back(b);
    adj_[b].push_back(a);
  }
  for (auto &row : adj_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    edges_ += row.size();
  }
  edges_ /= 2;
}

bool UGraph::has_edge(int a, int b) const {
  const auto &row = adj_[a];
  return std::binary_search(row.begin(), row.end(), b);
}

std::vector<Edge> UGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edges_);
  for (int a = 0; a < size(); ++a)
    for (int b : adj_[a])
      if (a < b)
        out.emplace_back(a, b);
  return out;
}

UGraph UGraph::induced(std::span<const int> vertices) const {
  std::vector<int> local(adj_.size(), -1);
  for (std::size_t i = 0; i < vertices.size(); ++i)
    local[vertices[i]] = static_cast<int>(i);
  std::vector<Edge> sub;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (int w : adj_[vertices[i]]) {
      const int j = local[w];
      if (j > static_cast<int>(i))
        sub.emplace_back(static_cast<int>(i), j);
    }
  return UGraph(static_cast<int>(vertices.size()), sub);
}

int UGraph::components(std::vector<int> &label) const {
  const int n = size();
  label.assign(n, -1);
  int count = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0)
      continue;
    label[s] = count;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adj_[v])
        if (label[w] < 0) {
          label[w] = count;
          stack.push_back(w);
        }
    }
    ++count;
  }
  return count;
}

bool UGraph::connected() const {
  std::vector<int> label;
  return components(label) <= 1;
}

UGraph symmetrize(const Digraph &g) {
  std::vector<Edge> edges;
  edges.reserve(g.edge_count());
  for (int v = 0; v < g.size(); ++v)
    for (int w : g.out(v))
      edges.emplace_back(v, w);
  return UGraph(g.size(), edges);
}

KnnGraph::KnnGraph(Digraph graph, int k) : graph_(std::move(graph)), k_(k) {
  const int n = graph_.size();
  require(k >= 1 && k < n, ErrorKind::kInvalidParameter,
          "kNN graph needs 1 <= k < n (k=" + std::to_string(k) +
              ", n=" + std::to_string(n) + ")");
  for (int v = 0; v < n; ++v)
    require(graph_.out_degree(v) == k, ErrorKind::kInvalidInput,
            "vertex " + std::to_string(v) + " has " +
                std::to_string(graph_.out_degree(v)) +
                " out-neighbors, expected k=" + std::to_string(k));
}

} // namespace ordembed
