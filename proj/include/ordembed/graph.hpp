#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace ordembed {

using Edge = std::pair<int, int>;

// Directed unweighted graph with sorted, duplicate-free out-neighbor lists.
class Digraph {
public:
  Digraph() = default;
  // Throws InvalidInput on out-of-range ids, self-loops or duplicates.
  Digraph(int n, std::vector<std::vector<int>> out_neighbors);

  int size() const { return static_cast<int>(out_.size()); }
  std::span<const int> out(int v) const { return out_[v]; }
  int out_degree(int v) const { return static_cast<int>(out_[v].size()); }
  std::size_t edge_count() const { return edges_; }
  bool has_edge(int from, int to) const;

  // Returns the out-degree shared by every vertex, or -1 if irregular.
  int regular_degree() const;

  friend bool operator==(const Digraph &, const Digraph &) = default;

private:
  std::vector<std::vector<int>> out_;
  std::size_t edges_ = 0;
};

// Undirected simple graph, adjacency lists sorted.
class UGraph {
public:
  UGraph() = default;
  UGraph(int n, std::span<const Edge> edges);

  int size() const { return static_cast<int>(adj_.size()); }
  std::span<const int> neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }
  std::size_t edge_count() const { return edges_; }
  bool has_edge(int a, int b) const;

  // Each undirected edge once, with first < second.
  std::vector<Edge> edges() const;

  // Graph induced on `vertices`, relabelled to 0..|vertices|-1 in the order
  // given.
  UGraph induced(std::span<const int> vertices) const;

  // Component label per vertex; returns the number of components.
  int components(std::vector<int> &label) const;
  bool connected() const;

private:
  std::vector<std::vector<int>> adj_;
  std::size_t edges_ = 0;
};

// A v B v B^T: edge {a,b} iff a->b or b->a.
UGraph symmetrize(const Digraph &g);

// Directed kNN graph: every vertex has exactly k out-neighbors, k < n.
class KnnGraph {
public:
  KnnGraph() = default;
  KnnGraph(Digraph graph, int k);

  int size() const { return graph_.size(); }
  int k() const { return k_; }
  const Digraph &graph() const { return graph_; }
  std::span<const int> out(int v) const { return graph_.out(v); }

  friend bool operator==(const KnnGraph &, const KnnGraph &) = default;

private:
  Digraph graph_;
  int k_ = 0;
};

} // namespace ordembed
