#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

// Point cloud CSV: header `x1,...,xd[,label]`, one point per row. On load the
// header names are not checked; a trailing non-numeric column is read as the
// label. Coordinates are written with 17 significant digits.
PointCloud read_cloud(std::istream &in);
void write_cloud(std::ostream &out, const PointCloud &cloud);
PointCloud load_cloud(const std::filesystem::path &path);
void save_cloud(const std::filesystem::path &path, const PointCloud &cloud);

// Edge list: `src dst` per line, 0-based. Lines starting with '#' are
// comments, except a first line of the form `# n=<n> k=<k>` which is parsed
// as the size header.
struct EdgeList {
  Digraph graph;
  std::optional<int> k; // from the header, if present
};

EdgeList read_edge_list(std::istream &in);
EdgeList load_edge_list(const std::filesystem::path &path);

// Requires the `# n=<n> k=<k>` header and exactly k out-edges per vertex.
KnnGraph load_knn_graph(const std::filesystem::path &path);

void write_edge_list(std::ostream &out, const Digraph &g,
                     std::optional<int> k = std::nullopt);
void save_edge_list(const std::filesystem::path &path, const KnnGraph &g);

// Sparse triplets `i,j,1`, one directed edge per line.
void write_adjacency_triplets(std::ostream &out, const Digraph &g);

} // namespace ordembed
