#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

// (1/n^2) * sum_ij |A_ij - B_ij| over the two 0/1 adjacency matrices.
double a_error(const Digraph &a, const Digraph &b);

// Number of directed edges of `truth` missing from `estimate`.
std::size_t misplaced_edges(const Digraph &truth, const Digraph &estimate);

// A-error of the kNN graph of `estimate` against `truth`, with truth's k.
double a_error(const KnnGraph &truth, const PointCloud &estimate);

// Optimal similarity map candidate -> reference:
//   aligned = scale * rotation * candidate + translation.
struct SimilarityFit {
  double scale = 1.0;
  Eigen::MatrixXd rotation; // orthogonal, reflections allowed
  Eigen::VectorXd translation;
  // Residual sum of squares divided by the reference's centered sum of
  // squares.
  double error = 0.0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd &points) const;
};

SimilarityFit procrustes_fit(const PointCloud &reference,
                             const PointCloud &candidate);

double procrustes_error(const PointCloud &reference,
                        const PointCloud &candidate);

} // namespace ordembed
