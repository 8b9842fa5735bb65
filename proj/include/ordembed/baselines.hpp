#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

// Plain Euclidean distances between the columns of the cloud.
Eigen::MatrixXd pairwise_distances(const PointCloud &cloud);

// Throws InvalidInput unless `d` is square, finite, nonnegative, symmetric to
// 1e-12 (relative to its largest entry) with a zero diagonal.
void validate_distance_matrix(const Eigen::MatrixXd &d);

struct MdsResult {
  PointCloud cloud;
  Eigen::VectorXd eigenvalues; // top d of the centered Gram matrix, unclamped
  std::vector<std::string> warnings;
};

// Classical (Torgerson) MDS on plain distances.
MdsResult classical_mds(const Eigen::MatrixXd &dist, int d);

struct StressConfig {
  int max_iters = 300;
  double tol = 1e-10; // relative stress decrease that stops the iteration
  Eigen::MatrixXd weights; // n x n symmetric; empty means all ones
  std::optional<Eigen::MatrixXd> initial; // d x n; classical MDS otherwise
};

struct StressResult {
  PointCloud cloud;
  double stress = 0.0;
  int iterations = 0;
  std::vector<double> stress_trace; // stress[0] is the start
};

// sum_{i<j} w_ij (|x_i - x_j| - D_ij)^2
double stress(const Eigen::MatrixXd &x, const Eigen::MatrixXd &dist,
              const Eigen::MatrixXd &weights = {});

// Weighted SMACOF (Guttman transform iterations).
StressResult stress_mds(const Eigen::MatrixXd &dist, int d,
                        const StressConfig &config = {});

// Eigenvectors 2..d+1 of the random-walk Laplacian of the symmetrized
// graph, each scaled to unit norm with its largest-magnitude entry positive.
PointCloud laplacian_eigenmaps(const UGraph &g, int d);
PointCloud laplacian_eigenmaps(const KnnGraph &g, int d);

} // namespace ordembed
