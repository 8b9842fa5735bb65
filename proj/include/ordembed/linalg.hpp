#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace ordembed {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenPairs {
  Eigen::VectorXd values;  // descending
  Eigen::MatrixXd vectors; // unit columns
  double max_residual = 0; // max ||A v - lambda v||
};

// Largest `count` algebraic eigenpairs of a symmetric matrix. Small problems
// use a dense solver; larger ones Lanczos with full reorthogonalization.
EigenPairs top_eigenpairs(const SparseMatrix &a, int count,
                          std::uint64_t seed = 0, double tol = 1e-10);
EigenPairs top_eigenpairs(const Eigen::MatrixXd &a, int count);

// Problems up to this size go to the dense solver.
inline constexpr int kDenseEigenLimit = 1500;

// Nearest orthogonal matrix in Frobenius norm (U V^T of the SVD).
Eigen::MatrixXd polar_factor(const Eigen::MatrixXd &m);

// D^{-1/2} A D^{-1/2} for the 0/1 adjacency of an undirected graph given as
// sorted neighbor lists; `inv_sqrt_degree` receives D^{-1/2}.
class UGraph;
SparseMatrix normalized_adjacency(const UGraph &g,
                                  Eigen::VectorXd &inv_sqrt_degree);

} // namespace ordembed
