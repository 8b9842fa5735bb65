#pragma once

#include <cstdint>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"

namespace ordembed {

struct RigidityOptions {
  int trials = 3;                 // majority vote over independent draws
  double rel_tol = 1e-10;         // rank tolerance: max_dim * sigma_max * rel_tol
  double config_scale = 1.0;      // random configuration drawn on [0, scale]^d
  bool fast_reject = true;        // connectivity / min-degree shortcut
};

struct RigidityReport {
  bool locally_rigid = false;
  bool globally_rigid = false;
  int rigidity_rank = 0;
  int stress_rank = 0;
  int trials = 0;
  std::string diagnostic;
};

struct LocalRigidity {
  bool rigid = false;
  int rank = 0;
};

// Randomized generic rigidity tests in R^d for a simple undirected graph.
// Graphs with n <= d + 1 vertices are rigid exactly when complete.
LocalRigidity local_rigidity(std::span<const Edge> edges, int n, int d,
                             std::uint64_t seed,
                             const RigidityOptions &opts = {});
RigidityReport global_rigidity(std::span<const Edge> edges, int n, int d,
                               std::uint64_t seed,
                               const RigidityOptions &opts = {});

inline RigidityReport global_rigidity(const UGraph &g, int d,
                                      std::uint64_t seed,
                                      const RigidityOptions &opts = {}) {
  const auto e = g.edges();
  return global_rigidity(e, g.size(), d, seed, opts);
}

// Numerical rank of a matrix from its singular values, tau = max_dim *
// sigma_max * rel_tol.
int numerical_rank(const Eigen::VectorXd &singular_values, Eigen::Index rows,
                   Eigen::Index cols, double rel_tol);

} // namespace ordembed
