#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace testing {

inline Eigen::MatrixXd uniform_matrix(int rows, int cols, std::mt19937_64 &rng,
                                      double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = u(rng);
  return m;
}

inline Eigen::MatrixXd gaussian_matrix(int rows, int cols,
                                       std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = g(rng);
  return m;
}

// Haar-ish random orthogonal matrix; `reflect` forces det = -1.
inline Eigen::MatrixXd random_orthogonal(int d, std::mt19937_64 &rng,
                                         bool reflect = false) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(d, d, rng));
  Eigen::MatrixXd q = qr.householderQ();
  if ((q.determinant() < 0) != reflect)
    q.col(0) *= -1.0;
  return q;
}

inline ordembed::PointCloud uniform_cloud(int d, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return ordembed::PointCloud(uniform_matrix(d, n, rng));
}

// Random directed graph with each off-diagonal entry present w.p. p.
inline ordembed::Digraph random_digraph(int n, double p, std::mt19937_64 &rng) {
  std::bernoulli_distribution coin(p);
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && coin(rng))
        out[i].push_back(j);
  return ordembed::Digraph(n, std::move(out));
}

inline Eigen::MatrixXi dense_adjacency(const ordembed::Digraph &g) {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(g.size(), g.size());
  for (int v = 0; v < g.size(); ++v)
    for (int w : g.out(v))
      a(v, w) = 1;
  return a;
}

} // namespace testing
