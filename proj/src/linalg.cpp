#include "ordembed/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ordembed/error.hpp"
#include "ordembed/graph.hpp"

namespace ordembed {

namespace {

EigenPairs take_top(const Eigen::VectorXd &vals, const Eigen::MatrixXd &vecs,
                    int count) {
  // Input ascending.
  EigenPairs out;
  out.values = vals.tail(count).reverse();
  out.vectors = vecs.rightCols(count).rowwise().reverse();
  return out;
}

EigenPairs lanczos(const SparseMatrix &a, int count, std::uint64_t seed,
                   double tol) {
  const Eigen::Index n = a.rows();
  const int max_steps = static_cast<int>(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  auto random_unit = [&](int existing, const Eigen::MatrixXd &basis) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
      v(i) = g(rng);
    for (int pass = 0; pass < 2; ++pass)
      v -= basis.leftCols(existing) *
           (basis.leftCols(existing).transpose() * v);
    return Eigen::VectorXd(v.normalized());
  };

  Eigen::MatrixXd v(n, std::min<Eigen::Index>(n, 64));
  std::vector<double> alpha, beta;
  v.col(0) = random_unit(0, v);
  double scale = 0.0;
  int steps = 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = a * v.col(j);
    const double aj = v.col(j).dot(w);
    alpha.push_back(aj);
    for (int pass = 0; pass < 2; ++pass)
      w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
    double bj = w.norm();
    scale = std::max(scale, std::abs(aj) + bj);
    steps = j + 1;

    const bool check = steps >= count && (steps % 8 == 0 || steps == n ||
                                          bj <= 1e-13 * scale);
    if (check) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
      for (int i = 0; i < steps; ++i) {
        t(i, i) = alpha[i];
        if (i + 1 < steps)
          t(i, i + 1) = t(i + 1, i) = beta[i];
      }
      ritz.compute(t);
      double worst = 0.0;
      for (int c = 0; c < count; ++c)
        worst = std::max(worst, std::abs(bj * ritz.eigenvectors()(
                                                  steps - 1, steps - 1 - c)));
      if (worst <= tol * scale || steps == n)
        break;
    }
    if (steps == n)
      break;
    if (v.cols() <= steps)
      v.conservativeResize(Eigen::NoChange,
                           std::min<Eigen::Index>(n, 2 * v.cols()));
    if (bj <= 1e-13 * scale) {
      // Invariant subspace found: continue from a fresh orthogonal direction.
      v.col(steps) = random_unit(steps, v);
      bj = 0.0;
    } else {
      v.col(steps) = w / bj;
    }
    beta.push_back(bj);
  }
  if (ritz.eigenvalues().size() != steps) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(steps, steps);
    for (int i = 0; i < steps; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < steps)
        t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    ritz.compute(t);
  }
  EigenPairs out = take_top(ritz.eigenvalues(), ritz.eigenvectors(), count);
  out.vectors = v.leftCols(steps) * out.vectors;
  for (int c = 0; c < count; ++c)
    out.vectors.col(c).normalize();
  return out;
}

void fill_residual(const SparseMatrix &a, EigenPairs &p) {
  p.max_residual = 0.0;
  for (Eigen::Index c = 0; c < p.values.size(); ++c)
    p.max_residual = std::max(
        p.max_residual,
        (a * p.vectors.col(c) - p.values(c) * p.vectors.col(c)).norm());
}

} // namespace

EigenPairs top_eigenpairs(const Eigen::MatrixXd &a, int count) {
  require(a.rows() == a.cols(), ErrorKind::kInvalidInput,
          "eigenproblem matrix must be square");
  require(count >= 1 && count <= a.rows(), ErrorKind::kInvalidParameter,
          "eigenpair count out of range");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::kNumericalError, "dense eigensolver failed");
  EigenPairs out = take_top(es.eigenvalues(), es.eigenvectors(), count);
  out.max_residual = 0.0;
  for (int c = 0; c < count; ++c)
    out.max_residual =
        std::max(out.max_residual, (a * out.vectors.col(c) -
                                    out.values(c) * out.vectors.col(c))
                                       .norm());
  return out;
}

EigenPairs top_eigenpairs(const SparseMatrix &a, int count,
                          std::uint64_t seed, double tol) {
  require(a.rows() == a.cols(), ErrorKind::kInvalidInput,
          "eigenproblem matrix must be square");
  require(count >= 1 && count <= a.rows(), ErrorKind::kInvalidParameter,
          "eigenpair count out of range");
  if (a.rows() <= kDenseEigenLimit)
    return top_eigenpairs(Eigen::MatrixXd(a), count);
  EigenPairs out = lanczos(a, count, seed, tol);
  fill_residual(a, out);
  const double norm_est = std::max(1.0, out.values.cwiseAbs().maxCoeff());
  if (!(out.max_residual <= 1e-6 * norm_est))
    throw Error(ErrorKind::kNumericalError,
                "Lanczos did not converge (residual " +
                    std::to_string(out.max_residual) + ")");
  return out;
}

Eigen::MatrixXd polar_factor(const Eigen::MatrixXd &m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU |
                                               Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

SparseMatrix normalized_adjacency(const UGraph &g,
                                  Eigen::VectorXd &inv_sqrt_degree) {
  const int n = g.size();
  inv_sqrt_degree.resize(n);
  for (int v = 0; v < n; ++v)
    inv_sqrt_degree(v) = g.degree(v) > 0 ? 1.0 / std::sqrt(g.degree(v)) : 0.0;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edge_count());
  for (int v = 0; v < n; ++v)
    for (int w : g.neighbors(v))
      trip.emplace_back(v, w, inv_sqrt_degree(v) * inv_sqrt_degree(w));
  SparseMatrix s(n, n);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

} // namespace ordembed
