#include "ordembed/baselines.hpp"

#include <cmath>
#include <sstream>

#include "ordembed/error.hpp"
#include "ordembed/linalg.hpp"

namespace ordembed {

Eigen::MatrixXd pairwise_distances(const PointCloud &cloud) {
  const Eigen::MatrixXd &x = cloud.coords();
  const Eigen::Index n = x.cols();
  const Eigen::VectorXd sq = x.colwise().squaredNorm().transpose();
  Eigen::MatrixXd g = x.transpose() * x;
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      d(i, j) = i == j ? 0.0 : std::sqrt(std::max(0.0, sq(i) + sq(j) - 2 * g(i, j)));
  return d;
}

void validate_distance_matrix(const Eigen::MatrixXd &d) {
  require(d.rows() == d.cols(), ErrorKind::kInvalidInput,
          "distance matrix is not square");
  require(d.allFinite(), ErrorKind::kInvalidInput,
          "distance matrix has non-finite entries");
  require(d.size() == 0 || d.minCoeff() >= 0.0, ErrorKind::kInvalidInput,
          "distance matrix has negative entries");
  require(d.diagonal().isZero(0.0), ErrorKind::kInvalidInput,
          "distance matrix diagonal is not zero");
  const double scale = d.size() ? std::max(1.0, d.maxCoeff()) : 1.0;
  require((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
          ErrorKind::kInvalidInput, "distance matrix is not symmetric");
}

MdsResult classical_mds(const Eigen::MatrixXd &dist, int d) {
  validate_distance_matrix(dist);
  require(d >= 1, ErrorKind::kInvalidParameter, "dimension must be >= 1");
  const Eigen::Index n = dist.rows();
  require(n >= 1, ErrorKind::kInvalidInput, "empty distance matrix");

  // B = -1/2 J D.^2 J
  Eigen::MatrixXd b = -0.5 * dist.array().square().matrix();
  const Eigen::VectorXd row_mean = b.rowwise().mean();
  const double mean = row_mean.mean();
  b.rowwise() -= row_mean.transpose();
  b.colwise() -= row_mean;
  b.array() += mean;
  b = 0.5 * (b + b.transpose()).eval();

  const int take = static_cast<int>(std::min<Eigen::Index>(d, n));
  const EigenPairs ep = top_eigenpairs(b, take);

  MdsResult r;
  r.eigenvalues = Eigen::VectorXd::Zero(d);
  r.eigenvalues.head(take) = ep.values;
  const double tol = 1e-12 * std::max(1.0, std::abs(ep.values(0)));
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, n);
  int positive = 0;
  for (int c = 0; c < take; ++c) {
    if (ep.values(c) <= tol)
      continue;
    ++positive;
    x.row(c) = std::sqrt(ep.values(c)) * ep.vectors.col(c).transpose();
  }
  if (take > 0 && ep.values(take - 1) < -tol) {
    std::ostringstream msg;
    msg << "negative Gram eigenvalue " << ep.values(take - 1)
        << " clamped to zero";
    r.warnings.push_back(msg.str());
  }
  if (positive < d)
    r.warnings.push_back("only " + std::to_string(positive) +
                         " positive eigenvalues; output zero-padded to d = " +
                         std::to_string(d));
  r.cloud = PointCloud(std::move(x));
  return r;
}

double stress(const Eigen::MatrixXd &x, const Eigen::MatrixXd &dist,
              const Eigen::MatrixXd &weights) {
  const Eigen::Index n = x.cols();
  double s = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) {
      const double w = weights.size() ? weights(i, j) : 1.0;
      const double e = (x.col(i) - x.col(j)).norm() - dist(i, j);
      s += w * e * e;
    }
  return s;
}

StressResult stress_mds(const Eigen::MatrixXd &dist, int d,
                        const StressConfig &config) {
  validate_distance_matrix(dist);
  require(d >= 1, ErrorKind::kInvalidParameter, "dimension must be >= 1");
  require(config.max_iters >= 0, ErrorKind::kInvalidParameter,
          "max_iters must be >= 0");
  const Eigen::Index n = dist.rows();
  const bool weighted = config.weights.size() > 0;
  if (weighted) {
    require(config.weights.rows() == n && config.weights.cols() == n,
            ErrorKind::kInvalidInput, "weights must be n x n");
    require(config.weights.allFinite() && config.weights.minCoeff() >= 0.0,
            ErrorKind::kInvalidInput, "weights must be finite and >= 0");
  }

  Eigen::MatrixXd x;
  if (config.initial) {
    x = *config.initial;
    require(x.rows() == d && x.cols() == n && x.allFinite(),
            ErrorKind::kInvalidInput, "initial configuration must be d x n");
  } else {
    x = classical_mds(dist, d).cloud.coords();
  }

  // V^+ for the weighted Laplacian V; (V + 11^T/n)^{-1} - 11^T/n when the
  // weight graph is connected.
  Eigen::MatrixXd vplus;
  if (weighted) {
    Eigen::MatrixXd v = -config.weights;
    v.diagonal().setZero();
    v.diagonal() = -v.rowwise().sum();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(v + ones);
    require(ldlt.info() == Eigen::Success, ErrorKind::kNumericalError,
            "weight Laplacian factorization failed");
    vplus = ldlt.solve(Eigen::MatrixXd::Identity(n, n)) - ones;
  }

  StressResult r;
  double s = stress(x, dist, config.weights);
  r.stress_trace.push_back(s);
  Eigen::MatrixXd b(n, n);
  for (r.iterations = 0; r.iterations < config.max_iters; ++r.iterations) {
    b.setZero();
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < j; ++i) {
        const double dij = (x.col(i) - x.col(j)).norm();
        if (dij <= 0.0)
          continue;
        const double w = weighted ? config.weights(i, j) : 1.0;
        b(i, j) = b(j, i) = -w * dist(i, j) / dij;
      }
    b.diagonal() = -b.rowwise().sum();
    Eigen::MatrixXd next = weighted ? Eigen::MatrixXd(x * b * vplus)
                                    : Eigen::MatrixXd(x * b / double(n));
    const double s_next = stress(next, dist, config.weights);
    if (s_next > s)
      break; // only rounding can do this; keep the better iterate
    const double drop = s - s_next;
    x = std::move(next);
    s = s_next;
    r.stress_trace.push_back(s);
    if (drop <= config.tol * std::max(s, 1e-300)) {
      ++r.iterations;
      break;
    }
  }
  r.stress = s;
  r.cloud = PointCloud(std::move(x));
  return r;
}

PointCloud laplacian_eigenmaps(const UGraph &g, int d) {
  const int n = g.size();
  require(d >= 1 && d + 1 <= n, ErrorKind::kInvalidParameter,
          "need 1 <= d < n for eigenmaps");
  require(g.connected(), ErrorKind::kStructuralError,
          "eigenmaps needs a connected graph");
  Eigen::VectorXd isd;
  const SparseMatrix s = normalized_adjacency(g, isd);
  const EigenPairs ep = top_eigenpairs(s, d + 1);
  Eigen::MatrixXd x(d, n);
  for (int c = 0; c < d; ++c) {
    Eigen::VectorXd v = isd.asDiagonal() * ep.vectors.col(c + 1);
    v.normalize();
    Eigen::Index at;
    v.cwiseAbs().maxCoeff(&at);
    if (v(at) < 0)
      v = -v;
    x.row(c) = v.transpose();
  }
  return PointCloud(std::move(x));
}

PointCloud laplacian_eigenmaps(const KnnGraph &g, int d) {
  return laplacian_eigenmaps(symmetrize(g.graph()), d);
}

} // namespace ordembed
