#include "ordembed/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ordembed/error.hpp"
#include "ordembed/knn.hpp"

namespace ordembed {

std::size_t misplaced_edges(const Digraph &truth, const Digraph &estimate) {
  require(truth.size() == estimate.size(), ErrorKind::kInvalidInput,
          "adjacency shapes differ");
  std::size_t missing = 0;
  for (int v = 0; v < truth.size(); ++v) {
    auto t = truth.out(v);
    auto e = estimate.out(v);
    // Both rows are sorted.
    std::size_t i = 0, j = 0;
    while (i < t.size()) {
      if (j == e.size() || t[i] < e[j]) {
        ++missing;
        ++i;
      } else if (t[i] == e[j]) {
        ++i;
        ++j;
      } else {
        ++j;
      }
    }
  }
  return missing;
}

double a_error(const Digraph &a, const Digraph &b) {
  require(a.size() == b.size(), ErrorKind::kInvalidInput,
          "adjacency shapes differ");
  const std::size_t only_a = misplaced_edges(a, b);
  const std::size_t only_b = misplaced_edges(b, a);
  const double n = static_cast<double>(a.size());
  if (a.size() == 0)
    return 0.0;
  return static_cast<double>(only_a + only_b) / (n * n);
}

double a_error(const KnnGraph &truth, const PointCloud &estimate) {
  require(estimate.size() == truth.size(), ErrorKind::kInvalidInput,
          "embedding size differs from graph size");
  const KnnGraph est = build_knn_graph(estimate, truth.k());
  return a_error(truth.graph(), est.graph());
}

Eigen::MatrixXd SimilarityFit::apply(const Eigen::MatrixXd &points) const {
  Eigen::MatrixXd out = scale * (rotation * points);
  out.colwise() += translation;
  return out;
}

SimilarityFit procrustes_fit(const PointCloud &reference,
                             const PointCloud &candidate) {
  require(reference.size() == candidate.size() &&
              reference.dim() == candidate.dim(),
          ErrorKind::kInvalidInput, "procrustes inputs differ in shape");
  const Eigen::VectorXd mu_ref = reference.coords().rowwise().mean();
  const Eigen::VectorXd mu_cand = candidate.coords().rowwise().mean();
  const Eigen::MatrixXd x = reference.coords().colwise() - mu_ref;
  const Eigen::MatrixXd y = candidate.coords().colwise() - mu_cand;
  const double ssx = x.squaredNorm();
  const double ssy = y.squaredNorm();
  require(ssx > 0.0, ErrorKind::kDegenerateInput,
          "procrustes reference has all points identical");

  const int d = reference.dim();
  SimilarityFit fit;
  if (ssy == 0.0) {
    fit.scale = 0.0;
    fit.rotation = Eigen::MatrixXd::Identity(d, d);
    fit.translation = mu_ref;
    fit.error = 1.0;
    return fit;
  }
  // max_{Q orthogonal} tr(Q^T X Y^T) = sum of singular values of X Y^T.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x * y.transpose(),
                                        Eigen::ComputeFullU |
                                            Eigen::ComputeFullV);
  const double trace = svd.singularValues().sum();
  fit.rotation = svd.matrixU() * svd.matrixV().transpose();
  fit.scale = trace / ssy;
  fit.translation = mu_ref - fit.scale * fit.rotation * mu_cand;
  fit.error = std::max(0.0, 1.0 - trace * trace / (ssx * ssy));
  return fit;
}

double procrustes_error(const PointCloud &reference,
                        const PointCloud &candidate) {
  return procrustes_fit(reference, candidate).error;
}

} // namespace ordembed
