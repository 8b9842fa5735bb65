#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ordembed {

// n points in R^d stored column-wise (d x n), the layout used throughout the
// library for embeddings.
class PointCloud {
public:
  PointCloud() = default;
  explicit PointCloud(Eigen::MatrixXd coords,
                      std::vector<std::string> labels = {});

  int dim() const { return static_cast<int>(coords_.rows()); }
  int size() const { return static_cast<int>(coords_.cols()); }
  bool empty() const { return coords_.cols() == 0; }

  const Eigen::MatrixXd &coords() const { return coords_; }
  auto point(int i) const { return coords_.col(i); }

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string> &labels() const { return labels_; }

  friend bool operator==(const PointCloud &a, const PointCloud &b) {
    return a.coords_ == b.coords_ && a.labels_ == b.labels_;
  }

private:
  Eigen::MatrixXd coords_;
  std::vector<std::string> labels_;
};

} // namespace ordembed
