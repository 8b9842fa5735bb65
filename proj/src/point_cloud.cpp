#include "ordembed/point_cloud.hpp"

#include <unordered_set>

#include "ordembed/error.hpp"

namespace ordembed {

PointCloud::PointCloud(Eigen::MatrixXd coords, std::vector<std::string> labels)
    : coords_(std::move(coords)), labels_(std::move(labels)) {
  require(coords_.rows() >= 1, ErrorKind::kInvalidInput,
          "point cloud needs dim >= 1");
  require(coords_.cols() >= 1, ErrorKind::kInvalidInput,
          "point cloud needs at least one point");
  require(coords_.allFinite(), ErrorKind::kInvalidInput,
          "point cloud has non-finite coordinates");
  if (!labels_.empty()) {
    require(static_cast<Eigen::Index>(labels_.size()) == coords_.cols(),
            ErrorKind::kInvalidInput, "label count does not match point count");
    std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
    require(seen.size() == labels_.size(), ErrorKind::kInvalidInput,
            "labels must be unique");
  }
}

} // namespace ordembed
