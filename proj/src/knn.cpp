#include "ordembed/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ordembed/error.hpp"

namespace ordembed {

KnnGraph build_knn_graph(const PointCloud &cloud, int k) {
  const int n = cloud.size();
  require(k >= 1 && k < n, ErrorKind::kInvalidParameter,
          "need 1 <= k < n (k=" + std::to_string(k) +
              ", n=" + std::to_string(n) + ")");
  const Eigen::MatrixXd &x = cloud.coords();
  require(x.allFinite(), ErrorKind::kInvalidInput,
          "non-finite coordinate in point cloud");

  std::vector<std::vector<int>> out(n);
  std::vector<double> dist(n);
  std::vector<int> order(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      dist[j] = (x.col(i) - x.col(j)).squaredNorm();
    int pos = 0;
    for (int j = 0; j < n; ++j)
      if (j != i)
        order[pos++] = j;
    auto closer = [&](int a, int b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    out[i].assign(order.begin(), order.begin() + k);
  }
  return KnnGraph(Digraph(n, std::move(out)), k);
}

int sparse_k(int n) {
  return static_cast<int>(std::ceil(2.0 * std::log(static_cast<double>(n))));
}

int dense_k(int n) {
  const double nn = static_cast<double>(n);
  return static_cast<int>(std::ceil(std::sqrt(nn * std::log(nn))));
}

} // namespace ordembed
