#pragma once

#include "ordembed/graph.hpp"
#include "ordembed/point_cloud.hpp"

namespace ordembed {

// Exact kNN by brute force. Ties in distance go to the smaller vertex id.
KnnGraph build_knn_graph(const PointCloud &cloud, int k);

// k = ceil(2 ln n)
int sparse_k(int n);
// k = ceil(sqrt(n ln n))
int dense_k(int n);

} // namespace ordembed
