#pragma once

#include <vector>

#include "srad/core.hpp"

namespace srad {

struct ClusterResult {
  std::vector<int> labels;      // one of {0,1} per point
  std::vector<double> center0;  // center of label-0 points
  std::vector<double> center1;
  double center_distance = 0.0;  // ||center0 - center1||_2
  bool degenerate = false;       // single cluster (m = 1 or all points identical)
  double sse = 0.0;              // within-cluster sum of squared distances
};

struct KMeansConfig {
  int restarts = 10;
  int max_iters = 100;
  double tol = 1e-6;
};

// Lloyd's algorithm with k = 2 and k-means++ seeding; keeps the restart
// with minimum SSE. Label 0 goes to the lexicographically smaller center so
// the output is orientation-canonical. Requires m >= 2.
ClusterResult kmeans2(const Matrix& points, RngHandle rng, const KMeansConfig& cfg = {});

// The m = 1 fallback: a single cluster holding the one point.
ClusterResult cluster_degenerate(const Matrix& points);

// Gradient of center_distance w.r.t. each point with assignments held
// fixed: (C0-C1)/(d*n0) for label-0 points, the negation over n1 otherwise.
// Requires a non-degenerate result with d > 0.
Matrix center_distance_gradient(const Matrix& points, const ClusterResult& result);

}  // namespace srad
