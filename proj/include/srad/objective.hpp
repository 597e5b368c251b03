#pragma once

#include <cstdint>
#include <span>

#include "srad/core.hpp"
#include "srad/clustering.hpp"

namespace srad {

struct Hyperparameters {
  double lambda = 0.05;       // clustering-loss trade-off
  double alpha = 1.0;         // cap on the normal-video distance loss
  double d_floor = 1e-3;      // clamp below which 1/d stops growing
  double learning_rate = 5e-5;
  double dropout_rate = 0.6;
  std::size_t hidden_width = 512;
  KMeansConfig kmeans;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
};

struct LossBreakdown {
  double regression = 0.0;  // L_r
  double clustering = 0.0;  // L_c (0 when the term is skipped)
  double total = 0.0;       // L_r + lambda * L_c
  double d_used = 0.0;      // clamped center distance the loss saw
};

struct RegressionLoss {
  double value = 0.0;
  std::vector<double> d_scores;  // dL_r/dscore, length m
};

// Mean squared error over a video's fragments.
RegressionLoss regression_loss(std::span<const double> targets,
                               std::span<const double> scores);

struct ClusteringLoss {
  double value = 0.0;
  double d_distance = 0.0;  // dL_c/dd (0 at the kinks and beyond the clamp)
  double d_used = 0.0;
};

// Normal video: min(alpha, d). Anomalous video: 1/max(d, d_floor).
ClusteringLoss clustering_loss(double center_distance, int video_label, double alpha,
                               double d_floor);

double total_loss(double regression, double clustering, double lambda);

}  // namespace srad
