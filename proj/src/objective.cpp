#include "srad/objective.hpp"

namespace srad {

RegressionLoss regression_loss(std::span<const double> targets,
                               std::span<const double> scores) {
  if (targets.size() != scores.size())
    throw ShapeError("regression_loss: length mismatch");
  if (targets.empty()) throw ShapeError("regression_loss: empty input");

  const double inv_m = 1.0 / static_cast<double>(targets.size());
  RegressionLoss out;
  out.d_scores.resize(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double diff = scores[i] - targets[i];
    out.value += diff * diff * inv_m;
    out.d_scores[i] = 2.0 * inv_m * diff;
  }
  return out;
}

ClusteringLoss clustering_loss(double center_distance, int video_label, double alpha,
                               double d_floor) {
  if (center_distance < 0.0)
    throw ValidationError("clustering_loss: distance must be nonnegative");

  ClusteringLoss out;
  if (video_label == 0) {
    out.d_used = center_distance;
    if (center_distance < alpha) {
      out.value = center_distance;
      out.d_distance = 1.0;
    } else {
      out.value = alpha;
      out.d_distance = 0.0;
    }
  } else {
    const double clamped = center_distance > d_floor ? center_distance : d_floor;
    out.d_used = clamped;
    out.value = 1.0 / clamped;
    out.d_distance = center_distance > d_floor ? -1.0 / (clamped * clamped) : 0.0;
  }
  return out;
}

double total_loss(double regression, double clustering, double lambda) {
  return regression + lambda * clustering;
}

}  // namespace srad
