#include "srad/selfreason.hpp"

#include <cmath>

namespace srad {

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("cosine: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na <= 0.0 || nb <= 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

PseudoDecision orient_pseudo_labels(std::span<const double> scores,
                                    std::span<const int> cluster_labels) {
  if (scores.size() != cluster_labels.size())
    throw ShapeError("orient_pseudo_labels: length mismatch");

  const std::size_t m = scores.size();
  std::vector<double> as_is(m), inverted(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (cluster_labels[i] != 0 && cluster_labels[i] != 1)
      throw ValidationError("orient_pseudo_labels: cluster labels must be binary");
    as_is[i] = static_cast<double>(cluster_labels[i]);
    inverted[i] = 1.0 - as_is[i];
  }

  PseudoDecision d;
  d.sim_as_is = cosine(scores, as_is);
  d.sim_inverted = cosine(scores, inverted);
  d.orientation =
      d.sim_as_is >= d.sim_inverted ? Orientation::kAsIs : Orientation::kInverted;
  d.labels.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    d.labels[i] = d.orientation == Orientation::kAsIs ? cluster_labels[i]
                                                      : 1 - cluster_labels[i];
  return d;
}

TrainingTargets training_targets(int video_label, std::size_t num_fragments,
                                 const std::optional<PseudoDecision>& pseudo,
                                 bool use_pseudo_labels) {
  TrainingTargets t;
  if (video_label == 0) {
    t.y.assign(num_fragments, 0.0);
    return t;
  }
  if (!use_pseudo_labels) {
    t.y.assign(num_fragments, 1.0);
    return t;
  }
  if (!pseudo.has_value())
    throw ValidationError("training_targets: anomalous video needs pseudo-labels");
  if (pseudo->labels.size() != num_fragments)
    throw ShapeError("training_targets: pseudo-label length mismatch");
  t.y.resize(num_fragments);
  for (std::size_t i = 0; i < num_fragments; ++i)
    t.y[i] = static_cast<double>(pseudo->labels[i]);
  return t;
}

}  // namespace srad
