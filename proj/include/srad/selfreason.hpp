#pragma once

#include <optional>
#include <span>
#include <vector>

#include "srad/core.hpp"

namespace srad {

enum class Orientation { kAsIs, kInverted };

struct PseudoDecision {
  double sim_as_is = 0.0;     // cosine(scores, cluster labels)
  double sim_inverted = 0.0;  // cosine(scores, negated cluster labels)
  Orientation orientation = Orientation::kAsIs;
  std::vector<int> labels;  // per-fragment pseudo-labels in {0,1}
};

struct TrainingTargets {
  std::vector<double> y;  // per-fragment targets in {0,1}
};

// a.b / (|a||b|); zero norm on either side yields 0 so the contest between
// a labeling and its negation stays total.
double cosine(std::span<const double> a, std::span<const double> b);

// Picks the cluster labeling (as-is or negated) that better agrees with the
// network scores; ties keep the labeling as-is.
PseudoDecision orient_pseudo_labels(std::span<const double> scores,
                                    std::span<const int> cluster_labels);

// Fragment targets: all zeros for a normal video; the pseudo-labels for an
// anomalous one. With use_pseudo_labels = false an anomalous video gets
// all-ones targets instead.
TrainingTargets training_targets(int video_label, std::size_t num_fragments,
                                 const std::optional<PseudoDecision>& pseudo,
                                 bool use_pseudo_labels = true);

}  // namespace srad
