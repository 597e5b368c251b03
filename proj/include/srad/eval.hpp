#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srad/core.hpp"
#include "srad/network.hpp"

namespace srad {

struct FrameScores {
  std::string video_id;
  std::vector<double> scores;                     // one per frame
  std::optional<std::vector<int>> ground_truth;   // one per frame
};

// Every frame inherits the score of its fragment floor(j/k); the final
// fragment covers the remainder.
std::vector<double> expand_to_frames(std::span<const double> fragment_scores,
                                     std::size_t k, std::size_t num_frames);

// Mann-Whitney AUC with half credit for ties. Needs both classes present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Per-video frame-level ground truth, keyed by video_id.
using FrameTruth = std::map<std::string, std::vector<int>>;

// Interval annotation file: video_id<TAB>start_frame<TAB>end_frame per
// line, 0-indexed, end-exclusive. Videos without intervals are all-normal.
FrameTruth load_ground_truth(const std::filesystem::path& path, const Dataset& dataset);
void save_ground_truth(const FrameTruth& truth, const Dataset& dataset,
                       const std::filesystem::path& path);

// Fragment-level truth expanded to frames using the fragment mapping.
FrameTruth fragment_truth_to_frames(
    const std::map<std::string, std::vector<int>>& fragment_truth,
    const Dataset& dataset);

struct EvalResult {
  double auc = 0.0;  // pooled over all frames of all videos
  std::vector<FrameScores> per_video;
};

// Inference-mode scoring of every video, expanded to frames and pooled
// into one AUC. Every video must carry ground truth.
EvalResult evaluate(const Model& model, const Dataset& dataset,
                    const FrameTruth& truth);

// Timeline CSV: frame_index,score,ground_truth (last column empty when
// truth is absent).
void write_timeline_csv(const FrameScores& fs, const std::filesystem::path& path);

}  // namespace srad
