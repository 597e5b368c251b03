#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "srad/core.hpp"
#include "srad/network.hpp"
#include "srad/objective.hpp"

namespace srad {

enum class Ablation {
  kFull,            // regression + clustering loss + pseudo-labels
  kNoClusterLoss,   // pseudo-labels only
  kNoPseudoLabels,  // clustering loss only; anomalous targets all ones
};

struct TrainConfig {
  Hyperparameters hyper;
  Ablation ablation = Ablation::kFull;
  std::size_t checkpoint_every = 0;  // epochs; 0 = final only

  // Epochs at the start of training where anomalous videos use all-ones
  // targets instead of pseudo-labels. With near-uniform initial scores the
  // orientation contest systematically favors the larger (normal) cluster,
  // which locks training into an inverted scorer; a short warm-up gives the
  // scores enough class signal for the contest to resolve correctly.
  // Set to 0 for pseudo-labels from the first epoch.
  std::size_t warmup_epochs = 2;
};

struct TrainRecord {
  std::size_t epoch = 0;
  std::size_t iter = 0;  // global step index
  std::string video_id;
  int label = 0;
  double regression_loss = 0.0;
  double clustering_loss = 0.0;  // NaN when the term was skipped
  double total_loss = 0.0;
  double center_distance = 0.0;
  double sim_as_is = 0.0;     // NaN when no orientation ran
  double sim_inverted = 0.0;  // NaN when no orientation ran
  std::string orientation;    // "as_is", "inverted" or empty
  bool degenerate = false;
};

using TrainHistory = std::vector<TrainRecord>;

// One optimizer step on one whole video: forward (train mode), 2-means on
// the FC-1 representations, pseudo-label routing, loss, backward, Adam.
// Draws come from step_rng's "dropout" and "kmeans" child streams. With
// in_warmup set, anomalous videos take all-ones targets.
TrainRecord train_step(Model& model, AdamState& adam, const VideoRecord& video,
                       const TrainConfig& cfg, const RngHandle& step_rng,
                       bool in_warmup = false);

struct FitResult {
  Model model;
  AdamState adam;
  TrainHistory history;
};

using EpochCallback =
    std::function<void(std::size_t epoch, const Model&, const AdamState&)>;

// Full training run over the dataset; video order reshuffled each epoch.
// Fully determined by (dataset, cfg).
FitResult fit(const Dataset& dataset, const TrainConfig& cfg,
              const EpochCallback& on_epoch = {});

// History CSV: epoch,iter,video_id,label,Lr,Lc,L,d,s1,s2,orientation,degenerate
// Skipped quantities are written as empty fields.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
std::string history_csv_string(const TrainHistory& history);

// Mean clustering loss over one epoch's records that carried the term.
double epoch_mean_clustering_loss(const TrainHistory& history, std::size_t epoch);

}  // namespace srad
