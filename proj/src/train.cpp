#include "srad/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>

#include "srad/clustering.hpp"
#include "srad/selfreason.hpp"

namespace srad {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TrainRecord train_step(Model& model, AdamState& adam, const VideoRecord& video,
                       const TrainConfig& cfg, const RngHandle& step_rng,
                       bool in_warmup) {
  const std::size_t m = video.num_fragments();
  RngHandle dropout_rng = step_rng.child("dropout", 0);
  const RngHandle kmeans_rng = step_rng.child("kmeans", 0);

  TrainRecord rec;
  rec.video_id = video.video_id;
  rec.label = video.video_label;
  rec.clustering_loss = kNan;
  rec.sim_as_is = kNan;
  rec.sim_inverted = kNan;

  // (1) forward in train mode; hidden_raw is the clustering space.
  ForwardCache cache = forward_train(model, video.features, dropout_rng);

  // (2) binary clustering of the FC-1 representations.
  const ClusterResult clusters =
      m == 1 ? cluster_degenerate(cache.hidden_raw)
             : kmeans2(cache.hidden_raw, kmeans_rng, cfg.hyper.kmeans);
  rec.center_distance = clusters.center_distance;
  rec.degenerate = clusters.degenerate;

  // (3) fragment targets. Degenerate and warm-up anomalous videos fall
  // back to all-ones targets, same as the no-pseudo-label ablation.
  std::optional<PseudoDecision> pseudo;
  const bool use_pseudo =
      cfg.ablation != Ablation::kNoPseudoLabels && !in_warmup;
  if (video.video_label == 1 && use_pseudo && !clusters.degenerate) {
    pseudo = orient_pseudo_labels(cache.scores, clusters.labels);
    rec.sim_as_is = pseudo->sim_as_is;
    rec.sim_inverted = pseudo->sim_inverted;
    rec.orientation =
        pseudo->orientation == Orientation::kAsIs ? "as_is" : "inverted";
  }
  const TrainingTargets targets = training_targets(
      video.video_label, m, pseudo, use_pseudo && !clusters.degenerate);

  // (4) losses.
  const RegressionLoss reg = regression_loss(targets.y, cache.scores);
  LossBreakdown loss;
  loss.regression = reg.value;
  loss.total = reg.value;

  const bool cluster_term =
      cfg.ablation != Ablation::kNoClusterLoss && !clusters.degenerate;
  ClusteringLoss cl;
  if (cluster_term) {
    cl = clustering_loss(clusters.center_distance, video.video_label,
                         cfg.hyper.alpha, cfg.hyper.d_floor);
    loss.clustering = cl.value;
    loss.d_used = cl.d_used;
    loss.total = total_loss(reg.value, cl.value, cfg.hyper.lambda);
    rec.clustering_loss = loss.clustering;
  }
  rec.regression_loss = loss.regression;
  rec.total_loss = loss.total;

  // (5)-(6) backward through both heads.
  Matrix d_hidden_raw;
  const Matrix* d_hidden_ptr = nullptr;
  if (cluster_term && cfg.hyper.lambda != 0.0 && cl.d_distance != 0.0) {
    d_hidden_raw = center_distance_gradient(cache.hidden_raw, clusters);
    const double scale = cfg.hyper.lambda * cl.d_distance;
    for (double& v : d_hidden_raw.data) v *= scale;
    d_hidden_ptr = &d_hidden_raw;
  }
  const Gradients grads = backward(model, cache, reg.d_scores, d_hidden_ptr);

  // (7) optimizer update.
  adam_step(model, grads, adam);
  return rec;
}

FitResult fit(const Dataset& dataset, const TrainConfig& cfg,
              const EpochCallback& on_epoch) {
  require_valid(dataset);

  const RngHandle root(cfg.hyper.seed);
  FitResult out;
  out.model = init_model(dataset.feature_dim, cfg.hyper.hidden_width,
                         cfg.hyper.dropout_rate, root.child("init", 0));
  out.adam = init_adam(out.model, cfg.hyper.learning_rate);

  std::vector<std::size_t> order(dataset.videos.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t iter = 0;
  for (std::size_t epoch = 0; epoch < cfg.hyper.epochs; ++epoch) {
    RngHandle shuffle_rng = root.child("shuffle", epoch);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, shuffle_rng);

    for (std::size_t idx : order) {
      TrainRecord rec = train_step(out.model, out.adam, dataset.videos[idx], cfg,
                                   root.child("step", iter),
                                   epoch < cfg.warmup_epochs);
      rec.epoch = epoch;
      rec.iter = iter;
      out.history.push_back(std::move(rec));
      ++iter;
    }
    if (on_epoch) on_epoch(epoch, out.model, out.adam);
  }
  return out;
}

namespace {

void append_field(std::string& s, double v) {
  if (std::isnan(v)) return;  // skipped quantity -> empty field
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  s += buf;
}

}  // namespace

std::string history_csv_string(const TrainHistory& history) {
  std::string s = "epoch,iter,video_id,label,Lr,Lc,L,d,s1,s2,orientation,degenerate\n";
  for (const TrainRecord& r : history) {
    s += std::to_string(r.epoch);
    s += ',';
    s += std::to_string(r.iter);
    s += ',';
    s += r.video_id;
    s += ',';
    s += std::to_string(r.label);
    s += ',';
    append_field(s, r.regression_loss);
    s += ',';
    append_field(s, r.clustering_loss);
    s += ',';
    append_field(s, r.total_loss);
    s += ',';
    append_field(s, r.center_distance);
    s += ',';
    append_field(s, r.sim_as_is);
    s += ',';
    append_field(s, r.sim_inverted);
    s += ',';
    s += r.orientation;
    s += ',';
    s += r.degenerate ? '1' : '0';
    s += '\n';
  }
  return s;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const std::string s = history_csv_string(history);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

double epoch_mean_clustering_loss(const TrainHistory& history, std::size_t epoch) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TrainRecord& r : history) {
    if (r.epoch != epoch || std::isnan(r.clustering_loss)) continue;
    sum += r.clustering_loss;
    ++n;
  }
  if (n == 0) throw ValidationError("epoch has no clustering-loss records");
  return sum / static_cast<double>(n);
}

}  // namespace srad
