// srad: weakly supervised video-anomaly-detection trainer.
//
// Subcommands: synth, train, eval, score.
// Exit codes: 0 success, 1 usage, 2 data validation, 3 IO.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "srad/eval.hpp"
#include "srad/ingest.hpp"
#include "srad/kernels.hpp"
#include "srad/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_run_record(const fs::path& dir, const std::string& command,
                      const json& flags) {
  json record;
  record["command"] = command;
  record["flags"] = flags;
  std::ofstream out(dir / "run.json", std::ios::trunc | std::ios::binary);
  if (!out) throw srad::IoError("cannot write run.json in " + dir.string());
  out << record.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthFlags {
  std::string out;
  std::uint64_t seed = 7;
  std::size_t normal_videos = 40;
  std::size_t anomalous_videos = 40;
  std::size_t test_normal = 10;
  std::size_t test_anomalous = 10;
  std::size_t dim = 16;
  std::size_t k = 16;
  std::size_t fragments_min = 8;
  std::size_t fragments_max = 16;
  double portion_min = 0.2;
  double portion_max = 0.4;
  double stddev = 1.0;
  double mean_separation = 2.0;
};

void write_split(const srad::Dataset& split, const srad::SyntheticData& data,
                 const fs::path& dir) {
  fs::create_directories(dir / "features");
  srad::Manifest manifest;
  manifest.feature_dim = split.feature_dim;
  manifest.frames_per_fragment = split.frames_per_fragment;

  for (const srad::VideoRecord& v : split.videos) {
    const std::string rel = "features/" + v.video_id + ".srfv";
    srad::write_features(v.features, dir / rel);
    manifest.entries.push_back({v.video_id, v.video_label, v.num_frames, rel});
  }
  srad::write_manifest(manifest, dir / "manifest.tsv");

  const srad::FrameTruth truth =
      srad::fragment_truth_to_frames(data.fragment_truth, split);
  srad::save_ground_truth(truth, split, dir / "ground_truth.tsv");
}

int cmd_synth(const SynthFlags& f) {
  if (f.normal_videos + f.anomalous_videos < 1)
    throw srad::UsageError("need at least one training video");
  if (f.test_normal + f.test_anomalous < 1)
    throw srad::UsageError("need at least one test video");
  if (f.fragments_min < 1 || f.fragments_min > f.fragments_max)
    throw srad::UsageError("fragment range must satisfy 1 <= min <= max");
  if ((f.anomalous_videos > 0 || f.test_anomalous > 0) && f.fragments_min < 2)
    throw srad::UsageError("anomalous videos need at least 2 fragments");
  if (!(f.portion_min > 0.0 && f.portion_max < 1.0 && f.portion_min <= f.portion_max))
    throw srad::UsageError("anomaly portion range must satisfy 0 < min <= max < 1");
  if (f.stddev <= 0.0) throw srad::UsageError("stddev must be positive");

  srad::SyntheticConfig cfg;
  cfg.num_normal_videos = f.normal_videos;
  cfg.num_anomalous_videos = f.anomalous_videos;
  cfg.num_test_normal_videos = f.test_normal;
  cfg.num_test_anomalous_videos = f.test_anomalous;
  cfg.fragments_min = f.fragments_min;
  cfg.fragments_max = f.fragments_max;
  cfg.feature_dim = f.dim;
  cfg.frames_per_fragment = f.k;
  cfg.mean_separation = f.mean_separation;
  cfg.feature_stddev = f.stddev;
  cfg.anomaly_portion_min = f.portion_min;
  cfg.anomaly_portion_max = f.portion_max;
  cfg.seed = f.seed;

  const srad::SyntheticData data = srad::generate_synthetic(cfg);

  const fs::path out(f.out);
  fs::create_directories(out);
  write_split(data.train, data, out / "train");
  write_split(data.test, data, out / "test");

  write_run_record(out, "synth",
                   {{"out", f.out},
                    {"seed", f.seed},
                    {"normal_videos", f.normal_videos},
                    {"anomalous_videos", f.anomalous_videos},
                    {"test_normal", f.test_normal},
                    {"test_anomalous", f.test_anomalous},
                    {"dim", f.dim},
                    {"k", f.k},
                    {"fragments_min", f.fragments_min},
                    {"fragments_max", f.fragments_max},
                    {"anomaly_portion_min", f.portion_min},
                    {"anomaly_portion_max", f.portion_max},
                    {"stddev", f.stddev},
                    {"mean_separation", f.mean_separation}});

  std::printf("wrote %zu train + %zu test videos to %s\n", data.train.videos.size(),
              data.test.videos.size(), f.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags {
  std::string manifest;
  std::string out;
  double lr = 5e-5;
  double lambda = 0.05;
  double alpha = 1.0;
  std::size_t h1 = 512;
  double dropout = 0.6;
  std::size_t epochs = 100;
  std::size_t warmup = 2;
  std::uint64_t seed = 0;
  std::string ablation = "full";
  int restarts = 10;
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;
  double d_floor = 1e-3;
  std::size_t checkpoint_every = 0;
  bool normalize = false;
  bool serial = false;
};

srad::Ablation parse_ablation(const std::string& s) {
  if (s == "full") return srad::Ablation::kFull;
  if (s == "no-lc") return srad::Ablation::kNoClusterLoss;
  if (s == "no-yp") return srad::Ablation::kNoPseudoLabels;
  throw srad::UsageError("unknown ablation '" + s + "' (full, no-lc, no-yp)");
}

json train_flags_json(const TrainFlags& f) {
  return {{"manifest", f.manifest},
          {"out", f.out},
          {"lr", f.lr},
          {"lambda", f.lambda},
          {"alpha", f.alpha},
          {"h1", f.h1},
          {"dropout", f.dropout},
          {"epochs", f.epochs},
          {"warmup", f.warmup},
          {"seed", f.seed},
          {"ablation", f.ablation},
          {"restarts", f.restarts},
          {"kmeans_max_iters", f.kmeans_max_iters},
          {"kmeans_tol", f.kmeans_tol},
          {"d_floor", f.d_floor},
          {"checkpoint_every", f.checkpoint_every},
          {"normalize", f.normalize},
          {"serial", f.serial}};
}

int cmd_train(const TrainFlags& f) {
  if (f.lr <= 0.0) throw srad::UsageError("learning rate must be positive");
  if (f.lambda < 0.0) throw srad::UsageError("lambda must be nonnegative");
  if (f.alpha <= 0.0) throw srad::UsageError("alpha must be positive");
  if (f.d_floor <= 0.0) throw srad::UsageError("d-floor must be positive");
  if (f.dropout < 0.0 || f.dropout >= 1.0)
    throw srad::UsageError("dropout must be in [0, 1)");
  if (f.h1 < 1) throw srad::UsageError("h1 must be >= 1");
  if (f.restarts < 1) throw srad::UsageError("restarts must be >= 1");

  srad::TrainConfig cfg;
  cfg.hyper.learning_rate = f.lr;
  cfg.hyper.lambda = f.lambda;
  cfg.hyper.alpha = f.alpha;
  cfg.hyper.d_floor = f.d_floor;
  cfg.hyper.dropout_rate = f.dropout;
  cfg.hyper.hidden_width = f.h1;
  cfg.hyper.epochs = f.epochs;
  cfg.hyper.seed = f.seed;
  cfg.warmup_epochs = f.warmup;
  cfg.hyper.kmeans = {f.restarts, f.kmeans_max_iters, f.kmeans_tol};
  cfg.ablation = parse_ablation(f.ablation);
  cfg.checkpoint_every = f.checkpoint_every;

  if (f.serial) srad::kernels::set_parallel(false);

  const srad::Dataset data =
      srad::load_manifest(f.manifest, {.l2_normalize = f.normalize});

  const fs::path out(f.out);
  fs::create_directories(out);

  srad::EpochCallback on_epoch;
  if (cfg.checkpoint_every > 0) {
    on_epoch = [&](std::size_t epoch, const srad::Model& m, const srad::AdamState& a) {
      if ((epoch + 1) % cfg.checkpoint_every != 0) return;
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_epoch%04zu.srck", epoch + 1);
      srad::save_checkpoint(out / name, m, a);
    };
  }

  const srad::FitResult result = srad::fit(data, cfg, on_epoch);
  srad::save_checkpoint(out / "checkpoint.srck", result.model, result.adam);
  srad::write_history_csv(result.history, out / "history.csv");
  write_run_record(out, "train", train_flags_json(f));

  std::printf("trained %zu epochs over %zu videos; checkpoint and history in %s\n",
              f.epochs, data.videos.size(), f.out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalFlags {
  std::string manifest;
  std::string checkpoint;
  std::string ground_truth;  // defaults next to the manifest
  std::string out;           // optional: timeline CSVs + run.json
  bool normalize = false;
  bool serial = false;
};

int cmd_eval(const EvalFlags& f) {
  if (f.serial) srad::kernels::set_parallel(false);

  const srad::Dataset data =
      srad::load_manifest(f.manifest, {.l2_normalize = f.normalize});
  const srad::Checkpoint ckpt = srad::load_checkpoint(f.checkpoint);

  fs::path truth_path(f.ground_truth);
  if (truth_path.empty())
    truth_path = fs::path(f.manifest).parent_path() / "ground_truth.tsv";
  const srad::FrameTruth truth = srad::load_ground_truth(truth_path, data);

  const srad::EvalResult result = srad::evaluate(ckpt.model, data, truth);

  if (!f.out.empty()) {
    const fs::path out(f.out);
    fs::create_directories(out);
    for (const srad::FrameScores& fscore : result.per_video)
      srad::write_timeline_csv(fscore, out / (fscore.video_id + ".csv"));
    write_run_record(out, "eval",
                     {{"manifest", f.manifest},
                      {"checkpoint", f.checkpoint},
                      {"ground_truth", truth_path.string()},
                      {"out", f.out},
                      {"normalize", f.normalize},
                      {"serial", f.serial}});
  }

  std::printf("AUC=%.4f\n", result.auc);
  return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreFlags {
  std::string manifest;
  std::string checkpoint;
  std::string video_id;
  std::string out;
  std::string ground_truth;  // optional
  bool normalize = false;
};

int cmd_score(const ScoreFlags& f) {
  const srad::Dataset data =
      srad::load_manifest(f.manifest, {.l2_normalize = f.normalize});
  const srad::Checkpoint ckpt = srad::load_checkpoint(f.checkpoint);

  const srad::VideoRecord* video = nullptr;
  for (const srad::VideoRecord& v : data.videos)
    if (v.video_id == f.video_id) video = &v;
  if (video == nullptr)
    throw srad::ValidationError("video '" + f.video_id + "' is not in the manifest");

  const srad::ForwardCache cache = srad::forward_infer(ckpt.model, video->features);
  srad::FrameScores fscore;
  fscore.video_id = video->video_id;
  fscore.scores = srad::expand_to_frames(cache.scores, data.frames_per_fragment,
                                         video->num_frames);
  if (!f.ground_truth.empty()) {
    const srad::FrameTruth truth = srad::load_ground_truth(f.ground_truth, data);
    fscore.ground_truth = truth.at(video->video_id);
  }
  srad::write_timeline_csv(fscore, f.out);
  std::printf("wrote %zu frame scores for %s to %s\n", fscore.scores.size(),
              f.video_id.c_str(), f.out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised video anomaly detection via self-reasoning"};
  app.require_subcommand(1);

  SynthFlags synth;
  std::size_t fragments_fixed = 0;
  double portion_fixed = -1.0;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic train/test dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "RNG seed")->capture_default_str();
  synth_cmd->add_option("--normal-videos", synth.normal_videos,
                        "Normal training videos")->capture_default_str();
  synth_cmd->add_option("--anomalous-videos", synth.anomalous_videos,
                        "Anomalous training videos")->capture_default_str();
  synth_cmd->add_option("--test-normal", synth.test_normal, "Normal test videos")->capture_default_str();
  synth_cmd->add_option("--test-anomalous", synth.test_anomalous,
                        "Anomalous test videos")->capture_default_str();
  synth_cmd->add_option("--dim", synth.dim, "Feature dimension")->capture_default_str();
  synth_cmd->add_option("--k", synth.k, "Frames per fragment")->capture_default_str();
  synth_cmd->add_option("--fragments-min", synth.fragments_min,
                        "Minimum fragments per video")->capture_default_str();
  synth_cmd->add_option("--fragments-max", synth.fragments_max,
                        "Maximum fragments per video")->capture_default_str();
  synth_cmd->add_option("--fragments", fragments_fixed,
                        "Fixed fragments per video (overrides min/max)");
  synth_cmd->add_option("--anomaly-portion-min", synth.portion_min,
                        "Minimum anomalous portion")->capture_default_str();
  synth_cmd->add_option("--anomaly-portion-max", synth.portion_max,
                        "Maximum anomalous portion")->capture_default_str();
  synth_cmd->add_option("--anomaly-portion", portion_fixed,
                        "Fixed anomalous portion (overrides min/max)");
  synth_cmd->add_option("--stddev", synth.stddev, "Feature noise stddev")->capture_default_str();
  synth_cmd->add_option("--mean-separation", synth.mean_separation,
                        "Anomalous mean offset per coordinate, in stddev units")->capture_default_str();

  TrainFlags train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a scorer on a manifest");
  train_cmd->add_option("--manifest", train.manifest, "Train manifest path")
      ->required();
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--lr", train.lr, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--lambda", train.lambda, "Clustering-loss weight")->capture_default_str();
  train_cmd->add_option("--alpha", train.alpha, "Normal-video distance cap")->capture_default_str();
  train_cmd->add_option("--h1", train.h1, "Hidden width (assumed default)")->capture_default_str();
  train_cmd->add_option("--dropout", train.dropout, "Dropout rate (assumed default)")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--warmup", train.warmup,
                        "Epochs of all-ones anomalous targets before "
                        "pseudo-labeling starts")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
  train_cmd
      ->add_option("--ablation", train.ablation, "full, no-lc or no-yp")
      ->capture_default_str()
      ->check(CLI::IsMember({"full", "no-lc", "no-yp"}));
  train_cmd->add_option("--restarts", train.restarts, "k-means restarts")->capture_default_str();
  train_cmd->add_option("--kmeans-max-iters", train.kmeans_max_iters,
                        "k-means iteration cap")->capture_default_str();
  train_cmd->add_option("--kmeans-tol", train.kmeans_tol,
                        "k-means movement tolerance")->capture_default_str();
  train_cmd->add_option("--d-floor", train.d_floor,
                        "Distance clamp for the inverse loss")->capture_default_str();
  train_cmd->add_option("--checkpoint-every", train.checkpoint_every,
                        "Checkpoint cadence in epochs (0 = final only)")->capture_default_str();
  train_cmd->add_flag("--normalize", train.normalize,
                      "L2-normalize fragments at ingest");
  train_cmd->add_flag("--serial", train.serial, "Disable OpenMP kernels");

  EvalFlags eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Evaluate a checkpoint: frame-level AUC");
  eval_cmd->add_option("--manifest", eval.manifest, "Test manifest path")->required();
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Checkpoint path")
      ->required();
  eval_cmd->add_option("--ground-truth", eval.ground_truth,
                       "Interval file (default: ground_truth.tsv next to manifest)");
  eval_cmd->add_option("--out", eval.out, "Directory for per-video timeline CSVs");
  eval_cmd->add_flag("--normalize", eval.normalize,
                     "L2-normalize fragments at ingest");
  eval_cmd->add_flag("--serial", eval.serial, "Disable OpenMP kernels");

  ScoreFlags score;
  CLI::App* score_cmd =
      app.add_subcommand("score", "Write one video's frame-score timeline");
  score_cmd->add_option("--manifest", score.manifest, "Manifest path")->required();
  score_cmd->add_option("--checkpoint", score.checkpoint, "Checkpoint path")
      ->required();
  score_cmd->add_option("--video-id", score.video_id, "Video to score")->required();
  score_cmd->add_option("--out", score.out, "Output CSV path")->required();
  score_cmd->add_option("--ground-truth", score.ground_truth,
                        "Optional interval file for the truth column");
  score_cmd->add_flag("--normalize", score.normalize,
                      "L2-normalize fragments at ingest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) {
      if (synth_cmd->count("--fragments") > 0) {
        synth.fragments_min = fragments_fixed;
        synth.fragments_max = fragments_fixed;
      }
      if (synth_cmd->count("--anomaly-portion") > 0) {
        synth.portion_min = portion_fixed;
        synth.portion_max = portion_fixed;
      }
      return cmd_synth(synth);
    }
    if (train_cmd->parsed()) return cmd_train(train);
    if (eval_cmd->parsed()) return cmd_eval(eval);
    if (score_cmd->parsed()) return cmd_score(score);
  } catch (const srad::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const srad::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const srad::Error& e) {
    // parse, shape and validation problems are all data errors here
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
