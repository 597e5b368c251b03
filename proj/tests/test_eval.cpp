#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "srad/eval.hpp"
#include "srad/ingest.hpp"

using namespace srad;
namespace fs = std::filesystem;

TEST_CASE("frames inherit their fragment's score") {
  const std::vector<double> frag{0.2, 0.9};
  const auto frames = expand_to_frames(frag, 16, 20);
  REQUIRE(frames.size() == 20);
  for (std::size_t i = 0; i < 16; ++i) CHECK(frames[i] == 0.2);
  for (std::size_t i = 16; i < 20; ++i) CHECK(frames[i] == 0.9);
}

TEST_CASE("k = 1 expansion is the identity") {
  const std::vector<double> frag{0.1, 0.5, 0.9};
  CHECK(expand_to_frames(frag, 1, 3) == frag);
}

TEST_CASE("a single fragment covers every frame") {
  const std::vector<double> frag{0.7};
  const auto frames = expand_to_frames(frag, 16, 16);
  REQUIRE(frames.size() == 16);
  for (double f : frames) CHECK(f == 0.7);
}

TEST_CASE("fragment-count mismatch is a shape error") {
  const std::vector<double> frag{0.2, 0.9};
  CHECK_THROWS_AS(expand_to_frames(frag, 16, 50), ShapeError);
}

TEST_CASE("perfect separation scores AUC 1") {
  const std::vector<double> s{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> l{1, 1, 0, 0};
  CHECK(roc_auc(s, l) == 1.0);
}

TEST_CASE("constant scores give AUC one half") {
  const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> l{1, 0, 1, 0};
  CHECK(roc_auc(s, l) == 0.5);
}

TEST_CASE("degenerate labels are rejected") {
  const std::vector<double> s{0.1, 0.2};
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{1, 1}), ValidationError);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{0, 0}), ValidationError);
  CHECK_THROWS_AS(roc_auc(s, std::vector<int>{0, 2}), ValidationError);
}

TEST_CASE("sorting AUC equals the pairwise oracle, ties included") {
  RngHandle rng(23);
  for (int inst = 0; inst < 20; ++inst) {
    RngHandle r = rng.child("inst", inst);
    const std::size_t n = 20 + r.next_below(180);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid forces plenty of ties.
      scores[i] = double(r.next_below(12)) / 11.0;
      labels[i] = int(r.next_below(2));
      (labels[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[n - 1] = 0;
    const double fast = roc_auc(scores, labels);
    const double slow = oracle::pairwise_auc(scores, labels);
    CHECK(std::fabs(fast - slow) < 1e-12);
  }
}

TEST_CASE("AUC is invariant under strictly increasing transforms") {
  RngHandle rng(24);
  std::vector<double> scores(60);
  std::vector<int> labels(60);
  for (std::size_t i = 0; i < 60; ++i) {
    scores[i] = rng.next_unit();
    labels[i] = int(rng.next_below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  const double base = roc_auc(scores, labels);

  std::vector<double> exp_scores(scores), affine(scores);
  for (double& v : exp_scores) v = std::exp(v);
  for (double& v : affine) v = 2.0 * v + 1.0;
  CHECK(roc_auc(exp_scores, labels) == doctest::Approx(base).epsilon(1e-15));
  CHECK(roc_auc(affine, labels) == doctest::Approx(base).epsilon(1e-15));
}

TEST_CASE("negated scores complement the AUC when there are no ties") {
  RngHandle rng(25);
  std::vector<double> scores(50);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < 50; ++i) {
    scores[i] = rng.next_unit();  // continuous draws, ties essentially never
    labels[i] = int(rng.next_below(2));
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> neg(scores);
  for (double& v : neg) v = -v;
  CHECK(roc_auc(neg, labels) == doctest::Approx(1.0 - roc_auc(scores, labels)));
}

namespace {

Model zero_model(std::size_t d, std::size_t h) {
  Model m;
  m.w1 = Matrix(d, h);
  m.b1.assign(h, 0.0);
  m.w2.assign(h, 0.0);
  return m;
}

SyntheticData small_synth(std::uint64_t seed) {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 2;
  cfg.num_anomalous_videos = 2;
  cfg.num_test_normal_videos = 2;
  cfg.num_test_anomalous_videos = 2;
  cfg.fragments_min = 3;
  cfg.fragments_max = 5;
  cfg.feature_dim = 4;
  cfg.frames_per_fragment = 8;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

}  // namespace

TEST_CASE("an untrained all-zero model evaluates to AUC one half") {
  const SyntheticData data = small_synth(31);
  const FrameTruth truth = fragment_truth_to_frames(data.fragment_truth, data.test);
  const Model m = zero_model(4, 6);
  const EvalResult r = evaluate(m, data.test, truth);
  CHECK(r.auc == 0.5);
  CHECK(r.per_video.size() == data.test.videos.size());
  for (const FrameScores& fs : r.per_video)
    for (double s : fs.scores) CHECK(s == 0.5);
}

TEST_CASE("evaluation is deterministic and preserves frame counts") {
  const SyntheticData data = small_synth(32);
  const FrameTruth truth = fragment_truth_to_frames(data.fragment_truth, data.test);
  RngHandle rng(1);
  const Model m = init_model(4, 6, 0.0, rng);
  const EvalResult a = evaluate(m, data.test, truth);
  const EvalResult b = evaluate(m, data.test, truth);
  CHECK(a.auc == b.auc);
  for (std::size_t i = 0; i < a.per_video.size(); ++i) {
    CHECK(a.per_video[i].scores == b.per_video[i].scores);
    CHECK(a.per_video[i].scores.size() ==
          data.test.videos[i].num_frames);
  }
}

TEST_CASE("missing ground truth is an error") {
  const SyntheticData data = small_synth(33);
  FrameTruth truth = fragment_truth_to_frames(data.fragment_truth, data.test);
  truth.erase(truth.begin()->first);
  const Model m = zero_model(4, 6);
  CHECK_THROWS_AS(evaluate(m, data.test, truth), ValidationError);
}

TEST_CASE("all-normal test sets cannot be scored") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 2;
  cfg.num_anomalous_videos = 0;
  cfg.num_test_normal_videos = 2;
  cfg.num_test_anomalous_videos = 0;
  cfg.fragments_min = 3;
  cfg.fragments_max = 4;
  cfg.feature_dim = 4;
  cfg.seed = 34;
  const SyntheticData data = generate_synthetic(cfg);
  const FrameTruth truth = fragment_truth_to_frames(data.fragment_truth, data.test);
  const Model m = zero_model(4, 6);
  CHECK_THROWS_AS(evaluate(m, data.test, truth), ValidationError);
}

TEST_CASE("ground-truth interval files round-trip through frames") {
  const SyntheticData data = small_synth(35);
  const FrameTruth truth = fragment_truth_to_frames(data.fragment_truth, data.test);

  const fs::path path = fs::temp_directory_path() /
                        ("srad_gt_" + std::to_string(::getpid()) + ".tsv");
  save_ground_truth(truth, data.test, path);
  const FrameTruth back = load_ground_truth(path, data.test);
  fs::remove(path);
  CHECK(back == truth);
}

TEST_CASE("ground-truth files reject unknown videos and bad intervals") {
  const SyntheticData data = small_synth(36);
  const fs::path path = fs::temp_directory_path() /
                        ("srad_gt_bad_" + std::to_string(::getpid()) + ".tsv");
  {
    std::ofstream f(path);
    f << "ghost\t0\t5\n";
  }
  CHECK_THROWS_AS(load_ground_truth(path, data.test), ValidationError);
  {
    std::ofstream f(path, std::ios::trunc);
    f << data.test.videos[0].video_id << "\t5\t2\n";
  }
  CHECK_THROWS_AS(load_ground_truth(path, data.test), ValidationError);
  fs::remove(path);
}

TEST_CASE("timeline csv lists every frame") {
  FrameScores fs_rec;
  fs_rec.video_id = "v";
  fs_rec.scores = {0.25, 0.5};
  fs_rec.ground_truth = std::vector<int>{0, 1};
  const fs::path path = fs::temp_directory_path() /
                        ("srad_tl_" + std::to_string(::getpid()) + ".csv");
  write_timeline_csv(fs_rec, path);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  fs::remove(path);
  CHECK(all == "frame_index,score,ground_truth\n0,0.25,0\n1,0.5,1\n");
}
