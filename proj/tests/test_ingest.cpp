#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "srad/ingest.hpp"

using namespace srad;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("srad_ingest_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

Matrix sample_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  RngHandle rng(seed);
  Matrix m(r, c);
  for (double& v : m.data) v = rng.next_normal();
  return m;
}

}  // namespace

TEST_CASE("feature round-trip is bit-exact for 64-bit payloads") {
  TempDir tmp;
  Matrix m = sample_matrix(3, 4, 1);
  m(0, 0) = -0.0;
  m(2, 3) = 1e-300;
  write_features(m, tmp.path / "f.srfv");
  const Matrix back = read_features(tmp.path / "f.srfv", 3, 4);
  CHECK(back.data == m.data);
}

TEST_CASE("file sizes follow the format") {
  TempDir tmp;
  Matrix one(1, 1);
  one(0, 0) = 0.0;
  write_features(one, tmp.path / "f32.srfv", FeaturePrecision::f32);
  CHECK(fs::file_size(tmp.path / "f32.srfv") == 20);  // 16 header + 4 payload
  write_features(one, tmp.path / "f64.srfv", FeaturePrecision::f64);
  CHECK(fs::file_size(tmp.path / "f64.srfv") == 24);
}

TEST_CASE("32-bit payloads round-trip float-representable values") {
  TempDir tmp;
  Matrix m(2, 2);
  m.data = {1.5, -2.25, 0.0, 42.0};
  write_features(m, tmp.path / "f.srfv", FeaturePrecision::f32);
  CHECK(read_features(tmp.path / "f.srfv", 2, 2).data == m.data);
}

TEST_CASE("header dimension mismatch is a shape error") {
  TempDir tmp;
  write_features(sample_matrix(3, 4, 2), tmp.path / "f.srfv");
  CHECK_THROWS_AS(read_features(tmp.path / "f.srfv", 3, 5), ShapeError);
  CHECK_THROWS_AS(read_features(tmp.path / "f.srfv", 2, 4), ShapeError);
}

TEST_CASE("truncated payload is rejected") {
  TempDir tmp;
  write_features(sample_matrix(3, 4, 3), tmp.path / "f.srfv");
  const auto size = fs::file_size(tmp.path / "f.srfv");
  fs::resize_file(tmp.path / "f.srfv", size - 8);
  CHECK_THROWS_AS(read_features(tmp.path / "f.srfv", 3, 4), ParseError);
}

TEST_CASE("non-finite payload is rejected on read and write") {
  TempDir tmp;
  Matrix m = sample_matrix(2, 2, 4);
  CHECK_NOTHROW(write_features(m, tmp.path / "ok.srfv"));
  m(0, 1) = INFINITY;
  CHECK_THROWS_AS(write_features(m, tmp.path / "bad.srfv"), ValidationError);

  // Corrupt a valid file into containing an Inf bit pattern.
  write_features(sample_matrix(1, 2, 5), tmp.path / "c.srfv");
  std::fstream f(tmp.path / "c.srfv",
                 std::ios::in | std::ios::out | std::ios::binary);
  const double inf = INFINITY;
  f.seekp(16);
  f.write(reinterpret_cast<const char*>(&inf), 8);
  f.close();
  CHECK_THROWS_AS(read_features(tmp.path / "c.srfv", 1, 2), ValidationError);
}

TEST_CASE("empty matrices cannot be written") {
  TempDir tmp;
  Matrix empty;
  CHECK_THROWS_AS(write_features(empty, tmp.path / "e.srfv"), ShapeError);
}

TEST_CASE("bad magic is a parse error") {
  TempDir tmp;
  std::ofstream f(tmp.path / "junk.srfv", std::ios::binary);
  f << "JUNKJUNKJUNKJUNKJUNK";
  f.close();
  CHECK_THROWS_AS(read_features(tmp.path / "junk.srfv", 1, 1), ParseError);
}

TEST_CASE("missing feature file is an IO error naming the path") {
  TempDir tmp;
  try {
    read_features(tmp.path / "absent.srfv", 1, 1);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("absent.srfv") != std::string::npos);
  }
}

TEST_CASE("manifest round-trip and load") {
  TempDir tmp;
  write_features(sample_matrix(3, 4, 6), tmp.path / "v0.srfv");

  Manifest m;
  m.feature_dim = 4;
  m.frames_per_fragment = 16;
  m.entries.push_back({"v0", 0, 33, "v0.srfv"});  // ceil(33/16) = 3 fragments
  write_manifest(m, tmp.path / "manifest.tsv");

  const Manifest back = read_manifest(tmp.path / "manifest.tsv");
  CHECK(back.feature_dim == 4);
  CHECK(back.frames_per_fragment == 16);
  REQUIRE(back.entries.size() == 1);
  CHECK(back.entries[0].video_id == "v0");

  const Dataset d = load_manifest(tmp.path / "manifest.tsv");
  CHECK(d.videos.size() == 1);
  CHECK(d.videos[0].num_fragments() == 3);
  CHECK(validate_dataset(d).empty());
}

TEST_CASE("fragment count mismatch between manifest and file is a shape error") {
  TempDir tmp;
  write_features(sample_matrix(2, 4, 7), tmp.path / "v0.srfv");
  Manifest m;
  m.feature_dim = 4;
  m.frames_per_fragment = 16;
  m.entries.push_back({"v0", 1, 33, "v0.srfv"});  // expects 3 rows, file has 2
  write_manifest(m, tmp.path / "manifest.tsv");
  CHECK_THROWS_AS(load_manifest(tmp.path / "manifest.tsv"), ShapeError);
}

TEST_CASE("manifest referencing a missing file names the path") {
  TempDir tmp;
  Manifest m;
  m.feature_dim = 4;
  m.frames_per_fragment = 16;
  m.entries.push_back({"v0", 0, 16, "nowhere.srfv"});
  write_manifest(m, tmp.path / "manifest.tsv");
  try {
    load_manifest(tmp.path / "manifest.tsv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nowhere.srfv") != std::string::npos);
  }
}

TEST_CASE("malformed manifests are parse errors") {
  TempDir tmp;
  auto write_text = [&](const std::string& text) {
    std::ofstream f(tmp.path / "m.tsv", std::ios::trunc);
    f << text;
  };
  write_text("not a header\n");
  CHECK_THROWS_AS(read_manifest(tmp.path / "m.tsv"), ParseError);
  write_text("#srad-manifest v1 dim=4 k=16\nv0 0 16 f.srfv\n");  // spaces, not tabs
  CHECK_THROWS_AS(read_manifest(tmp.path / "m.tsv"), ParseError);
  write_text("#srad-manifest v1 dim=4 k=16\nv0\t2\t16\tf.srfv\n");  // label 2
  CHECK_THROWS_AS(read_manifest(tmp.path / "m.tsv"), ParseError);
  write_text("#srad-manifest v1 dim=4 k=16\n");  // no entries
  CHECK_THROWS_AS(read_manifest(tmp.path / "m.tsv"), ParseError);
}

TEST_CASE("l2 normalization option normalizes fragment rows") {
  TempDir tmp;
  Matrix m(2, 3);
  m.data = {3, 0, 4, 0, 0, 0};  // second row stays zero
  write_features(m, tmp.path / "v0.srfv");
  Manifest man;
  man.feature_dim = 3;
  man.frames_per_fragment = 1;
  man.entries.push_back({"v0", 0, 2, "v0.srfv"});
  write_manifest(man, tmp.path / "manifest.tsv");

  const Dataset d = load_manifest(tmp.path / "manifest.tsv", {.l2_normalize = true});
  CHECK(d.videos[0].features(0, 0) == doctest::Approx(0.6));
  CHECK(d.videos[0].features(0, 2) == doctest::Approx(0.8));
  CHECK(d.videos[0].features(1, 0) == 0.0);
}

TEST_CASE("synthetic generation is a pure function of the config") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 3;
  cfg.num_anomalous_videos = 2;
  cfg.num_test_normal_videos = 1;
  cfg.num_test_anomalous_videos = 1;
  cfg.fragments_min = 4;
  cfg.fragments_max = 8;
  cfg.feature_dim = 5;
  cfg.seed = 99;

  const SyntheticData a = generate_synthetic(cfg);
  const SyntheticData b = generate_synthetic(cfg);
  REQUIRE(a.train.videos.size() == b.train.videos.size());
  for (std::size_t i = 0; i < a.train.videos.size(); ++i)
    CHECK(a.train.videos[i].features.data == b.train.videos[i].features.data);
  CHECK(a.fragment_truth == b.fragment_truth);

  cfg.seed = 100;
  const SyntheticData c = generate_synthetic(cfg);
  CHECK(a.train.videos[0].features.data != c.train.videos[0].features.data);
}

TEST_CASE("fixed anomaly portion yields exactly round(portion*m) fragments") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 1;
  cfg.num_anomalous_videos = 4;
  cfg.num_test_normal_videos = 1;
  cfg.num_test_anomalous_videos = 1;
  cfg.fragments_min = 10;
  cfg.fragments_max = 10;
  cfg.anomaly_portion_min = 0.3;
  cfg.anomaly_portion_max = 0.3;
  cfg.seed = 1;

  const SyntheticData d = generate_synthetic(cfg);
  for (const auto& v : d.train.videos) {
    const auto& truth = d.fragment_truth.at(v.video_id);
    int count = 0;
    for (int t : truth) count += t;
    if (v.video_label == 0) {
      CHECK(count == 0);
    } else {
      CHECK(count == 3);
      // Contiguity: first and last anomalous fragment span exactly `count`.
      int first = -1, last = -1;
      for (std::size_t j = 0; j < truth.size(); ++j)
        if (truth[j]) {
          if (first < 0) first = int(j);
          last = int(j);
        }
      CHECK(last - first + 1 == count);
    }
  }
}

TEST_CASE("no anomalous videos means all-zero ground truth") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 3;
  cfg.num_anomalous_videos = 0;
  cfg.num_test_normal_videos = 2;
  cfg.num_test_anomalous_videos = 0;
  cfg.fragments_min = 2;
  cfg.fragments_max = 4;
  cfg.seed = 2;
  const SyntheticData d = generate_synthetic(cfg);
  for (const auto& [id, truth] : d.fragment_truth)
    for (int t : truth) CHECK(t == 0);
}

TEST_CASE("anomalous videos keep a normal fragment when the run is partial") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 0;
  cfg.num_anomalous_videos = 12;
  cfg.num_test_normal_videos = 1;
  cfg.num_test_anomalous_videos = 1;
  cfg.fragments_min = 5;
  cfg.fragments_max = 9;
  cfg.anomaly_portion_min = 0.25;
  cfg.anomaly_portion_max = 0.45;
  cfg.seed = 3;
  const SyntheticData d = generate_synthetic(cfg);
  for (const auto& v : d.train.videos) {
    const auto& truth = d.fragment_truth.at(v.video_id);
    int count = 0;
    for (int t : truth) count += t;
    if (count > 0 && count < int(truth.size())) {
      CHECK(count >= 1);
      CHECK(count < int(truth.size()));
    }
  }
}

TEST_CASE("synthetic datasets validate and carry consistent frame counts") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 2;
  cfg.num_anomalous_videos = 2;
  cfg.num_test_normal_videos = 1;
  cfg.num_test_anomalous_videos = 1;
  cfg.fragments_min = 3;
  cfg.fragments_max = 6;
  cfg.frames_per_fragment = 16;
  cfg.seed = 4;
  const SyntheticData d = generate_synthetic(cfg);
  CHECK(validate_dataset(d.train).empty());
  CHECK(validate_dataset(d.test).empty());
  for (const auto& v : d.train.videos)
    CHECK(ceil_div(v.num_frames, 16) == v.num_fragments());
}

TEST_CASE("invalid synthetic configs are rejected") {
  SyntheticConfig cfg;
  cfg.num_normal_videos = 0;
  cfg.num_anomalous_videos = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);

  cfg = {};
  cfg.fragments_min = 1;  // anomalous videos need >= 2
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);

  cfg = {};
  cfg.anomaly_portion_min = 0.6;
  cfg.anomaly_portion_max = 0.4;
  CHECK_THROWS_AS(generate_synthetic(cfg), ValidationError);
}
