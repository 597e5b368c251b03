#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srad/core.hpp"

namespace srad {

// Feature files: 16-byte header, little-endian throughout.
//   magic "SRFV" | version u16 = 1 | flags u16 (bit0: 64-bit values)
//   rows u32 | cols u32 | payload rows*cols IEEE-754 values, row-major.
enum class FeaturePrecision { f32, f64 };

void write_features(const Matrix& m, const std::filesystem::path& path,
                    FeaturePrecision precision = FeaturePrecision::f64);
Matrix read_features(const std::filesystem::path& path, std::size_t expected_rows,
                     std::size_t expected_cols);

struct ManifestEntry {
  std::string video_id;
  int video_label = 0;
  std::size_t num_frames = 0;
  std::string feature_path;  // relative to the manifest's directory
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::size_t feature_dim = 0;
  std::size_t frames_per_fragment = 0;
};

struct LoadOptions {
  bool l2_normalize = false;  // per-fragment L2 normalization at ingest
};

// Manifest text format, one entry per line:
//   #srad-manifest v1 dim=<D> k=<k>
//   video_id<TAB>label(0|1)<TAB>num_frames<TAB>relative_path
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

// Loads the manifest plus every feature file, recomputes fragment counts
// from num_frames and k, and validates the result.
Dataset load_manifest(const std::filesystem::path& path, const LoadOptions& opts = {});

struct SyntheticConfig {
  std::size_t num_normal_videos = 40;
  std::size_t num_anomalous_videos = 40;
  std::size_t num_test_normal_videos = 10;
  std::size_t num_test_anomalous_videos = 10;
  std::size_t fragments_min = 8;
  std::size_t fragments_max = 16;
  std::size_t feature_dim = 16;
  std::size_t frames_per_fragment = 16;
  std::vector<double> normal_mean;     // broadcast of 0 when empty
  std::vector<double> anomalous_mean;  // broadcast of mean_separation*stddev when empty
  double mean_separation = 2.0;        // per-coordinate, in units of stddev
  double feature_stddev = 1.0;
  double anomaly_portion_min = 0.2;
  double anomaly_portion_max = 0.4;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  Dataset train;
  Dataset test;
  // Per-fragment ground truth for both splits, keyed by video_id.
  std::map<std::string, std::vector<int>> fragment_truth;
};

// Normal videos draw every fragment from N(normal_mean, stddev^2 I).
// Anomalous videos draw one contiguous run of round(portion * m) fragments
// from N(anomalous_mean, ...) and the rest from the normal distribution.
// Pure function of cfg, seed included.
SyntheticData generate_synthetic(const SyntheticConfig& cfg);

}  // namespace srad
