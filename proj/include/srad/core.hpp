#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srad/errors.hpp"

namespace srad {

inline std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// Dense row-major matrix of doubles. One row per video fragment when used
// as a FragmentMatrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Matrix&) const = default;
};

using FragmentMatrix = Matrix;

struct VideoRecord {
  std::string video_id;
  int video_label = 0;  // 0 = normal, 1 = anomalous
  std::size_t num_frames = 0;
  FragmentMatrix features;  // one row per fragment

  std::size_t num_fragments() const { return features.rows; }
};

struct Dataset {
  std::vector<VideoRecord> videos;
  std::size_t feature_dim = 0;
  std::size_t frames_per_fragment = 0;  // k
};

struct Violation {
  std::string video_id;  // empty for dataset-level violations
  std::string reason;
};

// Reports every invariant violation; empty result means the dataset is
// well-formed. Pure: violations are data, not failures.
std::vector<Violation> validate_dataset(const Dataset& d);

// Throws ValidationError listing all violations when the dataset is not
// well-formed.
void require_valid(const Dataset& d);

// Splittable counter-based generator. Same seed gives a bit-identical
// stream; child streams are derived from (key, purpose, index) so consumers
// never perturb each other's draws regardless of call order.
class RngHandle {
 public:
  RngHandle() : RngHandle(0) {}
  explicit RngHandle(std::uint64_t seed) : key_(seed) {}

  RngHandle child(std::string_view purpose, std::uint64_t index) const;

  std::uint64_t next_u64();
  std::uint64_t next_below(std::uint64_t bound);  // uniform in [0, bound)
  double next_unit();                             // uniform in [0, 1)
  double next_normal(double mean = 0.0, double stddev = 1.0);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

template <class T>
void shuffle(std::vector<T>& v, RngHandle& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace srad
