#include "srad/core.hpp"

#include <numbers>
#include <sstream>
#include <unordered_set>

namespace srad {

namespace {

constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

RngHandle RngHandle::child(std::string_view purpose, std::uint64_t index) const {
  RngHandle c;
  c.key_ = mix64((key_ ^ fnv1a(purpose)) + kGamma * (index + 1));
  return c;
}

std::uint64_t RngHandle::next_u64() {
  ++counter_;
  return mix64(key_ + kGamma * counter_);
}

std::uint64_t RngHandle::next_below(std::uint64_t bound) {
  // Lemire's multiply-shift; bias is negligible for 64-bit draws.
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double RngHandle::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngHandle::next_normal(double mean, double stddev) {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return mean + stddev * cached_normal_;
  }
  // Box-Muller on two uniform draws; u1 kept away from 0 for the log.
  double u1 = next_unit();
  double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return mean + stddev * r * std::cos(theta);
}

std::vector<Violation> validate_dataset(const Dataset& d) {
  std::vector<Violation> out;
  auto add = [&out](std::string id, std::string reason) {
    out.push_back({std::move(id), std::move(reason)});
  };

  if (d.videos.empty()) add("", "dataset has no videos");
  if (d.feature_dim < 1) add("", "feature_dim must be >= 1");
  if (d.frames_per_fragment < 1) add("", "frames_per_fragment must be >= 1");

  std::unordered_set<std::string> seen;
  for (const VideoRecord& v : d.videos) {
    if (!seen.insert(v.video_id).second)
      add(v.video_id, "duplicate video_id");

    if (v.video_label != 0 && v.video_label != 1)
      add(v.video_id, "video_label must be 0 or 1, got " + std::to_string(v.video_label));

    if (v.num_frames < 1) add(v.video_id, "num_frames must be >= 1");

    if (v.features.rows < 1) {
      add(v.video_id, "fragment matrix has no rows");
    } else if (d.frames_per_fragment >= 1 && v.num_frames >= 1) {
      const std::size_t expected = ceil_div(v.num_frames, d.frames_per_fragment);
      if (v.features.rows != expected) {
        std::ostringstream os;
        os << "fragment count " << v.features.rows << " does not match ceil("
           << v.num_frames << "/" << d.frames_per_fragment << ") = " << expected;
        add(v.video_id, os.str());
      }
    }

    if (v.features.cols != d.feature_dim) {
      std::ostringstream os;
      os << "feature dimension " << v.features.cols << " does not match dataset dim "
         << d.feature_dim;
      add(v.video_id, os.str());
    }

    if (!v.features.all_finite())
      add(v.video_id, "features contain a non-finite value");
  }
  return out;
}

void require_valid(const Dataset& d) {
  const auto violations = validate_dataset(d);
  if (violations.empty()) return;
  std::ostringstream os;
  os << "dataset validation failed:";
  for (const auto& v : violations) {
    os << "\n  ";
    if (!v.video_id.empty()) os << "[" << v.video_id << "] ";
    os << v.reason;
  }
  throw ValidationError(os.str());
}

}  // namespace srad
