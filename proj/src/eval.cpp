#include "srad/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace srad {

std::vector<double> expand_to_frames(std::span<const double> fragment_scores,
                                     std::size_t k, std::size_t num_frames) {
  if (k < 1) throw ShapeError("expand_to_frames: k must be >= 1");
  if (num_frames < 1) throw ShapeError("expand_to_frames: num_frames must be >= 1");
  if (fragment_scores.size() != ceil_div(num_frames, k))
    throw ShapeError("expand_to_frames: fragment count does not match frames");

  std::vector<double> out(num_frames);
  for (std::size_t j = 0; j < num_frames; ++j) out[j] = fragment_scores[j / k];
  return out;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("roc_auc: length mismatch");
  const std::size_t n = scores.size();

  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("roc_auc: labels must be binary");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw ValidationError("roc_auc: need at least one positive and one negative label");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Average rank within tie groups, then the rank-sum U statistic.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }

  const double u = pos_rank_sum -
                   0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

FrameTruth load_ground_truth(const std::filesystem::path& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ground truth: " + path.string());

  FrameTruth truth;
  for (const VideoRecord& v : dataset.videos)
    truth[v.video_id] = std::vector<int>(v.num_frames, 0);

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string id, start_s, end_s;
    if (!std::getline(ls, id, '\t') || !std::getline(ls, start_s, '\t') ||
        !std::getline(ls, end_s))
      throw ParseError("ground truth line " + std::to_string(lineno) +
                       " is not id<TAB>start<TAB>end: " + line);
    auto it = truth.find(id);
    if (it == truth.end())
      throw ValidationError("ground truth names unknown video: " + id);
    std::size_t start = 0, end = 0;
    try {
      start = std::stoul(start_s);
      end = std::stoul(end_s);
    } catch (const std::exception&) {
      throw ParseError("ground truth line " + std::to_string(lineno) +
                       ": bad frame numbers");
    }
    if (start >= end || end > it->second.size())
      throw ValidationError("ground truth line " + std::to_string(lineno) +
                            ": interval [" + start_s + "," + end_s +
                            ") out of range for " + id);
    for (std::size_t f = start; f < end; ++f) it->second[f] = 1;
  }
  return truth;
}

void save_ground_truth(const FrameTruth& truth, const Dataset& dataset,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const VideoRecord& v : dataset.videos) {
    const auto it = truth.find(v.video_id);
    if (it == truth.end())
      throw ValidationError("no ground truth for video: " + v.video_id);
    const auto& frames = it->second;
    std::size_t f = 0;
    while (f < frames.size()) {
      if (frames[f] == 0) {
        ++f;
        continue;
      }
      std::size_t end = f;
      while (end < frames.size() && frames[end] == 1) ++end;
      out << v.video_id << '\t' << f << '\t' << end << '\n';
      f = end;
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

FrameTruth fragment_truth_to_frames(
    const std::map<std::string, std::vector<int>>& fragment_truth,
    const Dataset& dataset) {
  FrameTruth out;
  for (const VideoRecord& v : dataset.videos) {
    const auto it = fragment_truth.find(v.video_id);
    if (it == fragment_truth.end())
      throw ValidationError("no fragment truth for video: " + v.video_id);
    std::vector<double> as_double(it->second.begin(), it->second.end());
    const auto frames =
        expand_to_frames(as_double, dataset.frames_per_fragment, v.num_frames);
    std::vector<int> bits(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) bits[i] = frames[i] != 0.0;
    out[v.video_id] = std::move(bits);
  }
  return out;
}

EvalResult evaluate(const Model& model, const Dataset& dataset, const FrameTruth& truth) {
  require_valid(dataset);
  if (model.input_dim() != dataset.feature_dim)
    throw ShapeError("evaluate: model expects dim " +
                     std::to_string(model.input_dim()) + ", dataset has " +
                     std::to_string(dataset.feature_dim));
  for (const VideoRecord& v : dataset.videos) {
    const auto it = truth.find(v.video_id);
    if (it == truth.end())
      throw ValidationError("missing ground truth for video: " + v.video_id);
    if (it->second.size() != v.num_frames)
      throw ShapeError("ground truth for " + v.video_id + " has " +
                       std::to_string(it->second.size()) + " frames, video has " +
                       std::to_string(v.num_frames));
  }

  EvalResult res;
  res.per_video.resize(dataset.videos.size());

  const std::int64_t n = static_cast<std::int64_t>(dataset.videos.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const VideoRecord& v = dataset.videos[static_cast<std::size_t>(i)];
    const ForwardCache cache = forward_infer(model, v.features);
    FrameScores fs;
    fs.video_id = v.video_id;
    fs.scores = expand_to_frames(cache.scores, dataset.frames_per_fragment,
                                 v.num_frames);
    fs.ground_truth = truth.at(v.video_id);
    res.per_video[static_cast<std::size_t>(i)] = std::move(fs);
  }

  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  for (const FrameScores& fs : res.per_video) {
    pooled_scores.insert(pooled_scores.end(), fs.scores.begin(), fs.scores.end());
    pooled_labels.insert(pooled_labels.end(), fs.ground_truth->begin(),
                         fs.ground_truth->end());
  }
  res.auc = roc_auc(pooled_scores, pooled_labels);
  return res;
}

void write_timeline_csv(const FrameScores& fs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "frame_index,score,ground_truth\n";
  char buf[32];
  for (std::size_t i = 0; i < fs.scores.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", fs.scores[i]);
    out << i << ',' << buf << ',';
    if (fs.ground_truth) out << (*fs.ground_truth)[i];
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace srad
