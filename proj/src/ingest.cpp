#include "srad/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace srad {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'F', 'V'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint16_t kFlag64Bit = 1u << 0;

static_assert(std::endian::native == std::endian::little,
              "feature file IO assumes a little-endian host");

template <class T>
void put(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <class T>
T get(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    double sq = 0.0;
    for (double v : r) sq += v * v;
    if (sq <= 0.0) continue;  // zero rows stay as-is
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : r) v *= inv;
  }
}

}  // namespace

void write_features(const Matrix& m, const std::filesystem::path& path,
                    FeaturePrecision precision) {
  if (m.rows < 1 || m.cols < 1)
    throw ShapeError("write_features: matrix must have at least one row and column");
  if (!m.all_finite())
    throw ValidationError("write_features: matrix contains a non-finite value");

  std::string buf;
  buf.reserve(16 + m.data.size() * 8);
  buf.append(kMagic, 4);
  put<std::uint16_t>(buf, kVersion);
  put<std::uint16_t>(buf, precision == FeaturePrecision::f64 ? kFlag64Bit : 0);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(m.rows));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(m.cols));
  if (precision == FeaturePrecision::f64) {
    for (double v : m.data) put<double>(buf, v);
  } else {
    for (double v : m.data) put<float>(buf, static_cast<float>(v));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Matrix read_features(const std::filesystem::path& path, std::size_t expected_rows,
                     std::size_t expected_cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());

  if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 4) != 0)
    throw ParseError("not a feature file (bad magic): " + path.string());
  const auto version = get<std::uint16_t>(buf.data() + 4);
  if (version != kVersion)
    throw ParseError("unsupported feature file version " + std::to_string(version) +
                     ": " + path.string());
  const auto flags = get<std::uint16_t>(buf.data() + 6);
  const auto rows = get<std::uint32_t>(buf.data() + 8);
  const auto cols = get<std::uint32_t>(buf.data() + 12);

  if (rows != expected_rows || cols != expected_cols) {
    std::ostringstream os;
    os << "feature file " << path.string() << " is " << rows << "x" << cols
       << ", expected " << expected_rows << "x" << expected_cols;
    throw ShapeError(os.str());
  }
  if (rows < 1 || cols < 1)
    throw ShapeError("feature file has empty dimensions: " + path.string());

  const std::size_t value_size = (flags & kFlag64Bit) ? 8 : 4;
  const std::size_t count = static_cast<std::size_t>(rows) * cols;
  if (buf.size() != 16 + count * value_size) {
    std::ostringstream os;
    os << "feature file " << path.string() << " payload is " << (buf.size() - 16)
       << " bytes, expected " << count * value_size;
    throw ParseError(os.str());
  }

  Matrix m(rows, cols);
  const char* p = buf.data() + 16;
  if (flags & kFlag64Bit) {
    for (std::size_t i = 0; i < count; ++i) m.data[i] = get<double>(p + i * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i)
      m.data[i] = static_cast<double>(get<float>(p + i * 4));
  }
  if (!m.all_finite())
    throw ValidationError("feature file contains a non-finite value: " + path.string());
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  Manifest m;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty manifest: " + path.string());

  // Header: #srad-manifest v1 dim=<D> k=<k>
  {
    std::istringstream hs(line);
    std::string tag, ver, dim_kv, k_kv;
    hs >> tag >> ver >> dim_kv >> k_kv;
    if (tag != "#srad-manifest" || ver != "v1" || dim_kv.rfind("dim=", 0) != 0 ||
        k_kv.rfind("k=", 0) != 0)
      throw ParseError("bad manifest header: " + line);
    try {
      m.feature_dim = std::stoul(dim_kv.substr(4));
      m.frames_per_fragment = std::stoul(k_kv.substr(2));
    } catch (const std::exception&) {
      throw ParseError("bad manifest header values: " + line);
    }
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestEntry e;
    std::string label_s, frames_s;
    if (!std::getline(ls, e.video_id, '\t') || !std::getline(ls, label_s, '\t') ||
        !std::getline(ls, frames_s, '\t') || !std::getline(ls, e.feature_path))
      throw ParseError("manifest line " + std::to_string(lineno) +
                       " is not tab-separated id/label/frames/path: " + line);
    if (label_s == "0")
      e.video_label = 0;
    else if (label_s == "1")
      e.video_label = 1;
    else
      throw ParseError("manifest line " + std::to_string(lineno) + ": label '" +
                       label_s + "' is not 0 or 1");
    try {
      e.num_frames = std::stoul(frames_s);
    } catch (const std::exception&) {
      throw ParseError("manifest line " + std::to_string(lineno) +
                       ": bad frame count '" + frames_s + "'");
    }
    m.entries.push_back(std::move(e));
  }
  if (m.entries.empty()) throw ParseError("manifest has no entries: " + path.string());
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "#srad-manifest v1 dim=" << m.feature_dim << " k=" << m.frames_per_fragment
      << "\n";
  for (const auto& e : m.entries)
    out << e.video_id << '\t' << e.video_label << '\t' << e.num_frames << '\t'
        << e.feature_path << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

Dataset load_manifest(const std::filesystem::path& path, const LoadOptions& opts) {
  const Manifest m = read_manifest(path);
  const auto base = path.has_parent_path() ? path.parent_path()
                                           : std::filesystem::path(".");

  Dataset d;
  d.feature_dim = m.feature_dim;
  d.frames_per_fragment = m.frames_per_fragment;
  if (d.frames_per_fragment < 1)
    throw ValidationError("manifest k must be >= 1: " + path.string());

  for (const auto& e : m.entries) {
    VideoRecord v;
    v.video_id = e.video_id;
    v.video_label = e.video_label;
    v.num_frames = e.num_frames;
    if (v.num_frames < 1)
      throw ValidationError("video " + v.video_id + " has num_frames = 0");
    const std::size_t expected = ceil_div(v.num_frames, d.frames_per_fragment);
    v.features = read_features(base / e.feature_path, expected, d.feature_dim);
    if (opts.l2_normalize) normalize_rows(v.features);
    d.videos.push_back(std::move(v));
  }

  require_valid(d);
  return d;
}

namespace {

void check_synthetic_config(const SyntheticConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ValidationError("synthetic config: " + msg); };
  if (cfg.num_normal_videos + cfg.num_anomalous_videos < 1)
    fail("need at least one training video");
  if (cfg.num_test_normal_videos + cfg.num_test_anomalous_videos < 1)
    fail("need at least one test video");
  if (cfg.fragments_min < 1 || cfg.fragments_min > cfg.fragments_max)
    fail("fragment range must satisfy 1 <= min <= max");
  if ((cfg.num_anomalous_videos > 0 || cfg.num_test_anomalous_videos > 0) &&
      cfg.fragments_min < 2)
    fail("anomalous videos need at least 2 fragments");
  if (cfg.feature_dim < 1) fail("feature_dim must be >= 1");
  if (cfg.frames_per_fragment < 1) fail("frames_per_fragment must be >= 1");
  if (cfg.feature_stddev <= 0.0) fail("feature_stddev must be positive");
  if (!(cfg.anomaly_portion_min > 0.0 && cfg.anomaly_portion_max < 1.0 &&
        cfg.anomaly_portion_min <= cfg.anomaly_portion_max))
    fail("anomaly portion range must satisfy 0 < min <= max < 1");
  if (!cfg.normal_mean.empty() && cfg.normal_mean.size() != cfg.feature_dim)
    fail("normal_mean has wrong dimension");
  if (!cfg.anomalous_mean.empty() && cfg.anomalous_mean.size() != cfg.feature_dim)
    fail("anomalous_mean has wrong dimension");
}

struct MakeVideoArgs {
  std::string id;
  int label;
  const std::vector<double>& normal_mean;
  const std::vector<double>& anomalous_mean;
};

VideoRecord make_video(const SyntheticConfig& cfg, const MakeVideoArgs& args,
                       RngHandle rng, std::vector<int>& truth_out) {
  const std::size_t span = cfg.fragments_max - cfg.fragments_min + 1;
  const std::size_t m = cfg.fragments_min + rng.next_below(span);
  const std::size_t k = cfg.frames_per_fragment;
  // Last fragment may cover fewer than k frames.
  const std::size_t num_frames = (m - 1) * k + 1 + rng.next_below(k);

  truth_out.assign(m, 0);
  std::size_t run_start = 0, run_len = 0;
  if (args.label == 1) {
    const double portion = cfg.anomaly_portion_min +
                           rng.next_unit() *
                               (cfg.anomaly_portion_max - cfg.anomaly_portion_min);
    run_len = static_cast<std::size_t>(
        std::lround(portion * static_cast<double>(m)));
    if (run_len > m) run_len = m;
    if (run_len > 0) run_start = rng.next_below(m - run_len + 1);
    for (std::size_t j = run_start; j < run_start + run_len; ++j) truth_out[j] = 1;
  }

  VideoRecord v;
  v.video_id = args.id;
  v.video_label = args.label;
  v.num_frames = num_frames;
  v.features = Matrix(m, cfg.feature_dim);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& mean = truth_out[j] ? args.anomalous_mean : args.normal_mean;
    for (std::size_t c = 0; c < cfg.feature_dim; ++c)
      v.features(j, c) = rng.next_normal(mean[c], cfg.feature_stddev);
  }
  return v;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
  check_synthetic_config(cfg);

  std::vector<double> normal_mean = cfg.normal_mean;
  if (normal_mean.empty()) normal_mean.assign(cfg.feature_dim, 0.0);
  std::vector<double> anomalous_mean = cfg.anomalous_mean;
  if (anomalous_mean.empty()) {
    anomalous_mean = normal_mean;
    for (double& v : anomalous_mean) v += cfg.mean_separation * cfg.feature_stddev;
  }

  const RngHandle root(cfg.seed);
  SyntheticData out;

  auto fill_split = [&](Dataset& split, std::string_view prefix, std::size_t n_normal,
                        std::size_t n_anomalous, const RngHandle& split_rng) {
    split.feature_dim = cfg.feature_dim;
    split.frames_per_fragment = cfg.frames_per_fragment;
    char id[64];
    for (std::size_t i = 0; i < n_normal + n_anomalous; ++i) {
      const bool anomalous = i >= n_normal;
      std::snprintf(id, sizeof(id), "%.*s_%c%03zu", static_cast<int>(prefix.size()),
                    prefix.data(), anomalous ? 'a' : 'n',
                    anomalous ? i - n_normal : i);
      std::vector<int> truth;
      MakeVideoArgs args{id, anomalous ? 1 : 0, normal_mean, anomalous_mean};
      split.videos.push_back(
          make_video(cfg, args, split_rng.child("video", i), truth));
      out.fragment_truth[id] = std::move(truth);
    }
  };

  fill_split(out.train, "train", cfg.num_normal_videos, cfg.num_anomalous_videos,
             root.child("split", 0));
  fill_split(out.test, "test", cfg.num_test_normal_videos,
             cfg.num_test_anomalous_videos, root.child("split", 1));

  require_valid(out.train);
  require_valid(out.test);
  return out;
}

}  // namespace srad
