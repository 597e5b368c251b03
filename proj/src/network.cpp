#include "srad/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "srad/kernels.hpp"

namespace srad {

namespace {

// Scores must stay strictly inside (0,1) even for extreme logits.
constexpr double kScoreMargin = 1e-12;

double sigmoid(double z) {
  double s;
  if (z >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    s = e / (1.0 + e);
  }
  return std::clamp(s, kScoreMargin, 1.0 - kScoreMargin);
}

void check_input(const Model& model, const Matrix& x) {
  if (x.cols != model.input_dim())
    throw ShapeError("forward: input has " + std::to_string(x.cols) +
                     " columns, model expects " + std::to_string(model.input_dim()));
  if (x.rows < 1) throw ShapeError("forward: input has no rows");
}

ForwardCache run_forward(const Model& model, const Matrix& x, RngHandle* dropout_rng) {
  check_input(model, x);
  const std::size_t m = x.rows;
  const std::size_t h = model.hidden_width();

  ForwardCache c;
  c.input = x;
  c.preact = Matrix(m, h);
  kernels::gemm(x, model.w1, c.preact);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < h; ++j) c.preact(i, j) += model.b1[j];

  c.hidden_raw = c.preact;
  for (double& v : c.hidden_raw.data) v = v > 0.0 ? v : 0.0;

  c.dropout_mask = Matrix(m, h, 1.0);
  if (dropout_rng != nullptr && model.dropout_rate > 0.0) {
    const double keep = 1.0 - model.dropout_rate;
    const double scale = 1.0 / keep;
    for (double& v : c.dropout_mask.data)
      v = dropout_rng->next_unit() < keep ? scale : 0.0;
  }

  c.hidden = c.hidden_raw;
  for (std::size_t i = 0; i < c.hidden.data.size(); ++i)
    c.hidden.data[i] *= c.dropout_mask.data[i];

  c.logits.resize(m);
  kernels::matvec(c.hidden, model.w2, c.logits);
  for (double& z : c.logits) z += model.b2;

  c.scores.resize(m);
  for (std::size_t i = 0; i < m; ++i) c.scores[i] = sigmoid(c.logits[i]);
  return c;
}

}  // namespace

Model init_model(std::size_t input_dim, std::size_t hidden_width, double dropout_rate,
                 RngHandle rng) {
  if (input_dim < 1 || hidden_width < 1)
    throw ShapeError("init_model: dimensions must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0)
    throw ValidationError("init_model: dropout_rate must be in [0, 1)");

  Model m;
  m.dropout_rate = dropout_rate;
  m.w1 = Matrix(input_dim, hidden_width);
  m.b1.assign(hidden_width, 0.0);
  m.w2.assign(hidden_width, 0.0);
  m.b2 = 0.0;

  const double bound1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_width));
  for (double& v : m.w1.data) v = (2.0 * rng.next_unit() - 1.0) * bound1;
  const double bound2 = std::sqrt(6.0 / static_cast<double>(hidden_width + 1));
  for (double& v : m.w2) v = (2.0 * rng.next_unit() - 1.0) * bound2;
  return m;
}

AdamState init_adam(const Model& model, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  s.m_w1 = Matrix(model.w1.rows, model.w1.cols);
  s.v_w1 = Matrix(model.w1.rows, model.w1.cols);
  s.m_b1.assign(model.b1.size(), 0.0);
  s.v_b1.assign(model.b1.size(), 0.0);
  s.m_w2.assign(model.w2.size(), 0.0);
  s.v_w2.assign(model.w2.size(), 0.0);
  return s;
}

ForwardCache forward_train(const Model& model, const Matrix& x, RngHandle& rng) {
  return run_forward(model, x, &rng);
}

ForwardCache forward_infer(const Model& model, const Matrix& x) {
  return run_forward(model, x, nullptr);
}

Gradients backward(const Model& model, const ForwardCache& cache,
                   std::span<const double> d_scores, const Matrix* d_hidden_raw) {
  const std::size_t m = cache.input.rows;
  const std::size_t h = model.hidden_width();
  if (cache.input.cols != model.input_dim() || cache.hidden.cols != h)
    throw ShapeError("backward: cache does not match model");
  if (d_scores.size() != m) throw ShapeError("backward: d_scores has wrong length");
  if (d_hidden_raw != nullptr &&
      (d_hidden_raw->rows != m || d_hidden_raw->cols != h))
    throw ShapeError("backward: d_hidden_raw has wrong shape");

  // Sigmoid: dL/dz2 = dL/dscore * score * (1 - score).
  std::vector<double> d_logits(m);
  for (std::size_t i = 0; i < m; ++i)
    d_logits[i] = d_scores[i] * cache.scores[i] * (1.0 - cache.scores[i]);

  Gradients g;
  g.w2.resize(h);
  kernels::matvec_t(cache.hidden, d_logits, g.w2);
  g.b2 = 0.0;
  for (double v : d_logits) g.b2 += v;

  // Head path re-enters through the dropout mask; the clustering path joins
  // after it, then both pass the shared ReLU gate.
  Matrix d_hidden(m, h);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < h; ++j)
      d_hidden(i, j) = d_logits[i] * model.w2[j] * cache.dropout_mask(i, j);
  if (d_hidden_raw != nullptr)
    for (std::size_t i = 0; i < d_hidden.data.size(); ++i)
      d_hidden.data[i] += d_hidden_raw->data[i];

  for (std::size_t i = 0; i < d_hidden.data.size(); ++i)
    if (!(cache.preact.data[i] > 0.0)) d_hidden.data[i] = 0.0;

  g.w1 = Matrix(model.w1.rows, h);
  kernels::gemm_at_b(cache.input, d_hidden, g.w1);
  g.b1.assign(h, 0.0);
  kernels::col_sums(d_hidden, g.b1);
  return g;
}

namespace {

void adam_update(double g, double& m, double& v, double& param, double lr,
                 double b1, double b2, double eps, double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g * g;
  const double m_hat = m / bc1;
  const double v_hat = v / bc2;
  param -= lr * m_hat / (std::sqrt(v_hat) + eps);
}

}  // namespace

void adam_step(Model& model, const Gradients& grads, AdamState& s) {
  if (grads.w1.rows != model.w1.rows || grads.w1.cols != model.w1.cols ||
      grads.b1.size() != model.b1.size() || grads.w2.size() != model.w2.size())
    throw ShapeError("adam_step: gradient shapes do not match model");

  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));

  for (std::size_t i = 0; i < model.w1.data.size(); ++i)
    adam_update(grads.w1.data[i], s.m_w1.data[i], s.v_w1.data[i], model.w1.data[i],
                s.learning_rate, s.beta1, s.beta2, s.epsilon, bc1, bc2);
  for (std::size_t i = 0; i < model.b1.size(); ++i)
    adam_update(grads.b1[i], s.m_b1[i], s.v_b1[i], model.b1[i], s.learning_rate,
                s.beta1, s.beta2, s.epsilon, bc1, bc2);
  for (std::size_t i = 0; i < model.w2.size(); ++i)
    adam_update(grads.w2[i], s.m_w2[i], s.v_w2[i], model.w2[i], s.learning_rate,
                s.beta1, s.beta2, s.epsilon, bc1, bc2);
  adam_update(grads.b2, s.m_b2, s.v_b2, model.b2, s.learning_rate, s.beta1, s.beta2,
              s.epsilon, bc1, bc2);
}

namespace {

constexpr char kCkptMagic[4] = {'S', 'R', 'C', 'K'};
constexpr std::uint16_t kCkptVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

struct Writer {
  std::string buf;
  template <class T>
  void put(T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf.append(raw, sizeof(T));
  }
  void put_doubles(std::span<const double> vs) {
    for (double v : vs) put<double>(v);
  }
};

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;
  explicit Reader(const std::string& b) : buf(b) {}
  template <class T>
  T get() {
    if (pos + sizeof(T) > buf.size()) throw ParseError("checkpoint truncated");
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  void get_doubles(std::span<double> out) {
    for (double& v : out) v = get<double>();
  }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const AdamState& adam) {
  Writer w;
  w.buf.append(kCkptMagic, 4);
  w.put<std::uint16_t>(kCkptVersion);
  w.put<std::uint16_t>(0);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.input_dim()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.hidden_width()));
  w.put<double>(model.dropout_rate);

  w.put_doubles(model.w1.data);
  w.put_doubles(model.b1);
  w.put_doubles(model.w2);
  w.put<double>(model.b2);

  w.put<double>(adam.learning_rate);
  w.put<double>(adam.beta1);
  w.put<double>(adam.beta2);
  w.put<double>(adam.epsilon);
  w.put<std::uint64_t>(adam.step);
  w.put_doubles(adam.m_w1.data);
  w.put_doubles(adam.v_w1.data);
  w.put_doubles(adam.m_b1);
  w.put_doubles(adam.v_b1);
  w.put_doubles(adam.m_w2);
  w.put_doubles(adam.v_w2);
  w.put<double>(adam.m_b2);
  w.put<double>(adam.v_b2);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());

  if (buf.size() < 8 || std::memcmp(buf.data(), kCkptMagic, 4) != 0)
    throw ParseError("not a checkpoint file (bad magic): " + path.string());

  Reader r(buf);
  r.pos = 4;
  const auto version = r.get<std::uint16_t>();
  if (version != kCkptVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  r.get<std::uint16_t>();  // flags, reserved
  const auto dim = r.get<std::uint32_t>();
  const auto width = r.get<std::uint32_t>();
  if (dim < 1 || width < 1) throw ParseError("checkpoint has bad dimensions");

  Checkpoint c;
  c.model.w1 = Matrix(dim, width);
  c.model.b1.resize(width);
  c.model.w2.resize(width);
  c.model.dropout_rate = r.get<double>();
  r.get_doubles(c.model.w1.data);
  r.get_doubles(c.model.b1);
  r.get_doubles(c.model.w2);
  c.model.b2 = r.get<double>();

  c.adam = init_adam(c.model, 0.0);
  c.adam.learning_rate = r.get<double>();
  c.adam.beta1 = r.get<double>();
  c.adam.beta2 = r.get<double>();
  c.adam.epsilon = r.get<double>();
  c.adam.step = r.get<std::uint64_t>();
  r.get_doubles(c.adam.m_w1.data);
  r.get_doubles(c.adam.v_w1.data);
  r.get_doubles(c.adam.m_b1);
  r.get_doubles(c.adam.v_b1);
  r.get_doubles(c.adam.m_w2);
  r.get_doubles(c.adam.v_w2);
  c.adam.m_b2 = r.get<double>();
  c.adam.v_b2 = r.get<double>();
  if (r.pos != buf.size())
    throw ParseError("checkpoint has trailing bytes: " + path.string());
  return c;
}

}  // namespace srad
