#pragma once

#include <filesystem>
#include <vector>

#include "srad/core.hpp"

namespace srad {

// Two fully connected layers: FC-1 (D -> H1, ReLU, inverted dropout) and
// FC-2 (H1 -> 1, sigmoid). The clustering space is the FC-1 output after
// ReLU and before dropout.
struct Model {
  Matrix w1;               // D x H1
  std::vector<double> b1;  // H1
  std::vector<double> w2;  // H1
  double b2 = 0.0;
  double dropout_rate = 0.0;

  std::size_t input_dim() const { return w1.rows; }
  std::size_t hidden_width() const { return w1.cols; }
};

struct ForwardCache {
  Matrix input;               // m x D
  Matrix preact;              // m x H1, before ReLU
  Matrix hidden_raw;          // m x H1, after ReLU, before dropout (clustering space)
  Matrix hidden;              // m x H1, after dropout
  Matrix dropout_mask;        // m x H1, entries in {0, 1/(1-p)}
  std::vector<double> logits; // m
  std::vector<double> scores; // m, strictly in (0, 1)
};

struct Gradients {
  Matrix w1;
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
};

struct AdamState {
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  Matrix m_w1, v_w1;
  std::vector<double> m_b1, v_b1;
  std::vector<double> m_w2, v_w2;
  double m_b2 = 0.0, v_b2 = 0.0;
};

// Weights uniform in +-sqrt(6/(fan_in+fan_out)), biases zero.
Model init_model(std::size_t input_dim, std::size_t hidden_width, double dropout_rate,
                 RngHandle rng);

AdamState init_adam(const Model& model, double learning_rate);

ForwardCache forward_train(const Model& model, const Matrix& x, RngHandle& rng);
ForwardCache forward_infer(const Model& model, const Matrix& x);

// Exact gradients of the scalar loss whose partials are supplied:
// d_scores = dL/dscore (m), d_hidden_raw = dL/dR (m x H1) or null. The
// hidden-path gradient enters after the ReLU gate and bypasses dropout.
Gradients backward(const Model& model, const ForwardCache& cache,
                   std::span<const double> d_scores,
                   const Matrix* d_hidden_raw = nullptr);

// Bias-corrected Adam update, in place.
void adam_step(Model& model, const Gradients& grads, AdamState& state);

// Checkpoint: "SRCK" header + dims, then parameters and Adam state as
// little-endian 64-bit values. Round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const AdamState& adam);
struct Checkpoint {
  Model model;
  AdamState adam;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace srad
