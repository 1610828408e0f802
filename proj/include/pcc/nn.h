#pragma once

// Minimal neural-network engine: forward/backward passes for the layers the
// two classifiers use, the classification loss, optimizers and a
// finite-difference gradient checker. Everything works on float64 and is
// deterministic: identical inputs give bitwise-identical outputs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pcc/contour_data.h"
#include "pcc/rng.h"
#include "pcc/tensor.h"

namespace pcc {

// ---------------------------------------------------------------------------
// 1-D convolution (cross-correlation, valid padding)

struct Conv1dParams {
  Tensor weights;  // [out_channels, in_channels, kernel_len]
  Tensor bias;     // [out_channels]
  std::size_t stride = 1;

  std::size_t out_channels() const { return weights.dim(0); }
  std::size_t in_channels() const { return weights.dim(1); }
  std::size_t kernel_len() const { return weights.dim(2); }
};

struct Conv1dGrads {
  Tensor weights;
  Tensor bias;
};

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel_len, std::size_t stride);

// x: [C_in, L] -> y: [C_out, L_out]. y[o,t] = bias[o] + sum_{c,k} w[o,c,k] x[c, t*stride + k].
// The backward pass needs the forward input, so the input is the cache.
Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p);

struct Conv1dBackward {
  Tensor dx;  // empty when the input gradient was not requested
  Conv1dGrads grads;
};

Conv1dBackward conv1d_backward(const Tensor& dy, const Tensor& x, const Conv1dParams& p,
                               bool need_input_grad = true);

// ---------------------------------------------------------------------------
// ReLU

Tensor relu(const Tensor& x);
// dx = dy where x > 0, else 0.
Tensor relu_backward(const Tensor& dy, const Tensor& x);

// ---------------------------------------------------------------------------
// Max pooling over the last axis of a [C, L] tensor

struct MaxPoolCache {
  std::vector<std::size_t> input_shape;
  std::vector<std::size_t> winners;  // flat input index per output element
};

struct MaxPoolForward {
  Tensor output;
  MaxPoolCache cache;
};

// Ties go to the lowest index in the window.
MaxPoolForward maxpool1d_forward(const Tensor& x, std::size_t window, std::size_t stride);
Tensor maxpool1d_backward(const Tensor& dy, const MaxPoolCache& cache);

// ---------------------------------------------------------------------------
// Fully connected layer. The input may have any shape; it is read flat.

struct DenseParams {
  Tensor weights;  // [out_dim, in_dim]
  Tensor bias;     // [out_dim]

  std::size_t out_dim() const { return weights.dim(0); }
  std::size_t in_dim() const { return weights.dim(1); }
};

struct DenseGrads {
  Tensor weights;
  Tensor bias;
};

Tensor dense_forward(const Tensor& x, const DenseParams& p);

struct DenseBackward {
  Tensor dx;  // same shape as the forward input
  DenseGrads grads;
};

DenseBackward dense_backward(const Tensor& dy, const Tensor& x, const DenseParams& p);

// ---------------------------------------------------------------------------
// LSTM with forget gate:
//   i = sigm(W_i x + U_i h + b_i)   f = sigm(W_f x + U_f h + b_f)
//   g = tanh(W_g x + U_g h + b_g)   o = sigm(W_o x + U_o h + b_o)
//   c' = f * c + i * g              h' = o * tanh(c')

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCellGate = 2, kOutputGate = 3 };
inline constexpr std::size_t kNumGates = 4;

struct LstmParams {
  std::array<Tensor, kNumGates> input_weights;      // [hidden, in_dim]
  std::array<Tensor, kNumGates> recurrent_weights;  // [hidden, hidden]
  std::array<Tensor, kNumGates> bias;               // [hidden]

  static LstmParams zeros(std::size_t in_dim, std::size_t hidden);

  std::size_t hidden() const { return bias[0].size(); }
  std::size_t in_dim() const { return input_weights[0].dim(1); }

  // Throws ShapeError unless all gates agree on hidden and in_dim.
  void check() const;
};

struct LstmGrads {
  std::array<Tensor, kNumGates> input_weights;
  std::array<Tensor, kNumGates> recurrent_weights;
  std::array<Tensor, kNumGates> bias;
};

struct LstmStepCache {
  Tensor x, h_prev, c_prev;
  std::array<Tensor, kNumGates> gates;  // post-activation i, f, g, o
  Tensor tanh_c;
};

struct LstmStep {
  Tensor h;
  Tensor c;
  LstmStepCache cache;
};

LstmStep lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                   const LstmParams& p);

// Everything BPTT needs, stored step-major in flat buffers.
struct LstmCache {
  std::size_t steps = 0;
  std::size_t in_dim = 0;
  std::size_t hidden = 0;
  std::vector<double> inputs;  // [steps, in_dim]
  std::vector<double> gates;   // [steps, 4, hidden], post-activation
  std::vector<double> cells;   // [steps + 1, hidden], row 0 is the zero state
  std::vector<double> hiddens; // [steps + 1, hidden]
  std::vector<double> tanh_c;  // [steps, hidden]
};

struct LstmForward {
  Tensor h_final;  // [hidden]
  LstmCache cache;
};

// seq: [L, in_dim]; h and c start at zero.
LstmForward lstm_forward(const Tensor& seq, const LstmParams& p);

// Final hidden state only; no cache is kept.
Tensor lstm_final_state(const Tensor& seq, const LstmParams& p);

struct LstmBackward {
  LstmGrads grads;
  Tensor dseq;  // [L, in_dim]
};

LstmBackward lstm_backward(const Tensor& dh_final, const LstmCache& cache, const LstmParams& p);

// ---------------------------------------------------------------------------
// Loss

struct LossResult {
  double loss = 0.0;
  Tensor dlogits;
  Tensor probs;
};

// Softmax with the max logit subtracted, then -ln p[label].
LossResult softmax_cross_entropy(const Tensor& logits, ClassLabel label);
Tensor softmax(const Tensor& logits);

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { Sgd, Adam };

struct OptimizerState {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;

  static OptimizerState sgd(double learning_rate);
  static OptimizerState adam(double learning_rate);
};

void optimizer_step(const ParamRefs& params, const Gradients& grads, OptimizerState& state);

// ---------------------------------------------------------------------------
// Initialisation

// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);
void uniform_fill(Tensor& t, double lo, double hi, Rng& rng);

// ---------------------------------------------------------------------------
// Gradient verification

struct GradCheckResult {
  std::vector<double> per_tensor;  // max relative error per parameter tensor
  double max_error = 0.0;
};

// Compares `analytic` against central differences of `loss` on a random
// subsample of at most `max_coords` coordinates per tensor. `loss` must read
// the current values of `params`; they are perturbed in place and restored.
// Relative error is |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(const std::function<double()>& loss, const ParamRefs& params,
                           const Gradients& analytic, Rng& rng, double eps = 1e-4,
                           std::size_t max_coords = 200);

}  // namespace pcc
