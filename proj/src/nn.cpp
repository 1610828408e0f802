#include "pcc/nn.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcc/error.h"

namespace pcc {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void require(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

void require_shape(const Tensor& t, const std::vector<std::size_t>& shape, const char* what) {
  require(t.shape() == shape, std::string(what) + ": expected shape " +
                                  Tensor(shape).shape_string() + ", got " + t.shape_string());
}

// Fixed-order dot product with four partial sums.
double dot(const double* a, const double* b, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

// Recurrent weights of all gates, transposed: rt[j * 4H + g * H + i] = U_g[i][j].
std::vector<double> stacked_recurrent_transpose(const LstmParams& p) {
  const std::size_t H = p.hidden();
  std::vector<double> rt(H * kNumGates * H);
  for (std::size_t g = 0; g < kNumGates; ++g) {
    const Tensor& u = p.recurrent_weights[g];
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < H; ++j) rt[j * kNumGates * H + g * H + i] = u.at(i, j);
  }
  return rt;
}

// z[g*H + i] = b_g[i] + W_g[i] . x + sum_j U_g[i][j] h[j]
void gate_preactivations(const LstmParams& p, const std::vector<double>& rt, const double* x,
                         const double* h, double* z) {
  const std::size_t H = p.hidden();
  const std::size_t D = p.in_dim();
  const std::size_t G = kNumGates * H;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    const double* w = p.input_weights[g].raw();
    const double* b = p.bias[g].raw();
    for (std::size_t i = 0; i < H; ++i) {
      double acc = b[i];
      for (std::size_t d = 0; d < D; ++d) acc += w[i * D + d] * x[d];
      z[g * H + i] = acc;
    }
  }
  for (std::size_t j = 0; j < H; ++j) {
    const double hj = h[j];
    const double* row = rt.data() + j * G;
    for (std::size_t k = 0; k < G; ++k) z[k] += row[k] * hj;
  }
}

// Applies the gate nonlinearities and the cell update in place.
void lstm_cell_update(std::size_t H, double* gates, const double* c_prev, double* c,
                      double* tanh_c, double* h) {
  double* gi = gates;
  double* gf = gates + H;
  double* gg = gates + 2 * H;
  double* go = gates + 3 * H;
  for (std::size_t i = 0; i < H; ++i) {
    gi[i] = sigmoid(gi[i]);
    gf[i] = sigmoid(gf[i]);
    gg[i] = std::tanh(gg[i]);
    go[i] = sigmoid(go[i]);
    c[i] = gf[i] * c_prev[i] + gi[i] * gg[i];
    tanh_c[i] = std::tanh(c[i]);
    h[i] = go[i] * tanh_c[i];
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel_len, std::size_t stride) {
  require(kernel_len >= 1 && stride >= 1, "conv1d: kernel length and stride must be >= 1");
  require(length >= kernel_len, "conv1d: input length " + std::to_string(length) +
                                    " is shorter than kernel length " + std::to_string(kernel_len));
  return (length - kernel_len) / stride + 1;
}

Tensor conv1d_forward(const Tensor& x, const Conv1dParams& p) {
  require(p.weights.rank() == 3, "conv1d: weights must be [out, in, kernel]");
  require(x.rank() == 2, "conv1d: input must be [channels, length]");
  const std::size_t C_out = p.out_channels(), C_in = p.in_channels(), K = p.kernel_len();
  require(x.dim(0) == C_in, "conv1d: input has " + std::to_string(x.dim(0)) +
                                " channels, weights expect " + std::to_string(C_in));
  require_shape(p.bias, {C_out}, "conv1d bias");
  const std::size_t L = x.dim(1);
  const std::size_t L_out = conv1d_output_length(L, K, p.stride);

  Tensor y({C_out, L_out});
  for (std::size_t o = 0; o < C_out; ++o) {
    for (std::size_t t = 0; t < L_out; ++t) {
      double acc = p.bias[o];
      for (std::size_t c = 0; c < C_in; ++c)
        acc += dot(&p.weights.at(o, c, 0), &x.at(c, t * p.stride), K);
      y.at(o, t) = acc;
    }
  }
  return y;
}

Conv1dBackward conv1d_backward(const Tensor& dy, const Tensor& x, const Conv1dParams& p,
                               bool need_input_grad) {
  const std::size_t C_out = p.out_channels(), C_in = p.in_channels(), K = p.kernel_len();
  require(x.rank() == 2 && x.dim(0) == C_in, "conv1d backward: input shape mismatch");
  const std::size_t L = x.dim(1);
  const std::size_t L_out = conv1d_output_length(L, K, p.stride);
  require_shape(dy, {C_out, L_out}, "conv1d backward dy");

  Conv1dBackward out;
  out.grads.weights = p.weights.zeros_like();
  out.grads.bias = p.bias.zeros_like();
  if (need_input_grad) out.dx = x.zeros_like();
  for (std::size_t o = 0; o < C_out; ++o) {
    double db = 0.0;
    for (std::size_t t = 0; t < L_out; ++t) db += dy.at(o, t);
    out.grads.bias[o] = db;
    for (std::size_t c = 0; c < C_in; ++c) {
      double* dw = &out.grads.weights.at(o, c, 0);
      for (std::size_t t = 0; t < L_out; ++t) {
        const double g = dy.at(o, t);
        const double* xs = &x.at(c, t * p.stride);
        for (std::size_t k = 0; k < K; ++k) dw[k] += g * xs[k];
      }
      if (need_input_grad) {
        const double* w = &p.weights.at(o, c, 0);
        for (std::size_t t = 0; t < L_out; ++t) {
          const double g = dy.at(o, t);
          double* dxs = &out.dx.at(c, t * p.stride);
          for (std::size_t k = 0; k < K; ++k) dxs[k] += g * w[k];
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& dy, const Tensor& x) {
  require(dy.shape() == x.shape(), "relu backward: shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > 0.0)) dx[i] = 0.0;
  return dx;
}

// ---------------------------------------------------------------------------

MaxPoolForward maxpool1d_forward(const Tensor& x, std::size_t window, std::size_t stride) {
  require(x.rank() == 2, "maxpool1d: input must be [channels, length]");
  require(window >= 1 && stride >= 1, "maxpool1d: window and stride must be >= 1");
  const std::size_t C = x.dim(0), L = x.dim(1);
  require(L >= window, "maxpool1d: input length " + std::to_string(L) +
                           " is shorter than window " + std::to_string(window));
  const std::size_t L_out = (L - window) / stride + 1;

  MaxPoolForward out{Tensor({C, L_out}), {x.shape(), std::vector<std::size_t>(C * L_out)}};
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < L_out; ++t) {
      std::size_t best = c * L + t * stride;
      for (std::size_t k = 1; k < window; ++k) {
        const std::size_t idx = c * L + t * stride + k;
        if (x[idx] > x[best]) best = idx;
      }
      out.output.at(c, t) = x[best];
      out.cache.winners[c * L_out + t] = best;
    }
  }
  return out;
}

Tensor maxpool1d_backward(const Tensor& dy, const MaxPoolCache& cache) {
  require(dy.size() == cache.winners.size(), "maxpool1d backward: dy does not match the forward output");
  Tensor dx(cache.input_shape);
  for (std::size_t i = 0; i < dy.size(); ++i) dx[cache.winners[i]] += dy[i];
  return dx;
}

// ---------------------------------------------------------------------------

Tensor dense_forward(const Tensor& x, const DenseParams& p) {
  require(p.weights.rank() == 2, "dense: weights must be [out, in]");
  const std::size_t out_dim = p.out_dim(), in_dim = p.in_dim();
  require(x.size() == in_dim, "dense: input has " + std::to_string(x.size()) +
                                  " elements, layer expects " + std::to_string(in_dim));
  require_shape(p.bias, {out_dim}, "dense bias");
  Tensor y({out_dim});
  for (std::size_t o = 0; o < out_dim; ++o)
    y[o] = p.bias[o] + dot(&p.weights.at(o, 0), x.raw(), in_dim);
  return y;
}

DenseBackward dense_backward(const Tensor& dy, const Tensor& x, const DenseParams& p) {
  const std::size_t out_dim = p.out_dim(), in_dim = p.in_dim();
  require(x.size() == in_dim, "dense backward: input size mismatch");
  require_shape(dy, {out_dim}, "dense backward dy");
  DenseBackward out{x.zeros_like(), {p.weights.zeros_like(), p.bias.zeros_like()}};
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double g = dy[o];
    out.grads.bias[o] = g;
    double* dw = &out.grads.weights.at(o, 0);
    const double* w = &p.weights.at(o, 0);
    for (std::size_t i = 0; i < in_dim; ++i) {
      dw[i] = g * x[i];
      out.dx[i] += g * w[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

LstmParams LstmParams::zeros(std::size_t in_dim, std::size_t hidden) {
  LstmParams p;
  for (std::size_t g = 0; g < kNumGates; ++g) {
    p.input_weights[g] = Tensor({hidden, in_dim});
    p.recurrent_weights[g] = Tensor({hidden, hidden});
    p.bias[g] = Tensor({hidden});
  }
  return p;
}

void LstmParams::check() const {
  require(bias[0].rank() == 1, "lstm: bias must be a vector");
  require(input_weights[0].rank() == 2, "lstm: input weights must be [hidden, in_dim]");
  const std::size_t H = hidden(), D = in_dim();
  for (std::size_t g = 0; g < kNumGates; ++g) {
    require_shape(input_weights[g], {H, D}, "lstm input weights");
    require_shape(recurrent_weights[g], {H, H}, "lstm recurrent weights");
    require_shape(bias[g], {H}, "lstm bias");
  }
}

LstmStep lstm_step(const Tensor& x, const Tensor& h_prev, const Tensor& c_prev,
                   const LstmParams& p) {
  p.check();
  const std::size_t H = p.hidden(), D = p.in_dim();
  require(x.size() == D, "lstm step: input size mismatch");
  require(h_prev.size() == H && c_prev.size() == H, "lstm step: state size mismatch");

  LstmStep out{Tensor({H}), Tensor({H}), {}};
  out.cache.x = Tensor({D}, std::vector<double>(x.data().begin(), x.data().end()));
  out.cache.h_prev = Tensor({H}, std::vector<double>(h_prev.data().begin(), h_prev.data().end()));
  out.cache.c_prev = Tensor({H}, std::vector<double>(c_prev.data().begin(), c_prev.data().end()));
  for (std::size_t g = 0; g < kNumGates; ++g) {
    Tensor a({H});
    for (std::size_t i = 0; i < H; ++i) {
      double z = p.bias[g][i];
      for (std::size_t d = 0; d < D; ++d) z += p.input_weights[g].at(i, d) * x[d];
      for (std::size_t j = 0; j < H; ++j) z += p.recurrent_weights[g].at(i, j) * h_prev[j];
      a[i] = g == kCellGate ? std::tanh(z) : sigmoid(z);
    }
    out.cache.gates[g] = std::move(a);
  }
  out.cache.tanh_c = Tensor({H});
  const auto& gt = out.cache.gates;
  for (std::size_t i = 0; i < H; ++i) {
    out.c[i] = gt[kForgetGate][i] * c_prev[i] + gt[kInputGate][i] * gt[kCellGate][i];
    out.cache.tanh_c[i] = std::tanh(out.c[i]);
    out.h[i] = gt[kOutputGate][i] * out.cache.tanh_c[i];
  }
  return out;
}

LstmForward lstm_forward(const Tensor& seq, const LstmParams& p) {
  p.check();
  require(seq.rank() == 2, "lstm: sequence must be [steps, in_dim]");
  const std::size_t L = seq.dim(0), D = seq.dim(1), H = p.hidden();
  require(L >= 1, "lstm: sequence must have at least one step");
  require(D == p.in_dim(), "lstm: sequence feature size " + std::to_string(D) +
                               " does not match in_dim " + std::to_string(p.in_dim()));
  const std::size_t G = kNumGates * H;

  LstmForward out;
  LstmCache& cache = out.cache;
  cache.steps = L;
  cache.in_dim = D;
  cache.hidden = H;
  cache.inputs.assign(seq.data().begin(), seq.data().end());
  cache.gates.assign(L * G, 0.0);
  cache.cells.assign((L + 1) * H, 0.0);
  cache.hiddens.assign((L + 1) * H, 0.0);
  cache.tanh_c.assign(L * H, 0.0);

  const auto rt = stacked_recurrent_transpose(p);
  for (std::size_t t = 0; t < L; ++t) {
    double* z = cache.gates.data() + t * G;
    gate_preactivations(p, rt, seq.raw() + t * D, cache.hiddens.data() + t * H, z);
    lstm_cell_update(H, z, cache.cells.data() + t * H, cache.cells.data() + (t + 1) * H,
                     cache.tanh_c.data() + t * H, cache.hiddens.data() + (t + 1) * H);
  }
  out.h_final = Tensor({H}, std::vector<double>(cache.hiddens.end() - static_cast<std::ptrdiff_t>(H),
                                                cache.hiddens.end()));
  return out;
}

Tensor lstm_final_state(const Tensor& seq, const LstmParams& p) {
  p.check();
  require(seq.rank() == 2 && seq.dim(1) == p.in_dim(), "lstm: sequence shape mismatch");
  const std::size_t L = seq.dim(0), D = seq.dim(1), H = p.hidden();
  std::vector<double> z(kNumGates * H), c(H, 0.0), c_next(H), tanh_c(H);
  Tensor h({H});
  const auto rt = stacked_recurrent_transpose(p);
  for (std::size_t t = 0; t < L; ++t) {
    gate_preactivations(p, rt, seq.raw() + t * D, h.raw(), z.data());
    lstm_cell_update(H, z.data(), c.data(), c_next.data(), tanh_c.data(), h.raw());
    c.swap(c_next);
  }
  return h;
}

LstmBackward lstm_backward(const Tensor& dh_final, const LstmCache& cache, const LstmParams& p) {
  p.check();
  const std::size_t L = cache.steps, D = cache.in_dim, H = cache.hidden;
  require(H == p.hidden() && D == p.in_dim(), "lstm backward: cache does not match params");
  require(L >= 1, "lstm backward: empty cache");
  require(dh_final.size() == H, "lstm backward: dh_final size mismatch");
  const std::size_t G = kNumGates * H;

  const auto rt = stacked_recurrent_transpose(p);
  std::vector<double> drt(H * G, 0.0);  // gradient of the transposed stack
  std::vector<double> dw(G * D, 0.0);   // [gate*H + i, d]
  std::vector<double> db(G, 0.0);
  std::vector<double> dh(dh_final.data().begin(), dh_final.data().end());
  std::vector<double> dc(H, 0.0);
  std::vector<double> dz(G);
  LstmBackward out;
  out.dseq = Tensor({L, D});

  for (std::size_t t = L; t-- > 0;) {
    const double* a = cache.gates.data() + t * G;
    const double* ai = a;
    const double* af = a + H;
    const double* ag = a + 2 * H;
    const double* ao = a + 3 * H;
    const double* c_prev = cache.cells.data() + t * H;
    const double* tc = cache.tanh_c.data() + t * H;
    const double* h_prev = cache.hiddens.data() + t * H;
    const double* x = cache.inputs.data() + t * D;
    for (std::size_t i = 0; i < H; ++i) {
      const double dct = dc[i] + dh[i] * ao[i] * (1.0 - tc[i] * tc[i]);
      dz[3 * H + i] = dh[i] * tc[i] * ao[i] * (1.0 - ao[i]);
      dz[i] = dct * ag[i] * ai[i] * (1.0 - ai[i]);
      dz[H + i] = dct * c_prev[i] * af[i] * (1.0 - af[i]);
      dz[2 * H + i] = dct * ai[i] * (1.0 - ag[i] * ag[i]);
      dc[i] = dct * af[i];
    }
    for (std::size_t k = 0; k < G; ++k) {
      db[k] += dz[k];
      for (std::size_t d = 0; d < D; ++d) dw[k * D + d] += dz[k] * x[d];
    }
    for (std::size_t j = 0; j < H; ++j) {
      const double hj = h_prev[j];
      double* row = drt.data() + j * G;
      for (std::size_t k = 0; k < G; ++k) row[k] += dz[k] * hj;
    }
    for (std::size_t j = 0; j < H; ++j) dh[j] = dot(rt.data() + j * G, dz.data(), G);
    for (std::size_t d = 0; d < D; ++d) {
      double acc = 0.0;
      for (std::size_t g = 0; g < kNumGates; ++g)
        for (std::size_t i = 0; i < H; ++i) acc += p.input_weights[g].at(i, d) * dz[g * H + i];
      out.dseq.at(t, d) = acc;
    }
  }

  for (std::size_t g = 0; g < kNumGates; ++g) {
    out.grads.input_weights[g] = Tensor({H, D});
    out.grads.recurrent_weights[g] = Tensor({H, H});
    out.grads.bias[g] = Tensor({H});
    for (std::size_t i = 0; i < H; ++i) {
      out.grads.bias[g][i] = db[g * H + i];
      for (std::size_t d = 0; d < D; ++d)
        out.grads.input_weights[g].at(i, d) = dw[(g * H + i) * D + d];
      for (std::size_t j = 0; j < H; ++j)
        out.grads.recurrent_weights[g].at(i, j) = drt[j * G + g * H + i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Tensor softmax(const Tensor& logits) {
  require(logits.size() >= 1, "softmax: empty logits");
  if (!logits.all_finite()) throw NumericError("softmax: non-finite logits");
  const double m = *std::max_element(logits.data().begin(), logits.data().end());
  Tensor probs({logits.size()});
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - m);
    sum += probs[i];
  }
  for (auto& v : probs.data()) v /= sum;
  return probs;
}

LossResult softmax_cross_entropy(const Tensor& logits, ClassLabel label) {
  const std::size_t y = class_index(label);
  require(logits.size() >= 2 && y < logits.size(), "softmax cross-entropy: label out of range");
  if (!logits.all_finite()) throw NumericError("softmax cross-entropy: non-finite logits");
  const double m = *std::max_element(logits.data().begin(), logits.data().end());
  double sum = 0.0;
  for (const double v : logits.data()) sum += std::exp(v - m);
  const double log_sum = std::log(sum);

  LossResult out;
  out.loss = -(logits[y] - m - log_sum);
  out.probs = Tensor({logits.size()});
  for (std::size_t i = 0; i < logits.size(); ++i) out.probs[i] = std::exp(logits[i] - m - log_sum);
  out.dlogits = out.probs;
  out.dlogits[y] -= 1.0;
  return out;
}

// ---------------------------------------------------------------------------

OptimizerState OptimizerState::sgd(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::Sgd;
  s.learning_rate = learning_rate;
  return s;
}

OptimizerState OptimizerState::adam(double learning_rate) {
  OptimizerState s;
  s.kind = OptimizerKind::Adam;
  s.learning_rate = learning_rate;
  return s;
}

void optimizer_step(const ParamRefs& params, const Gradients& grads, OptimizerState& state) {
  require(params.size() == grads.size(), "optimizer: parameter and gradient counts differ");
  for (std::size_t n = 0; n < params.size(); ++n)
    require(params[n].get().shape() == grads[n].shape(),
            "optimizer: gradient " + std::to_string(n) + " has shape " + grads[n].shape_string() +
                ", parameter has " + params[n].get().shape_string());

  if (state.kind == OptimizerKind::Sgd) {
    for (std::size_t n = 0; n < params.size(); ++n) {
      Tensor& p = params[n];
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= state.learning_rate * grads[n][i];
    }
    ++state.step;
    return;
  }

  if (state.first_moment.empty()) {
    for (const Tensor& p : params) {
      state.first_moment.push_back(p.zeros_like());
      state.second_moment.push_back(p.zeros_like());
    }
  }
  require(state.first_moment.size() == params.size(), "optimizer: state does not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t n = 0; n < params.size(); ++n) {
    Tensor& p = params[n];
    Tensor& m = state.first_moment[n];
    Tensor& v = state.second_moment[n];
    require(m.shape() == p.shape(), "optimizer: moment shape mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grads[n][i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------

void glorot_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  uniform_fill(t, -bound, bound, rng);
}

void uniform_fill(Tensor& t, double lo, double hi, Rng& rng) {
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
}

GradCheckResult grad_check(const std::function<double()>& loss, const ParamRefs& params,
                           const Gradients& analytic, Rng& rng, double eps,
                           std::size_t max_coords) {
  require(params.size() == analytic.size(), "grad_check: parameter and gradient counts differ");
  GradCheckResult result;
  for (std::size_t n = 0; n < params.size(); ++n) {
    Tensor& p = params[n];
    require(p.shape() == analytic[n].shape(), "grad_check: gradient shape mismatch");
    std::vector<std::size_t> coords(p.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > max_coords) {
      // Partial Fisher-Yates: the first max_coords entries become the sample.
      for (std::size_t i = 0; i < max_coords; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(coords.size() - i));
        std::swap(coords[i], coords[j]);
      }
      coords.resize(max_coords);
      std::sort(coords.begin(), coords.end());
    }
    double worst = 0.0;
    for (const auto i : coords) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double plus = loss();
      p[i] = saved - eps;
      const double minus = loss();
      p[i] = saved;
      if (!std::isfinite(plus) || !std::isfinite(minus))
        throw NumericError("grad_check: non-finite loss");
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic[n][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    result.per_tensor.push_back(worst);
    result.max_error = std::max(result.max_error, worst);
  }
  return result;
}

}  // namespace pcc
