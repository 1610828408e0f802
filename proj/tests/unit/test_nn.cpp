#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.h"
#include "pcc/error.h"
#include "pcc/nn.h"

using namespace pcc;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  uniform_fill(t, lo, hi, rng);
  return t;
}

// Values bounded away from zero, so ReLU and max-pool kinks are not hit.
Tensor kink_free_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) {
    const double m = rng.uniform(0.05, 1.0);
    v = rng.uniform() < 0.5 ? -m : m;
  }
  return t;
}

double weighted_sum(const Tensor& y, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * r[i];
  return s;
}

Conv1dParams random_conv(std::size_t c_out, std::size_t c_in, std::size_t k, std::size_t stride, Rng& rng) {
  return {random_tensor({c_out, c_in, k}, rng), random_tensor({c_out}, rng), stride};
}

LstmParams random_lstm(std::size_t in_dim, std::size_t hidden, Rng& rng, double scale = 0.5) {
  LstmParams p = LstmParams::zeros(in_dim, hidden);
  for (std::size_t g = 0; g < kNumGates; ++g) {
    uniform_fill(p.input_weights[g], -scale, scale, rng);
    uniform_fill(p.recurrent_weights[g], -scale, scale, rng);
    uniform_fill(p.bias[g], -scale, scale, rng);
  }
  return p;
}

oracle::LstmWeights to_oracle(const LstmParams& p) {
  oracle::LstmWeights w;
  const std::size_t H = p.hidden(), D = p.in_dim();
  w.W.assign(4, std::vector<std::vector<double>>(H, std::vector<double>(D)));
  w.U.assign(4, std::vector<std::vector<double>>(H, std::vector<double>(H)));
  w.b.assign(4, std::vector<double>(H));
  for (std::size_t g = 0; g < 4; ++g)
    for (std::size_t i = 0; i < H; ++i) {
      w.b[g][i] = p.bias[g][i];
      for (std::size_t d = 0; d < D; ++d) w.W[g][i][d] = p.input_weights[g].at(i, d);
      for (std::size_t j = 0; j < H; ++j) w.U[g][i][j] = p.recurrent_weights[g].at(i, j);
    }
  return w;
}

ParamRefs refs(LstmParams& p) {
  ParamRefs r;
  for (auto& t : p.input_weights) r.emplace_back(t);
  for (auto& t : p.recurrent_weights) r.emplace_back(t);
  for (auto& t : p.bias) r.emplace_back(t);
  return r;
}

Gradients flatten(const LstmGrads& g) {
  Gradients out;
  for (const auto& t : g.input_weights) out.push_back(t);
  for (const auto& t : g.recurrent_weights) out.push_back(t);
  for (const auto& t : g.bias) out.push_back(t);
  return out;
}

// Input-gradient check against the oracle's central differences.
double input_grad_error(const std::function<double(const Tensor&)>& loss, const Tensor& x,
                        const Tensor& analytic) {
  const auto numeric = oracle::central_differences(
      [&](const std::vector<double>& v) { return loss(Tensor(x.shape(), v)); },
      std::vector<double>(x.data().begin(), x.data().end()), 1e-4);
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    worst = std::max(worst, oracle::rel_err(analytic[i], numeric[i]));
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------

TEST_CASE("conv1d_forward examples") {
  const Tensor x({1, 4}, {1, 2, 3, 4});
  Conv1dParams identity{Tensor({1, 1, 1}, {1.0}), Tensor({1}), 1};
  CHECK(conv1d_forward(x, identity).data()[0] == 1.0);
  CHECK(conv1d_forward(x, identity).identical(Tensor({1, 4}, {1, 2, 3, 4})));

  Conv1dParams edge{Tensor({1, 1, 3}, {1, 0, -1}), Tensor({1}), 1};
  CHECK(conv1d_forward(x, edge).identical(Tensor({1, 2}, {-2, -2})));

  Rng rng(1);
  const auto y = conv1d_forward(random_tensor({2, 7}, rng), random_conv(3, 2, 3, 2, rng));
  CHECK(y.shape() == std::vector<std::size_t>{3, 3});
}

TEST_CASE("conv1d_forward errors") {
  Rng rng(1);
  CHECK_THROWS_AS(conv1d_forward(Tensor({1, 2}), random_conv(1, 1, 3, 1, rng)), ShapeError);
  CHECK_THROWS_AS(conv1d_forward(Tensor({2, 8}), random_conv(1, 1, 3, 1, rng)), ShapeError);
}

TEST_CASE("conv1d_backward examples") {
  Rng rng(5);
  const Tensor x = random_tensor({2, 9}, rng);
  const auto p = random_conv(3, 2, 4, 2, rng);
  const Tensor dy({3, 3});
  const auto zero = conv1d_backward(dy, x, p);
  for (const double v : zero.dx.data()) CHECK(v == 0.0);
  for (const double v : zero.grads.weights.data()) CHECK(v == 0.0);
  for (const double v : zero.grads.bias.data()) CHECK(v == 0.0);

  Conv1dParams identity{Tensor({1, 1, 1}, {1.0}), Tensor({1}), 1};
  const Tensor dy1 = random_tensor({1, 6}, rng);
  CHECK(conv1d_backward(dy1, random_tensor({1, 6}, rng), identity).dx.identical(dy1));

  CHECK_THROWS_AS(conv1d_backward(Tensor({3, 4}), x, p), ShapeError);
}

TEST_CASE("conv1d_backward matches finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(5), stride = 1 + rng.below(3);
    const std::size_t len = k + rng.below(12);
    Tensor x = random_tensor({c_in, len}, rng);
    auto p = random_conv(c_out, c_in, k, stride, rng);
    const Tensor r = random_tensor(conv1d_forward(x, p).shape(), rng);
    const auto back = conv1d_backward(r, x, p);

    auto loss = [&] { return weighted_sum(conv1d_forward(x, p), r); };
    const auto check = grad_check(loss, {p.weights, p.bias}, {back.grads.weights, back.grads.bias}, rng);
    CHECK(check.max_error < 1e-5);
    CHECK(input_grad_error([&](const Tensor& xv) { return weighted_sum(conv1d_forward(xv, p), r); }, x,
                           back.dx) < 1e-5);
  }
}

TEST_CASE("conv1d_forward matches the brute-force oracle") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(6), stride = 1 + rng.below(4);
    const std::size_t len = k + rng.below(20);
    const Tensor x = random_tensor({c_in, len}, rng);
    const auto p = random_conv(c_out, c_in, k, stride, rng);
    std::vector<std::vector<double>> xo(c_in, std::vector<double>(len));
    std::vector<std::vector<std::vector<double>>> wo(c_out, std::vector<std::vector<double>>(c_in, std::vector<double>(k)));
    std::vector<double> bo(c_out);
    for (std::size_t c = 0; c < c_in; ++c)
      for (std::size_t t = 0; t < len; ++t) xo[c][t] = x.at(c, t);
    for (std::size_t o = 0; o < c_out; ++o) {
      bo[o] = p.bias[o];
      for (std::size_t c = 0; c < c_in; ++c)
        for (std::size_t j = 0; j < k; ++j) wo[o][c][j] = p.weights.at(o, c, j);
    }
    const auto expected = oracle::conv1d(xo, wo, bo, stride);
    const auto y = conv1d_forward(x, p);
    REQUIRE(y.dim(1) == expected[0].size());
    for (std::size_t o = 0; o < c_out; ++o)
      for (std::size_t t = 0; t < y.dim(1); ++t) CHECK(std::abs(y.at(o, t) - expected[o][t]) <= 1e-12);
  }
}

TEST_CASE("forward output shapes follow their formulas") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t c_in = 1 + rng.below(3), c_out = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(8), stride = 1 + rng.below(5);
    const std::size_t len = k + rng.below(40);
    const auto y = conv1d_forward(random_tensor({c_in, len}, rng), random_conv(c_out, c_in, k, stride, rng));
    CHECK(y.shape() == std::vector<std::size_t>{c_out, (len - k) / stride + 1});

    const std::size_t window = 1 + rng.below(len), pstride = 1 + rng.below(4);
    const auto pooled = maxpool1d_forward(random_tensor({c_in, len}, rng), window, pstride);
    CHECK(pooled.output.shape() == std::vector<std::size_t>{c_in, (len - window) / pstride + 1});

    const std::size_t in = 1 + rng.below(20), out = 1 + rng.below(5);
    DenseParams d{random_tensor({out, in}, rng), random_tensor({out}, rng)};
    CHECK(dense_forward(random_tensor({in}, rng), d).shape() == std::vector<std::size_t>{out});

    const std::size_t steps = 1 + rng.below(6), hidden = 1 + rng.below(4);
    CHECK(lstm_forward(random_tensor({steps, in}, rng), random_lstm(in, hidden, rng)).h_final.shape() ==
          std::vector<std::size_t>{hidden});
  }
}

TEST_CASE("conv1d and dense forwards are affine in the input") {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_conv(3, 2, 3, 2, rng);
    const Tensor x = random_tensor({2, 11}, rng), y = random_tensor({2, 11}, rng);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    Tensor mix({2, 11});
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto fm = conv1d_forward(mix, p), fx = conv1d_forward(x, p), fy = conv1d_forward(y, p);
    for (std::size_t o = 0; o < fm.dim(0); ++o)
      for (std::size_t t = 0; t < fm.dim(1); ++t)
        CHECK(std::abs(fm.at(o, t) - (a * fx.at(o, t) + b * fy.at(o, t) - (a + b - 1) * p.bias[o])) <= 1e-12);

    DenseParams d{random_tensor({2, 5}, rng), random_tensor({2}, rng)};
    const Tensor u = random_tensor({5}, rng), v = random_tensor({5}, rng);
    Tensor uv({5});
    for (std::size_t i = 0; i < 5; ++i) uv[i] = a * u[i] + b * v[i];
    const auto dm = dense_forward(uv, d), du = dense_forward(u, d), dv = dense_forward(v, d);
    for (std::size_t o = 0; o < 2; ++o)
      CHECK(std::abs(dm[o] - (a * du[o] + b * dv[o] - (a + b - 1) * d.bias[o])) <= 1e-12);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("relu forward and backward") {
  CHECK(relu(Tensor::vector({-1, 0, 2})).identical(Tensor::vector({0, 0, 2})));
  CHECK(relu_backward(Tensor::vector({5, 5}), Tensor::vector({-1, 2})).identical(Tensor::vector({0, 5})));

  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = kink_free_tensor({3, 7}, rng);
    const Tensor r = random_tensor({3, 7}, rng);
    const Tensor dx = relu_backward(r, x);
    CHECK(input_grad_error([&](const Tensor& xv) { return weighted_sum(relu(xv), r); }, x, dx) < 1e-5);
  }
}

TEST_CASE("maxpool1d forward, ties and backward") {
  const auto pooled = maxpool1d_forward(Tensor({1, 4}, {1, 3, 2, 0}), 2, 2);
  CHECK(pooled.output.identical(Tensor({1, 2}, {3, 2})));
  CHECK(pooled.cache.winners == std::vector<std::size_t>{1, 2});
  CHECK(maxpool1d_backward(Tensor({1, 2}, {1, 1}), pooled.cache).identical(Tensor({1, 4}, {0, 1, 1, 0})));

  const auto flat = maxpool1d_forward(Tensor({1, 6}, 2.5), 3, 3);
  CHECK(flat.cache.winners == std::vector<std::size_t>{0, 3});

  CHECK_THROWS_AS(maxpool1d_forward(Tensor({1, 2}), 3, 1), ShapeError);

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    // Distinct values spaced by at least 1e-2 keep every window's winner stable.
    std::vector<double> values(2 * 12);
    std::iota(values.begin(), values.end(), 0.0);
    rng.shuffle(values);
    Tensor x({2, 12});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = values[i] * 0.01;
    const auto fwd = maxpool1d_forward(x, 3, 2);
    const Tensor r = random_tensor(fwd.output.shape(), rng);
    const Tensor dx = maxpool1d_backward(r, fwd.cache);
    CHECK(input_grad_error([&](const Tensor& xv) { return weighted_sum(maxpool1d_forward(xv, 3, 2).output, r); },
                           x, dx) < 1e-5);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("dense forward examples and gradients") {
  DenseParams eye{Tensor({2, 2}, {1, 0, 0, 1}), Tensor({2})};
  CHECK(dense_forward(Tensor::vector({3, -4}), eye).identical(Tensor::vector({3, -4})));
  DenseParams sum{Tensor({1, 2}, {1, 1}), Tensor::vector({0.5})};
  CHECK(dense_forward(Tensor::vector({2, 3}), sum).identical(Tensor::vector({5.5})));
  CHECK_THROWS_AS(dense_forward(Tensor::vector({1, 2, 3}), sum), ShapeError);

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    DenseParams d{random_tensor({3, 6}, rng), random_tensor({3}, rng)};
    const Tensor x = random_tensor({2, 3}, rng);  // read flat
    const Tensor r = random_tensor({3}, rng);
    const auto back = dense_backward(r, x, d);
    CHECK(back.dx.shape() == x.shape());
    auto loss = [&] { return weighted_sum(dense_forward(x, d), r); };
    CHECK(grad_check(loss, {d.weights, d.bias}, {back.grads.weights, back.grads.bias}, rng).max_error < 1e-5);
    CHECK(input_grad_error([&](const Tensor& xv) { return weighted_sum(dense_forward(xv, d), r); }, x, back.dx) <
          1e-5);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("lstm_step examples") {
  const LstmParams zeros = LstmParams::zeros(2, 3);
  const auto s0 = lstm_step(Tensor::vector({0.7, -1.2}), Tensor({3}), Tensor({3}), zeros);
  for (const double v : s0.h.data()) CHECK(v == 0.0);
  for (const double v : s0.c.data()) CHECK(v == 0.0);

  const LstmParams scalar = LstmParams::zeros(1, 1);
  const auto s1 = lstm_step(Tensor::vector({0.3}), Tensor::vector({0.0}), Tensor::vector({1.0}), scalar);
  CHECK(s1.c[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s1.h[0] == doctest::Approx(0.5 * std::tanh(0.5)).epsilon(1e-15));
  CHECK(s1.h[0] == doctest::Approx(0.231059).epsilon(1e-6));

  Rng rng(3);
  LstmParams p = random_lstm(2, 3, rng);
  p.bias[kForgetGate].fill(50.0);
  const Tensor c_prev = random_tensor({3}, rng);
  const auto s2 = lstm_step(random_tensor({2}, rng), random_tensor({3}, rng), c_prev, p);
  for (std::size_t i = 0; i < 3; ++i) {
    const double expected = c_prev[i] + s2.cache.gates[kInputGate][i] * s2.cache.gates[kCellGate][i];
    CHECK(std::abs(s2.c[i] - expected) <= 1e-9);
  }

  CHECK_THROWS_AS(lstm_step(Tensor::vector({1, 2, 3}), Tensor({3}), Tensor({3}), zeros), ShapeError);
}

TEST_CASE("lstm_forward with one step reduces to lstm_step") {
  Rng rng(41);
  const auto p = random_lstm(2, 4, rng);
  const Tensor x = random_tensor({1, 2}, rng);
  const auto fwd = lstm_forward(x, p);
  const auto step = lstm_step(Tensor::vector({x[0], x[1]}), Tensor({4}), Tensor({4}), p);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(fwd.h_final[i] - step.h[i]) <= 1e-15);
}

TEST_CASE("lstm_forward matches the step-by-step oracle") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t steps = 1 + rng.below(8), in = 1 + rng.below(3), hidden = 1 + rng.below(5);
    const auto p = random_lstm(in, hidden, rng, 1.0);
    const Tensor seq = random_tensor({steps, in}, rng);
    std::vector<std::vector<double>> s(steps, std::vector<double>(in));
    for (std::size_t t = 0; t < steps; ++t)
      for (std::size_t d = 0; d < in; ++d) s[t][d] = seq.at(t, d);
    const auto expected = oracle::lstm_final_h(s, to_oracle(p));
    const auto h = lstm_forward(seq, p).h_final;
    const auto h_fast = lstm_final_state(seq, p);
    for (std::size_t i = 0; i < hidden; ++i) {
      CHECK(std::abs(h[i] - expected[i]) <= 1e-12);
      CHECK(h_fast[i] == h[i]);
    }
  }
}

TEST_CASE("lstm_backward matches finite differences") {
  Rng rng(202);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t steps = 5, hidden = 3, in = 1 + rng.below(2);
    auto p = random_lstm(in, hidden, rng);
    const Tensor seq = random_tensor({steps, in}, rng);
    const Tensor r = random_tensor({hidden}, rng);
    const auto fwd = lstm_forward(seq, p);
    const auto back = lstm_backward(r, fwd.cache, p);
    auto loss = [&] { return weighted_sum(lstm_final_state(seq, p), r); };
    CHECK(grad_check(loss, refs(p), flatten(back.grads), rng).max_error < 1e-5);
    CHECK(input_grad_error([&](const Tensor& sv) { return weighted_sum(lstm_final_state(sv, p), r); }, seq,
                           back.dseq) < 1e-5);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("softmax_cross_entropy examples") {
  const auto even = softmax_cross_entropy(Tensor::vector({0, 0}), ClassLabel::WhQuestion);
  CHECK(even.loss == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(even.probs[0] == 0.5);
  CHECK(even.probs[1] == 0.5);

  const auto big = softmax_cross_entropy(Tensor::vector({1000, 0}), ClassLabel::Statement);
  CHECK(std::isfinite(big.loss));
  CHECK(big.loss < 1e-300);
  CHECK(big.probs.all_finite());

  CHECK_THROWS_AS(softmax_cross_entropy(Tensor::vector({NAN, 0}), ClassLabel::Statement), NumericError);
}

TEST_CASE("softmax_cross_entropy gradient and invariants") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor logits = random_tensor({2}, rng, -5, 5);
    const auto label = label_from_index(rng.below(2));
    const auto res = softmax_cross_entropy(logits, label);
    const auto numeric = oracle::central_differences(
        [&](const std::vector<double>& v) { return softmax_cross_entropy(Tensor({2}, v), label).loss; },
        {logits[0], logits[1]}, 1e-5);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(res.dlogits[i] - numeric[i]) <= 1e-7);

    CHECK(res.probs[0] > 0.0);
    CHECK(res.probs[0] < 1.0);
    CHECK(std::abs(res.probs[0] + res.probs[1] - 1.0) <= 1e-12);
    const double shift = rng.uniform(-100, 100);
    const auto shifted = softmax_cross_entropy(Tensor::vector({logits[0] + shift, logits[1] + shift}), label);
    CHECK(std::abs(shifted.loss - res.loss) <= 1e-9);
  }
}

// ---------------------------------------------------------------------------

TEST_CASE("optimizer steps") {
  Tensor theta = Tensor::vector({1.0});
  auto sgd = OptimizerState::sgd(0.1);
  optimizer_step({theta}, {Tensor::vector({2.0})}, sgd);
  CHECK(theta[0] == doctest::Approx(0.8).epsilon(1e-15));

  for (const double g : {3.0, -0.02, 1e-3}) {
    Tensor t = Tensor::vector({0.25});
    auto adam = OptimizerState::adam(0.01);
    optimizer_step({t}, {Tensor::vector({g})}, adam);
    const double delta = std::abs(t[0] - 0.25);
    CHECK(delta <= 0.01);
    CHECK(std::abs(delta - 0.01) <= 1e-6);
    CHECK(adam.step == 1);
  }

  Tensor w = Tensor::vector({0.3, -0.7});
  auto adam = OptimizerState::adam(0.1);
  for (int i = 0; i < 3; ++i) optimizer_step({w}, {Tensor({2})}, adam);
  CHECK(w.identical(Tensor::vector({0.3, -0.7})));
  auto sgd2 = OptimizerState::sgd(0.1);
  optimizer_step({w}, {Tensor({2})}, sgd2);
  CHECK(w.identical(Tensor::vector({0.3, -0.7})));

  CHECK_THROWS_AS(optimizer_step({w}, {Tensor({3})}, sgd2), ShapeError);
}

// ---------------------------------------------------------------------------

TEST_CASE("grad_check on a dense-only model and with an injected fault") {
  Rng rng(55);
  DenseParams d{random_tensor({2, 8}, rng), random_tensor({2}, rng)};
  const Tensor x = random_tensor({8}, rng);
  auto loss = [&] { return softmax_cross_entropy(dense_forward(x, d), ClassLabel::WhQuestion).loss; };
  const auto res = softmax_cross_entropy(dense_forward(x, d), ClassLabel::WhQuestion);
  auto back = dense_backward(res.dlogits, x, d);
  CHECK(grad_check(loss, {d.weights, d.bias}, {back.grads.weights, back.grads.bias}, rng).max_error < 1e-6);

  back.grads.weights[3] += 0.01;
  const auto bad = grad_check(loss, {d.weights, d.bias}, {back.grads.weights, back.grads.bias}, rng);
  CHECK(bad.max_error > 1e-3);
  CHECK(bad.per_tensor[0] > 1e-3);
  CHECK(bad.per_tensor[1] < 1e-6);
}

TEST_CASE("grad_check samples at most max_coords coordinates") {
  Rng rng(1);
  Tensor big({50, 50});
  int calls = 0;
  auto loss = [&] {
    ++calls;
    return 0.0;
  };
  grad_check(loss, {big}, {big.zeros_like()}, rng, 1e-4, 200);
  CHECK(calls == 400);
  CHECK_THROWS_AS(grad_check([] { return NAN; }, {big}, {big.zeros_like()}, rng), NumericError);
}

TEST_CASE("engine operations are pure") {
  Rng rng(606);
  const auto p = random_conv(2, 1, 4, 2, rng);
  const Tensor x = random_tensor({1, 17}, rng);
  CHECK(conv1d_forward(x, p).identical(conv1d_forward(x, p)));
  const auto lp = random_lstm(1, 4, rng);
  const Tensor seq = random_tensor({9, 1}, rng);
  const auto a = lstm_forward(seq, lp), b = lstm_forward(seq, lp);
  CHECK(a.h_final.identical(b.h_final));
  const Tensor r = random_tensor({4}, rng);
  const auto ga = lstm_backward(r, a.cache, lp), gb = lstm_backward(r, b.cache, lp);
  for (std::size_t g = 0; g < kNumGates; ++g) CHECK(ga.grads.recurrent_weights[g].identical(gb.grads.recurrent_weights[g]));
}
