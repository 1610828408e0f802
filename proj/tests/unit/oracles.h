#pragma once

// Independent reference computations used only by the tests. None of these
// call into the engine code they are compared against.

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "pcc/rng.h"

namespace pcc::oracle {

// y[o][t] = b[o] + sum_c sum_k w[o][c][k] * x[c][t*stride + k], straight loops.
inline std::vector<std::vector<double>> conv1d(const std::vector<std::vector<double>>& x,
                                               const std::vector<std::vector<std::vector<double>>>& w,
                                               const std::vector<double>& b, std::size_t stride) {
  const std::size_t L = x[0].size(), K = w[0][0].size();
  const std::size_t L_out = (L - K) / stride + 1;
  std::vector<std::vector<double>> y(w.size(), std::vector<double>(L_out));
  for (std::size_t o = 0; o < w.size(); ++o)
    for (std::size_t t = 0; t < L_out; ++t) {
      double acc = b[o];
      for (std::size_t c = 0; c < x.size(); ++c)
        for (std::size_t k = 0; k < K; ++k) acc += w[o][c][k] * x[c][t * stride + k];
      y[o][t] = acc;
    }
  return y;
}

struct LstmWeights {
  // [gate][i][d], [gate][i][j], [gate][i]; gates ordered i, f, g, o
  std::vector<std::vector<std::vector<double>>> W, U;
  std::vector<std::vector<double>> b;
};

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Runs the cell equations one step at a time and returns the final h.
inline std::vector<double> lstm_final_h(const std::vector<std::vector<double>>& seq,
                                        const LstmWeights& p) {
  const std::size_t H = p.b[0].size();
  std::vector<double> h(H, 0.0), c(H, 0.0);
  for (const auto& x : seq) {
    std::vector<double> hn(H), cn(H);
    for (std::size_t i = 0; i < H; ++i) {
      double z[4];
      for (int g = 0; g < 4; ++g) {
        z[g] = p.b[g][i];
        for (std::size_t d = 0; d < x.size(); ++d) z[g] += p.W[g][i][d] * x[d];
        for (std::size_t j = 0; j < H; ++j) z[g] += p.U[g][i][j] * h[j];
      }
      const double ig = logistic(z[0]), fg = logistic(z[1]), gg = std::tanh(z[2]), og = logistic(z[3]);
      cn[i] = fg * c[i] + ig * gg;
      hn[i] = og * std::tanh(cn[i]);
    }
    h = hn;
    c = cn;
  }
  return h;
}

// Ordinary least-squares slope of y against t.
inline double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double sty = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sty += (t[i] - mt) * (y[i] - my);
    stt += (t[i] - mt) * (t[i] - mt);
  }
  return sty / stt;
}

// Central difference of f at x along every coordinate.
inline std::vector<double> central_differences(const std::function<double(const std::vector<double>&)>& f,
                                               std::vector<double> x, double eps) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + eps;
    const double plus = f(x);
    x[i] = saved - eps;
    const double minus = f(x);
    x[i] = saved;
    g[i] = (plus - minus) / (2.0 * eps);
  }
  return g;
}

inline double rel_err(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / denom;
}

}  // namespace pcc::oracle
