#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"
#include "sqnz/tensor.hpp"

namespace sqnz {

enum class Padding { same_zero, valid };

inline std::size_t conv1d_out_length(std::size_t L, std::size_t K, Padding pad) {
  if (pad == Padding::same_zero) return L;
  if (K > L) throw dimension_error("conv1d: kernel longer than input");
  return L - K + 1;
}

// Cross-correlation, stride 1. input [C_in, L], weights [C_out, C_in, K],
// bias [C_out]. same_zero pads (K-1)/2 on the left.
template <typename T>
Tensor<T> conv1d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         Padding pad) {
  if (input.shape.size() != 2 || weights.shape.size() != 3 || bias.shape.size() != 1)
    throw dimension_error("conv1d: bad ranks");
  const std::size_t c_in = input.dim(0), L = input.dim(1);
  const std::size_t c_out = weights.dim(0), K = weights.dim(2);
  if (weights.dim(1) != c_in || bias.dim(0) != c_out)
    throw dimension_error("conv1d: shape mismatch");
  const std::size_t L_out = conv1d_out_length(L, K, pad);
  const std::ptrdiff_t left = (pad == Padding::same_zero) ? static_cast<std::ptrdiff_t>((K - 1) / 2) : 0;

  Tensor<T> out({c_out, L_out});
  for (std::size_t co = 0; co < c_out; ++co) {
    for (std::size_t t = 0; t < L_out; ++t) {
      T acc = bias[co];
      for (std::size_t ci = 0; ci < c_in; ++ci) {
        const T* w = &weights.data[(co * c_in + ci) * K];
        const T* x = &input.data[ci * L];
        for (std::size_t k = 0; k < K; ++k) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - left;
          if (s < 0 || s >= static_cast<std::ptrdiff_t>(L)) continue;
          acc += w[k] * x[s];
        }
      }
      out.at2(co, t) = acc;
    }
  }
  return out;
}

template <typename T>
struct ConvGrads {
  Tensor<T> d_weights, d_bias, d_input;
};

template <typename T>
ConvGrads<T> conv1d_backward(const Tensor<T>& input, const Tensor<T>& weights,
                             const Tensor<T>& d_out, Padding pad) {
  const std::size_t c_in = input.dim(0), L = input.dim(1);
  const std::size_t c_out = weights.dim(0), K = weights.dim(2);
  const std::size_t L_out = d_out.dim(1);
  const std::ptrdiff_t left = (pad == Padding::same_zero) ? static_cast<std::ptrdiff_t>((K - 1) / 2) : 0;

  ConvGrads<T> g{Tensor<T>(weights.shape), Tensor<T>({c_out}), Tensor<T>(input.shape)};
  for (std::size_t co = 0; co < c_out; ++co) {
    T db = 0;
    for (std::size_t t = 0; t < L_out; ++t) db += d_out.at2(co, t);
    g.d_bias[co] = db;
    for (std::size_t ci = 0; ci < c_in; ++ci) {
      T* dw = &g.d_weights.data[(co * c_in + ci) * K];
      T* dx = &g.d_input.data[ci * L];
      const T* x = &input.data[ci * L];
      const T* w = &weights.data[(co * c_in + ci) * K];
      for (std::size_t t = 0; t < L_out; ++t) {
        const T dy = d_out.at2(co, t);
        for (std::size_t k = 0; k < K; ++k) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + k) - left;
          if (s < 0 || s >= static_cast<std::ptrdiff_t>(L)) continue;
          dw[k] += dy * x[s];
          dx[s] += dy * w[k];
        }
      }
    }
  }
  return g;
}

template <typename T>
struct PoolResult {
  Tensor<T> out;                   // [C, floor(L/window)]
  std::vector<std::size_t> argmax;  // input position per output element
};

// Non-overlapping windows; tail remainder dropped; first maximum wins ties.
template <typename T>
PoolResult<T> maxpool1d_forward(const Tensor<T>& input, std::size_t window) {
  if (input.shape.size() != 2) throw dimension_error("maxpool1d: bad rank");
  if (window < 1) throw validation_error("maxpool1d: window must be >= 1");
  const std::size_t C = input.dim(0), L = input.dim(1);
  const std::size_t L_out = L / window;
  PoolResult<T> r{Tensor<T>({C, L_out}), std::vector<std::size_t>(C * L_out)};
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t t = 0; t < L_out; ++t) {
      std::size_t best = t * window;
      T best_v = input.at2(c, best);
      for (std::size_t k = 1; k < window; ++k) {
        const std::size_t s = t * window + k;
        if (input.at2(c, s) > best_v) {
          best_v = input.at2(c, s);
          best = s;
        }
      }
      r.out.at2(c, t) = best_v;
      r.argmax[c * L_out + t] = best;
    }
  }
  return r;
}

template <typename T>
Tensor<T> maxpool1d_backward(const std::vector<std::size_t>& argmax, std::size_t C, std::size_t L,
                             const Tensor<T>& d_out) {
  Tensor<T> dx({C, L});
  const std::size_t L_out = d_out.dim(1);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t t = 0; t < L_out; ++t) dx.at2(c, argmax[c * L_out + t]) += d_out.at2(c, t);
  return dx;
}

// out[u] = sum_d w[u,d] x[d] + b[u]
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& bias) {
  if (x.shape.size() != 1 || weights.shape.size() != 2 || bias.shape.size() != 1)
    throw dimension_error("dense: bad ranks");
  const std::size_t U = weights.dim(0), D = weights.dim(1);
  if (x.dim(0) != D || bias.dim(0) != U) throw dimension_error("dense: shape mismatch");
  Tensor<T> out({U});
  for (std::size_t u = 0; u < U; ++u) {
    T acc = bias[u];
    const T* w = &weights.data[u * D];
    for (std::size_t d = 0; d < D; ++d) acc += w[d] * x[d];
    out[u] = acc;
  }
  return out;
}

template <typename T>
struct DenseGrads {
  Tensor<T> d_weights, d_bias, d_input;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weights, const Tensor<T>& d_out) {
  const std::size_t U = weights.dim(0), D = weights.dim(1);
  DenseGrads<T> g{Tensor<T>(weights.shape), Tensor<T>({U}), Tensor<T>({D})};
  for (std::size_t u = 0; u < U; ++u) {
    const T dy = d_out[u];
    g.d_bias[u] = dy;
    const T* w = &weights.data[u * D];
    T* dw = &g.d_weights.data[u * D];
    for (std::size_t d = 0; d < D; ++d) {
      dw[d] = dy * x[d];
      g.d_input[d] += dy * w[d];
    }
  }
  return g;
}

enum class Activation { relu, softmax };

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out = x;
  for (auto& v : out.data) v = std::max(v, T{0});
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& pre, const Tensor<T>& d_out) {
  Tensor<T> dx = d_out;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (pre[i] <= T{0}) dx[i] = T{0};
  return dx;
}

// Max-subtracted exponent normalisation; rank-1 only.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  if (x.shape.size() != 1) throw dimension_error("softmax: rank-1 input required");
  Tensor<T> out = x;
  T mx = out[0];
  for (T v : out.data) mx = std::max(mx, v);
  T sum = 0;
  for (auto& v : out.data) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : out.data) v /= sum;
  return out;
}

template <typename T>
Tensor<T> activation(const Tensor<T>& x, Activation kind) {
  return kind == Activation::relu ? relu(x) : softmax(x);
}

// -ln(max(p[label], eps)), eps = 1e-12.
template <typename T>
T cross_entropy_loss(const Tensor<T>& probs, std::size_t label) {
  const double eps = 1e-12;
  const double p = std::max(static_cast<double>(probs[label]), eps);
  return static_cast<T>(-std::log(p));
}

}  // namespace sqnz
