#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "sqnz/errors.hpp"

namespace sqnz {

// Dense row-major tensor. float is the working precision; double is used for
// gradient checks.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s, T fill = T{0}) : shape(std::move(s)) {
    data.assign(element_count(shape), fill);
  }

  static Tensor from(std::vector<std::size_t> s, std::vector<T> values) {
    if (values.size() != element_count(s))
      throw dimension_error("tensor data length does not match shape");
    Tensor t;
    t.shape = std::move(s);
    t.data = std::move(values);
    return t;
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  T& at2(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  const T& at2(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

  T& at3(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  const T& at3(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

template <typename T>
bool all_finite(const Tensor<T>& t) {
  for (T v : t.data)
    if (!std::isfinite(static_cast<double>(v))) return false;
  return true;
}

template <typename T>
std::size_t count_zeros(const Tensor<T>& t) {
  std::size_t n = 0;
  for (T v : t.data) n += (v == T{0});
  return n;
}

}  // namespace sqnz
