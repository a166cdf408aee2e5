#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace ivl {

using Shape = std::vector<int64_t>;

inline int64_t numel(const Shape& s) {
  int64_t n = 1;
  for (int64_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

// Dense row-major tensor. Plain value type; shape is carried alongside the
// data and interpreted by the operation using it.
template <typename T>
struct Tensor {
  Shape shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(Shape s) : shape(std::move(s)), data(size_t(numel(shape)), T(0)) {}
  Tensor(Shape s, std::vector<T> d) : shape(std::move(s)), data(std::move(d)) {
    IVL_CHECK(int64_t(data.size()) == numel(shape), "tensor data length %zu does not match shape %s",
              data.size(), shape_str(shape).c_str());
  }

  int64_t size() const { return int64_t(data.size()); }
  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& operator[](int64_t i) { return data[size_t(i)]; }
  const T& operator[](int64_t i) const { return data[size_t(i)]; }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool finite() const {
    for (T v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.resize(data.size());
    for (size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
    return out;
  }

  bool same_bits(const Tensor<T>& o) const {
    if (shape != o.shape) return false;
    return __builtin_memcmp(data.data(), o.data.data(), data.size() * sizeof(T)) == 0;
  }
};

template <typename T>
Tensor<T> uniform_tensor(Shape s, Rng& rng, double lo, double hi) {
  Tensor<T> t(std::move(s));
  for (auto& v : t.data) v = T(rng.uniform(lo, hi));
  return t;
}

template <typename T>
Tensor<T> normal_tensor(Shape s, Rng& rng, double stddev = 1.0) {
  Tensor<T> t(std::move(s));
  for (auto& v : t.data) v = T(rng.normal() * stddev);
  return t;
}

}  // namespace ivl
