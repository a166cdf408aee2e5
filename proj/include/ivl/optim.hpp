#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivl/tensor.hpp"

namespace ivl::nn {

enum class Init { kZero, kGlorot, kConst, kUnitX };  // kUnitX: [1, 0, 0, ...]

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init = Init::kGlorot;
  double const_val = 0.0;     // for kConst
  double fan_in = 0, fan_out = 0;  // for kGlorot
};

// Ordered, uniquely named parameter tensors. Order is the serialization and
// optimizer-state order, so it is part of the checkpoint contract.
struct ParamSet {
  struct Entry {
    std::string name;
    Tensor<float> value;
  };
  std::vector<Entry> entries;

  void add(std::string name, Tensor<float> value);
  Tensor<float>& at(const std::string& name);
  const Tensor<float>& at(const std::string& name) const;
  int64_t index(const std::string& name) const;  // -1 when absent
  bool all_finite() const;
  int64_t total_elems() const;
  bool same_bits(const ParamSet& o) const;
};

ParamSet init_params(const std::vector<ParamSpec>& specs, uint64_t seed);

template <typename T>
struct AdamConfig {
  T lr = T(1e-3);
  T beta1 = T(0.9);
  T beta2 = T(0.999);
  T eps = T(1e-8);
};

// Adam with bias correction. m/v mirror the parameter list by position.
template <typename T>
struct AdamState {
  AdamConfig<T> cfg;
  std::vector<Tensor<T>> m, v;
  int64_t t = 0;

  void init(const std::vector<Shape>& shapes) {
    m.clear();
    v.clear();
    for (const auto& s : shapes) {
      m.emplace_back(s);
      v.emplace_back(s);
    }
    t = 0;
  }

  // One update over aligned (param, grad) pairs; names are used in
  // diagnostics only. A non-finite gradient aborts before any mutation.
  void step(std::vector<Tensor<T>*> params, std::vector<const Tensor<T>*> grads,
            const std::vector<std::string>& names);
};

// Convenience for the training loop: grads aligned with params.entries.
void adam_step(ParamSet& params, const std::vector<Tensor<float>>& grads, AdamState<float>& state);

extern template struct AdamState<float>;
extern template struct AdamState<double>;

}  // namespace ivl::nn
