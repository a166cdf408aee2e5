#pragma once

#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ivl/autodiff.hpp"
#include "ivl/rng.hpp"
#include "ivl/tensor.hpp"

namespace ivltest {

// Fresh directory under the build tree for file-format tests.
inline std::string tmpdir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("ivlab-tests-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

// ---------------------------------------------------------------------------
// finite-difference oracle
//
// Builds the graph twice per probed element (central differences, h = 1e-5,
// f64) and compares against the analytic reverse-mode gradient. The builder
// receives leaves for the given inputs and returns a scalar loss.
// ---------------------------------------------------------------------------

using BuildFn =
    std::function<ivl::ad::Var(ivl::ad::Tape<double>&, const std::vector<ivl::ad::Var>&)>;

struct GradCheckResult {
  double max_rel_err = 0;
  int checked = 0;
};

inline double eval_loss(const BuildFn& build, const std::vector<ivl::Tensor<double>>& inputs) {
  ivl::ad::Tape<double> tape;
  std::vector<ivl::ad::Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t, false));
  return tape.val(build(tape, leaves))[0];
}

// Checks every element of every input unless stride > 1 (then a deterministic
// subsample). rel err = |a - f| / max(|a|, |f|), with tiny pairs passing.
inline GradCheckResult grad_check(const BuildFn& build, std::vector<ivl::Tensor<double>> inputs,
                                  int64_t stride = 1, double h = 1e-5) {
  ivl::ad::Tape<double> tape;
  std::vector<ivl::ad::Var> leaves;
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t, true));
  ivl::ad::Var loss = build(tape, leaves);
  tape.backward(loss);

  GradCheckResult res;
  for (size_t which = 0; which < inputs.size(); ++which) {
    const ivl::Tensor<double> analytic =
        tape.grad_touched(leaves[which]) ? tape.grad(leaves[which])
                                         : ivl::Tensor<double>(inputs[which].shape);
    for (int64_t i = 0; i < inputs[which].size(); i += stride) {
      const double orig = inputs[which][i];
      inputs[which][i] = orig + h;
      const double up = eval_loss(build, inputs);
      inputs[which][i] = orig - h;
      const double dn = eval_loss(build, inputs);
      inputs[which][i] = orig;
      const double fd = (up - dn) / (2 * h);
      const double an = analytic[i];
      ++res.checked;
      if (std::abs(an) < 1e-8 && std::abs(fd) < 1e-8) continue;
      const double rel = std::abs(an - fd) / std::max(std::abs(an), std::abs(fd));
      res.max_rel_err = std::max(res.max_rel_err, rel);
    }
  }
  return res;
}

}  // namespace ivltest
