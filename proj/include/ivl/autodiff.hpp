#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ivl/tensor.hpp"

namespace ivl::ad {

// Handle into a Tape. Only meaningful with the tape that produced it.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Per-batch reverse-mode tape. Append-only, so creation order is a
// topological order and backward() is a single reverse sweep. A tape is
// confined to one thread; the ops it records may parallelize internally.
template <typename T>
class Tape {
 public:
  Var leaf(Tensor<T> value, bool needs_grad = false) {
    return push(std::move(value), needs_grad, nullptr);
  }

  Var push(Tensor<T> value, bool needs_grad, std::function<void(Tape&)> backward) {
    nodes_.push_back(Node{std::move(value), Tensor<T>(), needs_grad, std::move(backward)});
    return Var{int32_t(nodes_.size()) - 1};
  }

  const Tensor<T>& val(Var v) const { return node(v).value; }

  bool wants_grad(Var v) const { return node(v).needs_grad; }

  // Gradient buffer, zero-allocated on first touch. Only nodes actually
  // reached during backward ever allocate one.
  Tensor<T>& grad(Var v) {
    Node& n = node(v);
    IVL_CHECK(n.needs_grad, "grad requested for a node that does not track gradients");
    if (n.grad.data.empty()) n.grad = Tensor<T>(n.value.shape);
    return n.grad;
  }

  bool grad_touched(Var v) const { return !node(v).grad.data.empty(); }

  // Reverse sweep from a scalar root.
  void backward(Var root) {
    Node& r = node(root);
    IVL_CHECK(r.value.size() == 1, "backward root must be scalar, got shape %s",
              shape_str(r.value.shape).c_str());
    IVL_CHECK(r.needs_grad, "backward root does not track gradients");
    grad(root)[0] = T(1);
    for (int32_t i = root.id; i >= 0; --i) {
      Node& n = nodes_[size_t(i)];
      if (n.backward && n.needs_grad && !n.grad.data.empty()) n.backward(*this);
    }
  }

  size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool needs_grad;
    std::function<void(Tape&)> backward;
  };

  Node& node(Var v) {
    IVL_CHECK(v.id >= 0 && size_t(v.id) < nodes_.size(), "invalid tape handle %d", v.id);
    return nodes_[size_t(v.id)];
  }
  const Node& node(Var v) const { return const_cast<Tape*>(this)->node(v); }

  std::vector<Node> nodes_;
};

// --- differentiable ops ---
// Shapes follow the comments; every op checks compatibility and reports both
// shapes on mismatch.

// x:[n,in] w:[in,out] b:[out] -> [n,out]
template <typename T> Var dense(Tape<T>& t, Var x, Var w, Var b);
// x:[n,ci,h,w] k:[co,ci,kh,kw] b:[co] -> [n,co,ho,wo]
template <typename T> Var conv2d(Tape<T>& t, Var x, Var k, Var b, int64_t stride, int64_t pad);
template <typename T> Var relu(Tape<T>& t, Var x);
template <typename T> Var sigmoid(Tape<T>& t, Var x);
template <typename T> Var reshape(Tape<T>& t, Var x, Shape shape);
// [n,c,h,w] -> [n,c,2h,2w], nearest neighbor
template <typename T> Var upsample2x(Tape<T>& t, Var x);
// z = mu + exp(logvar/2) * eps, elementwise; eps is injected (not sampled here)
template <typename T> Var reparameterize(Tape<T>& t, Var mu, Var logvar, Var eps);
// mean over rows of 0.5 * sum_d (mu^2 + exp(logvar) - 1 - logvar) -> scalar
template <typename T> Var kl_diag_gaussian(Tape<T>& t, Var mu, Var logvar);
// mean over rows of -sum_px [x log r + (1-x) log(1-r)], r clamped to
// [1e-7, 1-1e-7] before the logs -> scalar
template <typename T> Var bernoulli_ce(Tape<T>& t, Var recon, Var target);
// rows scaled to unit L2 norm; rows with norm < 1e-8 are an error
template <typename T> Var row_normalize(Tape<T>& t, Var x);
// img:[n,1,h,w] pose:[n,2] -> per-sample bilinear rotation, differentiable in
// both pixels and pose
template <typename T> Var rotate_posed(Tape<T>& t, Var img, Var pose);
// mean over rows of ||a_row - b_row||^2 -> scalar
template <typename T> Var squared_distance(Tape<T>& t, Var a, Var b);
// sum of all elements -> scalar
template <typename T> Var sum(Tape<T>& t, Var x);
template <typename T> Var add(Tape<T>& t, Var a, Var b);
template <typename T> Var mul(Tape<T>& t, Var a, Var b);
template <typename T> Var scale(Tape<T>& t, Var x, T k);

}  // namespace ivl::ad
