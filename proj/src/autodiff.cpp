#include "ivl/autodiff.hpp"

#include <cmath>

#include "ivl/kernels.hpp"

namespace ivl::ad {

namespace {

template <typename T>
bool any_grad(Tape<T>& t, std::initializer_list<Var> vars) {
  for (Var v : vars)
    if (t.wants_grad(v)) return true;
  return false;
}

// id the next push() will assign; lets backward closures read their own grad
template <typename T>
Var next_var(const Tape<T>& t) {
  return Var{int32_t(t.num_nodes())};
}

}  // namespace

template <typename T>
Var dense(Tape<T>& t, Var x, Var w, Var b) {
  const Shape xs = t.val(x).shape, ws = t.val(w).shape, bs = t.val(b).shape;
  IVL_CHECK(xs.size() == 2 && ws.size() == 2 && xs[1] == ws[0], "dense shape mismatch: x %s vs w %s",
            shape_str(xs).c_str(), shape_str(ws).c_str());
  IVL_CHECK(bs.size() == 1 && bs[0] == ws[1], "dense bias %s does not match w %s",
            shape_str(bs).c_str(), shape_str(ws).c_str());
  const int64_t n = xs[0], in = xs[1], out = ws[1];
  Tensor<T> y({n, out});
  kernels::dense_fwd(t.val(x).ptr(), t.val(w).ptr(), t.val(b).ptr(), y.ptr(), n, in, out);
  if (!any_grad(t, {x, w, b})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T* g = tp.grad(self).ptr();
    if (tp.wants_grad(x)) kernels::dense_bwd_x(g, tp.val(w).ptr(), tp.grad(x).ptr(), n, in, out);
    if (tp.wants_grad(w)) kernels::dense_bwd_w(tp.val(x).ptr(), g, tp.grad(w).ptr(), n, in, out);
    if (tp.wants_grad(b)) kernels::dense_bwd_b(g, tp.grad(b).ptr(), n, out);
  });
}

template <typename T>
Var conv2d(Tape<T>& t, Var x, Var k, Var b, int64_t stride, int64_t pad) {
  const Shape xs = t.val(x).shape, ks = t.val(k).shape, bs = t.val(b).shape;
  IVL_CHECK(xs.size() == 4 && ks.size() == 4 && xs[1] == ks[1],
            "conv2d shape mismatch: x %s vs k %s", shape_str(xs).c_str(), shape_str(ks).c_str());
  IVL_CHECK(bs.size() == 1 && bs[0] == ks[0], "conv2d bias %s does not match k %s",
            shape_str(bs).c_str(), shape_str(ks).c_str());
  IVL_CHECK(stride >= 1 && pad >= 0, "conv2d invalid stride %lld / pad %lld", (long long)stride,
            (long long)pad);
  const int64_t n = xs[0], ci = xs[1], h = xs[2], w = xs[3];
  const int64_t co = ks[0], kh = ks[2], kw = ks[3];
  const int64_t ho = kernels::conv_out_dim(h, kh, stride, pad);
  const int64_t wo = kernels::conv_out_dim(w, kw, stride, pad);
  Tensor<T> y({n, co, ho, wo});
  kernels::conv2d_fwd(t.val(x).ptr(), t.val(k).ptr(), t.val(b).ptr(), y.ptr(), n, ci, h, w, co, kh, kw,
                      stride, pad);
  if (!any_grad(t, {x, k, b})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T* g = tp.grad(self).ptr();
    if (tp.wants_grad(x))
      kernels::conv2d_bwd_x(g, tp.val(k).ptr(), tp.grad(x).ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    if (tp.wants_grad(k))
      kernels::conv2d_bwd_k(tp.val(x).ptr(), g, tp.grad(k).ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    if (tp.wants_grad(b)) kernels::conv2d_bwd_b(g, tp.grad(b).ptr(), n, co, ho, wo);
  });
}

template <typename T>
Var relu(Tape<T>& t, Var x) {
  Tensor<T> y = t.val(x);
  for (auto& v : y.data) v = v > T(0) ? v : T(0);
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& xv = tp.val(x);
    Tensor<T>& gx = tp.grad(x);
    for (int64_t i = 0; i < g.size(); ++i)
      if (xv[i] > T(0)) gx[i] += g[i];
  });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var x) {
  Tensor<T> y = t.val(x);
  for (auto& v : y.data) {
    if (v >= T(0)) {
      v = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T(1) + e);
    }
  }
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& yv = tp.val(self);
    Tensor<T>& gx = tp.grad(x);
    for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yv[i] * (T(1) - yv[i]);
  });
}

template <typename T>
Var reshape(Tape<T>& t, Var x, Shape shape) {
  IVL_CHECK(numel(shape) == t.val(x).size(), "reshape %s -> %s changes element count",
            shape_str(t.val(x).shape).c_str(), shape_str(shape).c_str());
  Tensor<T> y;
  y.shape = shape;
  y.data = t.val(x).data;
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& gx = tp.grad(x);
    for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

template <typename T>
Var upsample2x(Tape<T>& t, Var x) {
  const Shape xs = t.val(x).shape;
  IVL_CHECK(xs.size() == 4, "upsample2x expects [n,c,h,w], got %s", shape_str(xs).c_str());
  const int64_t n = xs[0], c = xs[1], h = xs[2], w = xs[3];
  Tensor<T> y({n, c, 2 * h, 2 * w});
  kernels::upsample2x_fwd(t.val(x).ptr(), y.ptr(), n, c, h, w);
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    kernels::upsample2x_bwd(tp.grad(self).ptr(), tp.grad(x).ptr(), n, c, h, w);
  });
}

template <typename T>
Var reparameterize(Tape<T>& t, Var mu, Var logvar, Var eps) {
  const Shape ms = t.val(mu).shape;
  IVL_CHECK(ms == t.val(logvar).shape && ms == t.val(eps).shape,
            "reparameterize shape mismatch: mu %s logvar %s eps %s", shape_str(ms).c_str(),
            shape_str(t.val(logvar).shape).c_str(), shape_str(t.val(eps).shape).c_str());
  Tensor<T> z(ms);
  const Tensor<T>& m = t.val(mu);
  const Tensor<T>& lv = t.val(logvar);
  const Tensor<T>& e = t.val(eps);
  for (int64_t i = 0; i < z.size(); ++i) z[i] = m[i] + std::exp(lv[i] / T(2)) * e[i];
  if (!any_grad(t, {mu, logvar, eps})) return t.push(std::move(z), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(z), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& lvv = tp.val(logvar);
    const Tensor<T>& ev = tp.val(eps);
    if (tp.wants_grad(mu)) {
      Tensor<T>& gm = tp.grad(mu);
      for (int64_t i = 0; i < g.size(); ++i) gm[i] += g[i];
    }
    if (tp.wants_grad(logvar)) {
      Tensor<T>& glv = tp.grad(logvar);
      for (int64_t i = 0; i < g.size(); ++i)
        glv[i] += g[i] * ev[i] * std::exp(lvv[i] / T(2)) / T(2);
    }
    if (tp.wants_grad(eps)) {
      Tensor<T>& ge = tp.grad(eps);
      for (int64_t i = 0; i < g.size(); ++i) ge[i] += g[i] * std::exp(lvv[i] / T(2));
    }
  });
}

template <typename T>
Var kl_diag_gaussian(Tape<T>& t, Var mu, Var logvar) {
  const Shape ms = t.val(mu).shape;
  IVL_CHECK(ms == t.val(logvar).shape && ms.size() == 2, "kl shape mismatch: mu %s logvar %s",
            shape_str(ms).c_str(), shape_str(t.val(logvar).shape).c_str());
  const int64_t n = ms[0], d = ms[1];
  const Tensor<T>& m = t.val(mu);
  const Tensor<T>& lv = t.val(logvar);
  T total = T(0);
  for (int64_t r = 0; r < n; ++r) {
    T acc = T(0);
    for (int64_t i = r * d; i < (r + 1) * d; ++i)
      acc += m[i] * m[i] + std::exp(lv[i]) - T(1) - lv[i];
    total += acc / T(2);
  }
  Tensor<T> y({1});
  y[0] = total / T(n);
  if (!any_grad(t, {mu, logvar})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T g = tp.grad(self)[0] / T(n);
    const Tensor<T>& mv = tp.val(mu);
    const Tensor<T>& lvv = tp.val(logvar);
    if (tp.wants_grad(mu)) {
      Tensor<T>& gm = tp.grad(mu);
      for (int64_t i = 0; i < mv.size(); ++i) gm[i] += g * mv[i];
    }
    if (tp.wants_grad(logvar)) {
      Tensor<T>& glv = tp.grad(logvar);
      for (int64_t i = 0; i < lvv.size(); ++i) glv[i] += g * (std::exp(lvv[i]) - T(1)) / T(2);
    }
  });
}

template <typename T>
Var bernoulli_ce(Tape<T>& t, Var recon, Var target) {
  const Shape rs = t.val(recon).shape;
  IVL_CHECK(rs == t.val(target).shape, "bernoulli_ce shape mismatch: recon %s target %s",
            shape_str(rs).c_str(), shape_str(t.val(target).shape).c_str());
  IVL_CHECK(!rs.empty(), "bernoulli_ce on empty tensor");
  const int64_t n = rs[0];
  const Tensor<T>& r = t.val(recon);
  const Tensor<T>& x = t.val(target);
  const T lo = T(1e-7), hi = T(1) - T(1e-7);
  T total = T(0);
  for (int64_t i = 0; i < r.size(); ++i) {
    T rc = r[i] < lo ? lo : (r[i] > hi ? hi : r[i]);
    total -= x[i] * std::log(rc) + (T(1) - x[i]) * std::log(T(1) - rc);
  }
  Tensor<T> y({1});
  y[0] = total / T(n);
  if (!any_grad(t, {recon, target})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T g = tp.grad(self)[0] / T(n);
    const Tensor<T>& rv = tp.val(recon);
    const Tensor<T>& xv = tp.val(target);
    if (tp.wants_grad(recon)) {
      Tensor<T>& gr = tp.grad(recon);
      for (int64_t i = 0; i < rv.size(); ++i) {
        if (rv[i] <= lo || rv[i] >= hi) continue;  // clamp saturates
        gr[i] += g * (-xv[i] / rv[i] + (T(1) - xv[i]) / (T(1) - rv[i]));
      }
    }
    if (tp.wants_grad(target)) {
      Tensor<T>& gx = tp.grad(target);
      for (int64_t i = 0; i < rv.size(); ++i) {
        T rc = rv[i] < lo ? lo : (rv[i] > hi ? hi : rv[i]);
        gx[i] += g * (std::log(T(1) - rc) - std::log(rc));
      }
    }
  });
}

template <typename T>
Var row_normalize(Tape<T>& t, Var x) {
  const Shape xs = t.val(x).shape;
  IVL_CHECK(xs.size() == 2, "row_normalize expects [n,d], got %s", shape_str(xs).c_str());
  const int64_t n = xs[0], d = xs[1];
  const Tensor<T>& xv = t.val(x);
  Tensor<T> y(xs);
  for (int64_t r = 0; r < n; ++r) {
    T sq = T(0);
    for (int64_t i = r * d; i < (r + 1) * d; ++i) sq += xv[i] * xv[i];
    const T nrm = std::sqrt(sq);
    IVL_CHECK(nrm >= T(1e-8), "row_normalize: degenerate row %lld with norm %g", (long long)r,
              double(nrm));
    for (int64_t i = r * d; i < (r + 1) * d; ++i) y[i] = xv[i] / nrm;
  }
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& yv = tp.val(self);
    const Tensor<T>& xvv = tp.val(x);
    Tensor<T>& gx = tp.grad(x);
    for (int64_t r = 0; r < n; ++r) {
      T sq = T(0), dot = T(0);
      for (int64_t i = r * d; i < (r + 1) * d; ++i) {
        sq += xvv[i] * xvv[i];
        dot += g[i] * yv[i];
      }
      const T nrm = std::sqrt(sq);
      for (int64_t i = r * d; i < (r + 1) * d; ++i) gx[i] += (g[i] - yv[i] * dot) / nrm;
    }
  });
}

template <typename T>
Var rotate_posed(Tape<T>& t, Var img, Var pose) {
  const Shape is = t.val(img).shape, ps = t.val(pose).shape;
  IVL_CHECK(is.size() == 4 && is[1] == 1, "rotate_posed expects img [n,1,h,w], got %s",
            shape_str(is).c_str());
  IVL_CHECK(ps.size() == 2 && ps[1] == 2 && ps[0] == is[0],
            "rotate_posed pose %s does not match img %s", shape_str(ps).c_str(), shape_str(is).c_str());
  const int64_t n = is[0], h = is[2], w = is[3];
  const Tensor<T>& iv = t.val(img);
  const Tensor<T>& pv = t.val(pose);
  Tensor<T> y(is);
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < n; ++i)
    kernels::rotate_fwd(iv.ptr() + i * h * w, pv[i * 2], pv[i * 2 + 1], y.ptr() + i * h * w, h, w);
  if (!any_grad(t, {img, pose})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& ivv = tp.val(img);
    const Tensor<T>& pvv = tp.val(pose);
    const bool want_img = tp.wants_grad(img);
    const bool want_pose = tp.wants_grad(pose);
    T* gi = want_img ? tp.grad(img).ptr() : nullptr;  // touch before the parallel region
    T* gp = want_pose ? tp.grad(pose).ptr() : nullptr;
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      kernels::rotate_bwd(ivv.ptr() + i * h * w, pvv[i * 2], pvv[i * 2 + 1], g.ptr() + i * h * w,
                          gi ? gi + i * h * w : nullptr, gp ? gp + i * 2 : nullptr,
                          gp ? gp + i * 2 + 1 : nullptr, h, w);
    }
  });
}

template <typename T>
Var squared_distance(Tape<T>& t, Var a, Var b) {
  const Shape as = t.val(a).shape;
  IVL_CHECK(as == t.val(b).shape && as.size() == 2, "squared_distance shape mismatch: %s vs %s",
            shape_str(as).c_str(), shape_str(t.val(b).shape).c_str());
  const int64_t n = as[0];
  const Tensor<T>& av = t.val(a);
  const Tensor<T>& bv = t.val(b);
  T total = T(0);
  for (int64_t i = 0; i < av.size(); ++i) {
    const T d = av[i] - bv[i];
    total += d * d;
  }
  Tensor<T> y({1});
  y[0] = total / T(n);
  if (!any_grad(t, {a, b})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T g = tp.grad(self)[0] / T(n);
    const Tensor<T>& avv = tp.val(a);
    const Tensor<T>& bvv = tp.val(b);
    if (tp.wants_grad(a)) {
      Tensor<T>& ga = tp.grad(a);
      for (int64_t i = 0; i < avv.size(); ++i) ga[i] += g * T(2) * (avv[i] - bvv[i]);
    }
    if (tp.wants_grad(b)) {
      Tensor<T>& gb = tp.grad(b);
      for (int64_t i = 0; i < avv.size(); ++i) gb[i] -= g * T(2) * (avv[i] - bvv[i]);
    }
  });
}

template <typename T>
Var sum(Tape<T>& t, Var x) {
  const Tensor<T>& xv = t.val(x);
  T total = T(0);
  for (int64_t i = 0; i < xv.size(); ++i) total += xv[i];
  Tensor<T> y({1});
  y[0] = total;
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const T g = tp.grad(self)[0];
    Tensor<T>& gx = tp.grad(x);
    for (int64_t i = 0; i < gx.size(); ++i) gx[i] += g;
  });
}

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  const Shape as = t.val(a).shape;
  IVL_CHECK(as == t.val(b).shape, "add shape mismatch: %s vs %s", shape_str(as).c_str(),
            shape_str(t.val(b).shape).c_str());
  Tensor<T> y = t.val(a);
  const Tensor<T>& bv = t.val(b);
  for (int64_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  if (!any_grad(t, {a, b})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    for (Var v : {a, b}) {
      if (!tp.wants_grad(v)) continue;
      Tensor<T>& gv = tp.grad(v);
      for (int64_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

template <typename T>
Var mul(Tape<T>& t, Var a, Var b) {
  const Shape as = t.val(a).shape;
  IVL_CHECK(as == t.val(b).shape, "mul shape mismatch: %s vs %s", shape_str(as).c_str(),
            shape_str(t.val(b).shape).c_str());
  Tensor<T> y = t.val(a);
  const Tensor<T>& bv = t.val(b);
  for (int64_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  if (!any_grad(t, {a, b})) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& av = tp.val(a);
    const Tensor<T>& bvv = tp.val(b);
    if (tp.wants_grad(a)) {
      Tensor<T>& ga = tp.grad(a);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bvv[i];
    }
    if (tp.wants_grad(b)) {
      Tensor<T>& gb = tp.grad(b);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
Var scale(Tape<T>& t, Var x, T k) {
  Tensor<T> y = t.val(x);
  for (auto& v : y.data) v *= k;
  if (!t.wants_grad(x)) return t.push(std::move(y), false, nullptr);
  const Var self = next_var(t);
  return t.push(std::move(y), true, [=](Tape<T>& tp) {
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& gx = tp.grad(x);
    for (int64_t i = 0; i < g.size(); ++i) gx[i] += k * g[i];
  });
}

#define IVL_INSTANTIATE(T)                                              \
  template Var dense<T>(Tape<T>&, Var, Var, Var);                      \
  template Var conv2d<T>(Tape<T>&, Var, Var, Var, int64_t, int64_t);   \
  template Var relu<T>(Tape<T>&, Var);                                 \
  template Var sigmoid<T>(Tape<T>&, Var);                              \
  template Var reshape<T>(Tape<T>&, Var, Shape);                       \
  template Var upsample2x<T>(Tape<T>&, Var);                           \
  template Var reparameterize<T>(Tape<T>&, Var, Var, Var);             \
  template Var kl_diag_gaussian<T>(Tape<T>&, Var, Var);                \
  template Var bernoulli_ce<T>(Tape<T>&, Var, Var);                    \
  template Var row_normalize<T>(Tape<T>&, Var);                        \
  template Var rotate_posed<T>(Tape<T>&, Var, Var);                    \
  template Var squared_distance<T>(Tape<T>&, Var, Var);                \
  template Var sum<T>(Tape<T>&, Var);                                  \
  template Var add<T>(Tape<T>&, Var, Var);                             \
  template Var mul<T>(Tape<T>&, Var, Var);                             \
  template Var scale<T>(Tape<T>&, Var, T);

IVL_INSTANTIATE(float)
IVL_INSTANTIATE(double)
#undef IVL_INSTANTIATE

}  // namespace ivl::ad
