#include "ivl/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include "ivl/common.hpp"

namespace ivl::kernels {

int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad) {
  IVL_CHECK(in + 2 * pad >= k, "conv input %lld too small for kernel %lld (pad %lld)",
            (long long)in, (long long)k, (long long)pad);
  return (in + 2 * pad - k) / stride + 1;
}

// ---------------------------------------------------------------------------
// dense
// ---------------------------------------------------------------------------

template <typename T>
void dense_fwd(const T* x, const T* w, const T* b, T* y, int64_t n, int64_t in, int64_t out) {
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < n; ++r) {
    T* yr = y + r * out;
    const T* xr = x + r * in;
    for (int64_t o = 0; o < out; ++o) yr[o] = b[o];
    for (int64_t i = 0; i < in; ++i) {
      const T xi = xr[i];
      const T* wi = w + i * out;
      for (int64_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
    }
  }
}

template <typename T>
void dense_bwd_x(const T* gy, const T* w, T* gx, int64_t n, int64_t in, int64_t out) {
  // transposed weight copy turns the per-row update into contiguous saxpys;
  // per element the o-terms still arrive in ascending order
  std::vector<T> wt(size_t(in * out));
  for (int64_t i = 0; i < in; ++i)
    for (int64_t o = 0; o < out; ++o) wt[size_t(o * in + i)] = w[i * out + o];
#pragma omp parallel for schedule(static)
  for (int64_t r = 0; r < n; ++r) {
    const T* gyr = gy + r * out;
    T* gxr = gx + r * in;
    for (int64_t o = 0; o < out; ++o) {
      const T g = gyr[o];
      const T* wo = wt.data() + o * in;
      for (int64_t i = 0; i < in; ++i) gxr[i] += g * wo[i];
    }
  }
}

template <typename T>
void dense_bwd_w(const T* x, const T* gy, T* gw, int64_t n, int64_t in, int64_t out) {
  // each thread owns full rows of gw; per-element accumulation runs over the
  // batch in ascending order
#pragma omp parallel for schedule(static)
  for (int64_t i = 0; i < in; ++i) {
    T* gwi = gw + i * out;
    for (int64_t r = 0; r < n; ++r) {
      const T xi = x[r * in + i];
      const T* gyr = gy + r * out;
      for (int64_t o = 0; o < out; ++o) gwi[o] += xi * gyr[o];
    }
  }
}

template <typename T>
void dense_bwd_b(const T* gy, T* gb, int64_t n, int64_t out) {
  for (int64_t r = 0; r < n; ++r)
    for (int64_t o = 0; o < out; ++o) gb[o] += gy[r * out + o];
}

// ---------------------------------------------------------------------------
// conv2d
// ---------------------------------------------------------------------------

namespace {

// output-index range [lo, hi) for which s*i + d - pad lands inside [0, extent)
inline void tap_bounds(int64_t out_dim, int64_t stride, int64_t d, int64_t pad, int64_t extent,
                       int64_t& lo, int64_t& hi) {
  // smallest i with s*i + d - pad >= 0 and largest with s*i + d - pad < extent
  const int64_t off = d - pad;
  lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
  hi = off >= extent ? 0 : (extent - 1 - off) / stride + 1;
  if (hi > out_dim) hi = out_dim;
  if (lo > hi) lo = hi;
}

}  // namespace

namespace {

// im2col: rows are output positions (img, yy, xx), columns are taps in
// (ic, dy, dx) order — the same order the reference kernels accumulate in.
// Out-of-bounds taps hold zero.
template <typename T>
void im2col(const T* x, T* col, int64_t n, int64_t ci, int64_t h, int64_t w, int64_t kh, int64_t kw,
            int64_t stride, int64_t pad, int64_t ho, int64_t wo) {
  const int64_t K = ci * kh * kw;
#pragma omp parallel for schedule(static)
  for (int64_t img = 0; img < n; ++img) {
    T* crow0 = col + img * ho * wo * K;
    for (int64_t yy = 0; yy < ho; ++yy) {
      for (int64_t xx = 0; xx < wo; ++xx) {
        T* crow = crow0 + (yy * wo + xx) * K;
        for (int64_t ic = 0; ic < ci; ++ic) {
          const T* xi = x + ((img * ci + ic) * h) * w;
          for (int64_t dy = 0; dy < kh; ++dy) {
            const int64_t sy = yy * stride + dy - pad;
            for (int64_t dx = 0; dx < kw; ++dx) {
              const int64_t sx = xx * stride + dx - pad;
              *crow++ = (sy < 0 || sy >= h || sx < 0 || sx >= w) ? T(0) : xi[sy * w + sx];
            }
          }
        }
      }
    }
  }
}

// k[co, ci, kh, kw] -> w[(ci, kh, kw), co]
template <typename T>
std::vector<T> kernel_as_matrix(const T* k, int64_t co, int64_t K) {
  std::vector<T> wm(size_t(K * co));
  for (int64_t oc = 0; oc < co; ++oc)
    for (int64_t i = 0; i < K; ++i) wm[size_t(i * co + oc)] = k[oc * K + i];
  return wm;
}

}  // namespace

template <typename T>
void conv2d_fwd(const T* x, const T* k, const T* b, T* y, int64_t n, int64_t ci, int64_t h, int64_t w,
                int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  const int64_t K = ci * kh * kw;
  const int64_t rows = n * ho * wo;
  std::vector<T> col(size_t(rows * K));
  im2col(x, col.data(), n, ci, h, w, kh, kw, stride, pad, ho, wo);
  const std::vector<T> wm = kernel_as_matrix(k, co, K);
  std::vector<T> yr(size_t(rows * co));
  dense_fwd(col.data(), wm.data(), b, yr.data(), rows, K, co);
  // [rows, co] -> [n, co, ho, wo]
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t img = 0; img < n; ++img)
    for (int64_t oc = 0; oc < co; ++oc) {
      T* yo = y + ((img * co + oc) * ho) * wo;
      const T* src = yr.data() + img * ho * wo * co + oc;
      for (int64_t i = 0; i < ho * wo; ++i) yo[i] = src[i * co];
    }
}

template <typename T>
void conv2d_bwd_x(const T* gy, const T* k, T* gx, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  const int64_t K = ci * kh * kw;
  const int64_t rows = n * ho * wo;
  // gy back to row layout [rows, co]
  std::vector<T> gyr(size_t(rows * co));
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t img = 0; img < n; ++img)
    for (int64_t oc = 0; oc < co; ++oc) {
      const T* gyo = gy + ((img * co + oc) * ho) * wo;
      T* dst = gyr.data() + img * ho * wo * co + oc;
      for (int64_t i = 0; i < ho * wo; ++i) dst[i * co] = gyo[i];
    }
  const std::vector<T> wm = kernel_as_matrix(k, co, K);
  std::vector<T> gcol(size_t(rows * K), T(0));
  dense_bwd_x(gyr.data(), wm.data(), gcol.data(), rows, K, co);
  // col2im: each (img, ic) slice of gx is owned by one iteration; per input
  // pixel the taps arrive in ascending (dy, dx) order, matching the reference
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t img = 0; img < n; ++img) {
    for (int64_t ic = 0; ic < ci; ++ic) {
      T* gxi = gx + ((img * ci + ic) * h) * w;
      const T* gc0 = gcol.data() + img * ho * wo * K + ic * kh * kw;
      for (int64_t dy = 0; dy < kh; ++dy) {
        for (int64_t dx = 0; dx < kw; ++dx) {
          int64_t y_lo, y_hi, x_lo, x_hi;
          tap_bounds(ho, stride, dy, pad, h, y_lo, y_hi);
          tap_bounds(wo, stride, dx, pad, w, x_lo, x_hi);
          const T* gc = gc0 + dy * kw + dx;
          for (int64_t yy = y_lo; yy < y_hi; ++yy) {
            T* gxrow = gxi + (yy * stride + dy - pad) * w + (dx - pad);
            const T* gcrow = gc + yy * wo * K;
            for (int64_t xx = x_lo; xx < x_hi; ++xx) gxrow[xx * stride] += gcrow[xx * K];
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_bwd_k(const T* x, const T* gy, T* gk, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  const int64_t K = ci * kh * kw;
  const int64_t rows = n * ho * wo;
  std::vector<T> col(size_t(rows * K));
  im2col(x, col.data(), n, ci, h, w, kh, kw, stride, pad, ho, wo);
  std::vector<T> gyr(size_t(rows * co));
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t img = 0; img < n; ++img)
    for (int64_t oc = 0; oc < co; ++oc) {
      const T* gyo = gy + ((img * co + oc) * ho) * wo;
      T* dst = gyr.data() + img * ho * wo * co + oc;
      for (int64_t i = 0; i < ho * wo; ++i) dst[i * co] = gyo[i];
    }
  std::vector<T> gwm(size_t(K * co), T(0));
  dense_bwd_w(col.data(), gyr.data(), gwm.data(), rows, K, co);
#pragma omp parallel for schedule(static)
  for (int64_t oc = 0; oc < co; ++oc)
    for (int64_t i = 0; i < K; ++i) gk[oc * K + i] += gwm[size_t(i * co + oc)];
}

template <typename T>
void conv2d_bwd_b(const T* gy, T* gb, int64_t n, int64_t co, int64_t ho, int64_t wo) {
#pragma omp parallel for schedule(static)
  for (int64_t oc = 0; oc < co; ++oc) {
    T acc = T(0);
    for (int64_t img = 0; img < n; ++img) {
      const T* gyo = gy + ((img * co + oc) * ho) * wo;
      for (int64_t i = 0; i < ho * wo; ++i) acc += gyo[i];
    }
    gb[oc] += acc;
  }
}

// ---------------------------------------------------------------------------
// bilinear rotation
// ---------------------------------------------------------------------------

template <typename T>
void rotate_fwd(const T* img, T c, T s, T* out, int64_t h, int64_t w) {
  const T cy = T(h - 1) / T(2);
  const T cx = T(w - 1) / T(2);
#pragma omp parallel for schedule(static)
  for (int64_t y = 0; y < h; ++y) {
    const T dy = T(y) - cy;
    for (int64_t x = 0; x < w; ++x) {
      const T dx = T(x) - cx;
      const T sx = c * dx + s * dy + cx;
      const T sy = -s * dx + c * dy + cy;
      const int64_t x0 = int64_t(std::floor(sx));
      const int64_t y0 = int64_t(std::floor(sy));
      const T fx = sx - T(x0);
      const T fy = sy - T(y0);
      auto at = [&](int64_t yy, int64_t xx) -> T {
        return (yy < 0 || yy >= h || xx < 0 || xx >= w) ? T(0) : img[yy * w + xx];
      };
      const T v00 = at(y0, x0), v01 = at(y0, x0 + 1);
      const T v10 = at(y0 + 1, x0), v11 = at(y0 + 1, x0 + 1);
      out[y * w + x] = (T(1) - fy) * ((T(1) - fx) * v00 + fx * v01) + fy * ((T(1) - fx) * v10 + fx * v11);
    }
  }
}

template <typename T>
void rotate_bwd(const T* img, T c, T s, const T* gout, T* gimg, T* gc, T* gs, int64_t h, int64_t w) {
  const T cy = T(h - 1) / T(2);
  const T cx = T(w - 1) / T(2);
  T acc_c = T(0), acc_s = T(0);
  for (int64_t y = 0; y < h; ++y) {
    const T dy = T(y) - cy;
    for (int64_t x = 0; x < w; ++x) {
      const T g = gout[y * w + x];
      if (g == T(0)) continue;
      const T dx = T(x) - cx;
      const T sx = c * dx + s * dy + cx;
      const T sy = -s * dx + c * dy + cy;
      const int64_t x0 = int64_t(std::floor(sx));
      const int64_t y0 = int64_t(std::floor(sy));
      const T fx = sx - T(x0);
      const T fy = sy - T(y0);
      auto in = [&](int64_t yy, int64_t xx) { return yy >= 0 && yy < h && xx >= 0 && xx < w; };
      auto at = [&](int64_t yy, int64_t xx) -> T { return in(yy, xx) ? img[yy * w + xx] : T(0); };
      const T v00 = at(y0, x0), v01 = at(y0, x0 + 1);
      const T v10 = at(y0 + 1, x0), v11 = at(y0 + 1, x0 + 1);
      // pixel gradient: bilinear weights scatter back to the four corners
      if (gimg) {
        if (in(y0, x0)) gimg[y0 * w + x0] += g * (T(1) - fy) * (T(1) - fx);
        if (in(y0, x0 + 1)) gimg[y0 * w + x0 + 1] += g * (T(1) - fy) * fx;
        if (in(y0 + 1, x0)) gimg[(y0 + 1) * w + x0] += g * fy * (T(1) - fx);
        if (in(y0 + 1, x0 + 1)) gimg[(y0 + 1) * w + x0 + 1] += g * fy * fx;
      }
      // pose gradient through the sample location
      const T dv_dsx = (T(1) - fy) * (v01 - v00) + fy * (v11 - v10);
      const T dv_dsy = (T(1) - fx) * (v10 - v00) + fx * (v11 - v01);
      acc_c += g * (dv_dsx * dx + dv_dsy * dy);
      acc_s += g * (dv_dsx * dy - dv_dsy * dx);
    }
  }
  if (gc) *gc += acc_c;
  if (gs) *gs += acc_s;
}

// ---------------------------------------------------------------------------
// nearest-neighbor 2x upsample
// ---------------------------------------------------------------------------

template <typename T>
void upsample2x_fwd(const T* x, T* y, int64_t n, int64_t c, int64_t h, int64_t w) {
#pragma omp parallel for schedule(static)
  for (int64_t p = 0; p < n * c; ++p) {
    const T* xp = x + p * h * w;
    T* yp = y + p * 4 * h * w;
    for (int64_t yy = 0; yy < 2 * h; ++yy) {
      const T* xrow = xp + (yy / 2) * w;
      T* yrow = yp + yy * 2 * w;
      for (int64_t xx = 0; xx < 2 * w; ++xx) yrow[xx] = xrow[xx / 2];
    }
  }
}

template <typename T>
void upsample2x_bwd(const T* gy, T* gx, int64_t n, int64_t c, int64_t h, int64_t w) {
#pragma omp parallel for schedule(static)
  for (int64_t p = 0; p < n * c; ++p) {
    const T* gyp = gy + p * 4 * h * w;
    T* gxp = gx + p * h * w;
    for (int64_t yy = 0; yy < 2 * h; ++yy) {
      const T* gyrow = gyp + yy * 2 * w;
      T* gxrow = gxp + (yy / 2) * w;
      for (int64_t xx = 0; xx < 2 * w; ++xx) gxrow[xx / 2] += gyrow[xx];
    }
  }
}

// ---------------------------------------------------------------------------
// serial reference implementations
// ---------------------------------------------------------------------------

namespace ref {

template <typename T>
void dense_fwd(const T* x, const T* w, const T* b, T* y, int64_t n, int64_t in, int64_t out) {
  for (int64_t r = 0; r < n; ++r) {
    for (int64_t o = 0; o < out; ++o) {
      T acc = b[o];
      for (int64_t i = 0; i < in; ++i) acc += x[r * in + i] * w[i * out + o];
      y[r * out + o] = acc;
    }
  }
}

template <typename T>
void dense_bwd_x(const T* gy, const T* w, T* gx, int64_t n, int64_t in, int64_t out) {
  for (int64_t r = 0; r < n; ++r)
    for (int64_t i = 0; i < in; ++i) {
      T acc = T(0);
      for (int64_t o = 0; o < out; ++o) acc += gy[r * out + o] * w[i * out + o];
      gx[r * in + i] += acc;
    }
}

template <typename T>
void dense_bwd_w(const T* x, const T* gy, T* gw, int64_t n, int64_t in, int64_t out) {
  for (int64_t i = 0; i < in; ++i)
    for (int64_t r = 0; r < n; ++r)
      for (int64_t o = 0; o < out; ++o) gw[i * out + o] += x[r * in + i] * gy[r * out + o];
}

template <typename T>
void dense_bwd_b(const T* gy, T* gb, int64_t n, int64_t out) {
  for (int64_t r = 0; r < n; ++r)
    for (int64_t o = 0; o < out; ++o) gb[o] += gy[r * out + o];
}

template <typename T>
void conv2d_fwd(const T* x, const T* k, const T* b, T* y, int64_t n, int64_t ci, int64_t h, int64_t w,
                int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  for (int64_t img = 0; img < n; ++img)
    for (int64_t oc = 0; oc < co; ++oc)
      for (int64_t yy = 0; yy < ho; ++yy)
        for (int64_t xx = 0; xx < wo; ++xx) {
          T acc = b[oc];
          for (int64_t ic = 0; ic < ci; ++ic)
            for (int64_t dy = 0; dy < kh; ++dy)
              for (int64_t dx = 0; dx < kw; ++dx) {
                const int64_t sy = yy * stride + dy - pad;
                const int64_t sx = xx * stride + dx - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                acc += k[((oc * ci + ic) * kh + dy) * kw + dx] * x[((img * ci + ic) * h + sy) * w + sx];
              }
          y[((img * co + oc) * ho + yy) * wo + xx] = acc;
        }
}

template <typename T>
void conv2d_bwd_x(const T* gy, const T* k, T* gx, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  // contract: per input pixel, taps arrive in ascending (dy, dx) order with
  // the output-channel sum folded per tap (ascending oc)
  for (int64_t img = 0; img < n; ++img)
    for (int64_t ic = 0; ic < ci; ++ic)
      for (int64_t dy = 0; dy < kh; ++dy)
        for (int64_t dx = 0; dx < kw; ++dx)
          for (int64_t yy = 0; yy < ho; ++yy)
            for (int64_t xx = 0; xx < wo; ++xx) {
              const int64_t sy = yy * stride + dy - pad;
              const int64_t sx = xx * stride + dx - pad;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              T acc = T(0);
              for (int64_t oc = 0; oc < co; ++oc)
                acc += k[((oc * ci + ic) * kh + dy) * kw + dx] *
                       gy[((img * co + oc) * ho + yy) * wo + xx];
              gx[((img * ci + ic) * h + sy) * w + sx] += acc;
            }
}

template <typename T>
void conv2d_bwd_k(const T* x, const T* gy, T* gk, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad) {
  const int64_t ho = conv_out_dim(h, kh, stride, pad);
  const int64_t wo = conv_out_dim(w, kw, stride, pad);
  for (int64_t oc = 0; oc < co; ++oc)
    for (int64_t ic = 0; ic < ci; ++ic)
      for (int64_t dy = 0; dy < kh; ++dy)
        for (int64_t dx = 0; dx < kw; ++dx) {
          T acc = T(0);
          for (int64_t img = 0; img < n; ++img)
            for (int64_t yy = 0; yy < ho; ++yy)
              for (int64_t xx = 0; xx < wo; ++xx) {
                const int64_t sy = yy * stride + dy - pad;
                const int64_t sx = xx * stride + dx - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
                acc += x[((img * ci + ic) * h + sy) * w + sx] * gy[((img * co + oc) * ho + yy) * wo + xx];
              }
          gk[((oc * ci + ic) * kh + dy) * kw + dx] += acc;
        }
}

template <typename T>
void conv2d_bwd_b(const T* gy, T* gb, int64_t n, int64_t co, int64_t ho, int64_t wo) {
  for (int64_t oc = 0; oc < co; ++oc)
    for (int64_t img = 0; img < n; ++img)
      for (int64_t i = 0; i < ho * wo; ++i) gb[oc] += gy[((img * co + oc) * ho) * wo + i];
}

template <typename T>
void rotate_fwd(const T* img, T c, T s, T* out, int64_t h, int64_t w) {
  const T cy = T(h - 1) / T(2);
  const T cx = T(w - 1) / T(2);
  for (int64_t y = 0; y < h; ++y)
    for (int64_t x = 0; x < w; ++x) {
      const T dy = T(y) - cy;
      const T dx = T(x) - cx;
      const T sx = c * dx + s * dy + cx;
      const T sy = -s * dx + c * dy + cy;
      const int64_t x0 = int64_t(std::floor(sx));
      const int64_t y0 = int64_t(std::floor(sy));
      const T fx = sx - T(x0);
      const T fy = sy - T(y0);
      auto at = [&](int64_t yy, int64_t xx) -> T {
        return (yy < 0 || yy >= h || xx < 0 || xx >= w) ? T(0) : img[yy * w + xx];
      };
      out[y * w + x] = (T(1) - fy) * ((T(1) - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
                       fy * ((T(1) - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
    }
}

template <typename T>
void upsample2x_fwd(const T* x, T* y, int64_t n, int64_t c, int64_t h, int64_t w) {
  for (int64_t p = 0; p < n * c; ++p)
    for (int64_t yy = 0; yy < 2 * h; ++yy)
      for (int64_t xx = 0; xx < 2 * w; ++xx)
        y[(p * 2 * h + yy) * 2 * w + xx] = x[(p * h + yy / 2) * w + xx / 2];
}

}  // namespace ref

// explicit instantiations: f32 for training, f64 for the gradient-check
// shadow mode
#define IVL_INSTANTIATE(T)                                                                              \
  template void dense_fwd<T>(const T*, const T*, const T*, T*, int64_t, int64_t, int64_t);              \
  template void dense_bwd_x<T>(const T*, const T*, T*, int64_t, int64_t, int64_t);                      \
  template void dense_bwd_w<T>(const T*, const T*, T*, int64_t, int64_t, int64_t);                      \
  template void dense_bwd_b<T>(const T*, T*, int64_t, int64_t);                                         \
  template void conv2d_fwd<T>(const T*, const T*, const T*, T*, int64_t, int64_t, int64_t, int64_t,     \
                              int64_t, int64_t, int64_t, int64_t, int64_t);                             \
  template void conv2d_bwd_x<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, int64_t, int64_t,    \
                                int64_t, int64_t, int64_t, int64_t);                                    \
  template void conv2d_bwd_k<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, int64_t, int64_t,    \
                                int64_t, int64_t, int64_t, int64_t);                                    \
  template void conv2d_bwd_b<T>(const T*, T*, int64_t, int64_t, int64_t, int64_t);                      \
  template void rotate_fwd<T>(const T*, T, T, T*, int64_t, int64_t);                                    \
  template void rotate_bwd<T>(const T*, T, T, const T*, T*, T*, T*, int64_t, int64_t);                  \
  template void upsample2x_fwd<T>(const T*, T*, int64_t, int64_t, int64_t, int64_t);                    \
  template void upsample2x_bwd<T>(const T*, T*, int64_t, int64_t, int64_t, int64_t);                    \
  template void ref::dense_fwd<T>(const T*, const T*, const T*, T*, int64_t, int64_t, int64_t);         \
  template void ref::dense_bwd_x<T>(const T*, const T*, T*, int64_t, int64_t, int64_t);                 \
  template void ref::dense_bwd_w<T>(const T*, const T*, T*, int64_t, int64_t, int64_t);                 \
  template void ref::dense_bwd_b<T>(const T*, T*, int64_t, int64_t);                                    \
  template void ref::conv2d_fwd<T>(const T*, const T*, const T*, T*, int64_t, int64_t, int64_t,         \
                                   int64_t, int64_t, int64_t, int64_t, int64_t, int64_t);               \
  template void ref::conv2d_bwd_x<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, int64_t,        \
                                     int64_t, int64_t, int64_t, int64_t, int64_t);                      \
  template void ref::conv2d_bwd_k<T>(const T*, const T*, T*, int64_t, int64_t, int64_t, int64_t,        \
                                     int64_t, int64_t, int64_t, int64_t, int64_t);                      \
  template void ref::conv2d_bwd_b<T>(const T*, T*, int64_t, int64_t, int64_t, int64_t);                 \
  template void ref::rotate_fwd<T>(const T*, T, T, T*, int64_t, int64_t);                               \
  template void ref::upsample2x_fwd<T>(const T*, T*, int64_t, int64_t, int64_t, int64_t);

IVL_INSTANTIATE(float)
IVL_INSTANTIATE(double)
#undef IVL_INSTANTIATE

}  // namespace ivl::kernels
