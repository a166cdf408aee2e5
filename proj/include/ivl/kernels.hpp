#pragma once

#include <cstdint>

namespace ivl::kernels {

// Dense compute kernels. The functions in this namespace are OpenMP-parallel;
// ivl::kernels::ref holds plain serial implementations of the same contracts,
// kept as the reference the parallel versions are tested against
// (tools/bench_kernels compares their throughput).
//
// Both implementations accumulate each output element in the same fixed
// order (dense: input index ascending; conv: ci -> kh -> kw ascending, bias
// first), so with -ffp-contract=off the results are bitwise identical and
// independent of thread count.

// y[n,o] = b[o] + sum_i x[n,i] * w[i,o]
template <typename T>
void dense_fwd(const T* x, const T* w, const T* b, T* y, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_x(const T* gy, const T* w, T* gx, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_w(const T* x, const T* gy, T* gw, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_b(const T* gy, T* gb, int64_t n, int64_t out);

// x: [n, ci, h, w], k: [co, ci, kh, kw], b: [co], y: [n, co, ho, wo]
// ho = (h + 2*pad - kh) / stride + 1; zero padding.
template <typename T>
void conv2d_fwd(const T* x, const T* k, const T* b, T* y, int64_t n, int64_t ci, int64_t h, int64_t w,
                int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_x(const T* gy, const T* k, T* gx, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_k(const T* x, const T* gy, T* gk, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_b(const T* gy, T* gb, int64_t n, int64_t co, int64_t ho, int64_t wo);

// Bilinear rotation about the pixel center ((h-1)/2, (w-1)/2). The source
// location for output pixel (y, x) is the output coordinate rotated by -theta
// where (c, s) = (cos theta, sin theta); samples outside the image read 0.
// Single image; the batched autodiff op parallelizes over the batch instead.
template <typename T>
void rotate_fwd(const T* img, T c, T s, T* out, int64_t h, int64_t w);
// Accumulates into gimg / gc / gs. Serial (the bilinear scatter footprint
// crosses row boundaries, so one image belongs to one thread).
template <typename T>
void rotate_bwd(const T* img, T c, T s, const T* gout, T* gimg, T* gc, T* gs, int64_t h, int64_t w);

// [n, c, h, w] -> [n, c, 2h, 2w], nearest neighbor.
template <typename T>
void upsample2x_fwd(const T* x, T* y, int64_t n, int64_t c, int64_t h, int64_t w);
template <typename T>
void upsample2x_bwd(const T* gy, T* gx, int64_t n, int64_t c, int64_t h, int64_t w);

int64_t conv_out_dim(int64_t in, int64_t k, int64_t stride, int64_t pad);

namespace ref {

template <typename T>
void dense_fwd(const T* x, const T* w, const T* b, T* y, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_x(const T* gy, const T* w, T* gx, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_w(const T* x, const T* gy, T* gw, int64_t n, int64_t in, int64_t out);
template <typename T>
void dense_bwd_b(const T* gy, T* gb, int64_t n, int64_t out);

template <typename T>
void conv2d_fwd(const T* x, const T* k, const T* b, T* y, int64_t n, int64_t ci, int64_t h, int64_t w,
                int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_x(const T* gy, const T* k, T* gx, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_k(const T* x, const T* gy, T* gk, int64_t n, int64_t ci, int64_t h, int64_t w,
                  int64_t co, int64_t kh, int64_t kw, int64_t stride, int64_t pad);
template <typename T>
void conv2d_bwd_b(const T* gy, T* gb, int64_t n, int64_t co, int64_t ho, int64_t wo);

template <typename T>
void rotate_fwd(const T* img, T c, T s, T* out, int64_t h, int64_t w);

template <typename T>
void upsample2x_fwd(const T* x, T* y, int64_t n, int64_t c, int64_t h, int64_t w);

}  // namespace ref

}  // namespace ivl::kernels
