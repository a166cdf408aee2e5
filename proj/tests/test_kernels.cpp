#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ivl/kernels.hpp"
#include "ivl/rng.hpp"
#include "ivl/tensor.hpp"

using ivl::Rng;
using ivl::Shape;
using ivl::Tensor;
namespace k = ivl::kernels;

// The OpenMP kernels must match the serial reference implementations bit for
// bit: every output element is owned by one thread and accumulated in the
// same order in both versions.

TEST_CASE("dense: omp matches serial reference bitwise") {
  Rng rng(11);
  for (int it = 0; it < 20; ++it) {
    const int64_t n = 1 + int64_t(rng.below(9));
    const int64_t in = 1 + int64_t(rng.below(40));
    const int64_t out = 1 + int64_t(rng.below(40));
    auto x = ivl::uniform_tensor<float>({n, in}, rng, -1, 1);
    auto w = ivl::uniform_tensor<float>({in, out}, rng, -1, 1);
    auto b = ivl::uniform_tensor<float>({out}, rng, -1, 1);
    Tensor<float> y1({n, out}), y2({n, out});
    k::ref::dense_fwd(x.ptr(), w.ptr(), b.ptr(), y1.ptr(), n, in, out);
    k::dense_fwd(x.ptr(), w.ptr(), b.ptr(), y2.ptr(), n, in, out);
    REQUIRE(y1.same_bits(y2));

    auto gy = ivl::uniform_tensor<float>({n, out}, rng, -1, 1);
    Tensor<float> gx1({n, in}), gx2({n, in}), gw1({in, out}), gw2({in, out}), gb1({out}), gb2({out});
    k::ref::dense_bwd_x(gy.ptr(), w.ptr(), gx1.ptr(), n, in, out);
    k::dense_bwd_x(gy.ptr(), w.ptr(), gx2.ptr(), n, in, out);
    k::ref::dense_bwd_w(x.ptr(), gy.ptr(), gw1.ptr(), n, in, out);
    k::dense_bwd_w(x.ptr(), gy.ptr(), gw2.ptr(), n, in, out);
    k::ref::dense_bwd_b(gy.ptr(), gb1.ptr(), n, out);
    k::dense_bwd_b(gy.ptr(), gb2.ptr(), n, out);
    REQUIRE(gx1.same_bits(gx2));
    REQUIRE(gw1.same_bits(gw2));
    REQUIRE(gb1.same_bits(gb2));
  }
}

TEST_CASE("conv2d: omp matches serial reference bitwise") {
  Rng rng(22);
  for (int it = 0; it < 12; ++it) {
    const int64_t n = 1 + int64_t(rng.below(4));
    const int64_t ci = 1 + int64_t(rng.below(4));
    const int64_t co = 1 + int64_t(rng.below(6));
    const int64_t h = 6 + int64_t(rng.below(10));
    const int64_t w = 6 + int64_t(rng.below(10));
    const int64_t stride = 1 + int64_t(rng.below(2));
    const int64_t pad = int64_t(rng.below(2));
    const int64_t kh = 3, kw = 3;
    const int64_t ho = k::conv_out_dim(h, kh, stride, pad);
    const int64_t wo = k::conv_out_dim(w, kw, stride, pad);

    auto x = ivl::uniform_tensor<float>({n, ci, h, w}, rng, -1, 1);
    auto kk = ivl::uniform_tensor<float>({co, ci, kh, kw}, rng, -1, 1);
    auto b = ivl::uniform_tensor<float>({co}, rng, -1, 1);
    Tensor<float> y1({n, co, ho, wo}), y2({n, co, ho, wo});
    k::ref::conv2d_fwd(x.ptr(), kk.ptr(), b.ptr(), y1.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    k::conv2d_fwd(x.ptr(), kk.ptr(), b.ptr(), y2.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    REQUIRE(y1.same_bits(y2));

    auto gy = ivl::uniform_tensor<float>({n, co, ho, wo}, rng, -1, 1);
    Tensor<float> gx1({n, ci, h, w}), gx2({n, ci, h, w});
    k::ref::conv2d_bwd_x(gy.ptr(), kk.ptr(), gx1.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    k::conv2d_bwd_x(gy.ptr(), kk.ptr(), gx2.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    REQUIRE(gx1.same_bits(gx2));

    Tensor<float> gk1({co, ci, kh, kw}), gk2({co, ci, kh, kw}), gb1({co}), gb2({co});
    k::ref::conv2d_bwd_k(x.ptr(), gy.ptr(), gk1.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    k::conv2d_bwd_k(x.ptr(), gy.ptr(), gk2.ptr(), n, ci, h, w, co, kh, kw, stride, pad);
    k::ref::conv2d_bwd_b(gy.ptr(), gb1.ptr(), n, co, ho, wo);
    k::conv2d_bwd_b(gy.ptr(), gb2.ptr(), n, co, ho, wo);
    REQUIRE(gk1.same_bits(gk2));
    REQUIRE(gb1.same_bits(gb2));
  }
}

TEST_CASE("rotate and upsample: omp matches serial reference bitwise") {
  Rng rng(33);
  for (int it = 0; it < 10; ++it) {
    const int64_t h = 8 + int64_t(rng.below(40));
    const int64_t w = 8 + int64_t(rng.below(40));
    auto img = ivl::uniform_tensor<float>({h, w}, rng, 0, 1);
    const double th = rng.uniform(0, 6.28318);
    const float c = float(std::cos(th)), s = float(std::sin(th));
    Tensor<float> o1({h, w}), o2({h, w});
    k::ref::rotate_fwd(img.ptr(), c, s, o1.ptr(), h, w);
    k::rotate_fwd(img.ptr(), c, s, o2.ptr(), h, w);
    REQUIRE(o1.same_bits(o2));

    const int64_t n = 1 + int64_t(rng.below(3)), ch = 1 + int64_t(rng.below(3));
    auto x = ivl::uniform_tensor<float>({n, ch, h, w}, rng, 0, 1);
    Tensor<float> u1({n, ch, 2 * h, 2 * w}), u2({n, ch, 2 * h, 2 * w});
    k::ref::upsample2x_fwd(x.ptr(), u1.ptr(), n, ch, h, w);
    k::upsample2x_fwd(x.ptr(), u2.ptr(), n, ch, h, w);
    REQUIRE(u1.same_bits(u2));
  }
}

TEST_CASE("conv2d shapes: stride-2 pad-1 halves even sides") {
  CHECK(k::conv_out_dim(28, 3, 2, 1) == 14);
  CHECK(k::conv_out_dim(14, 3, 2, 1) == 7);
  CHECK(k::conv_out_dim(72, 3, 2, 1) == 36);
  CHECK(k::conv_out_dim(8, 3, 1, 1) == 8);
  CHECK_THROWS(k::conv_out_dim(1, 3, 1, 0));
}

TEST_CASE("delta kernel shifts the image") {
  // 3x3 kernel that is one at its top-left tap: output = input shifted by
  // (+1, +1) under stride 1 pad 1
  const int64_t h = 6, w = 6;
  Rng rng(44);
  auto x = ivl::uniform_tensor<float>({1, 1, h, w}, rng, 0, 1);
  Tensor<float> kk({1, 1, 3, 3});
  kk[0] = 1.0f;
  Tensor<float> b({1});
  Tensor<float> y({1, 1, h, w});
  k::conv2d_fwd(x.ptr(), kk.ptr(), b.ptr(), y.ptr(), 1, 1, h, w, 1, 3, 3, 1, 1);
  for (int64_t yy = 0; yy < h; ++yy)
    for (int64_t xx = 0; xx < w; ++xx) {
      const int64_t sy = yy - 1, sx = xx - 1;
      const float expect = (sy >= 0 && sx >= 0) ? x[sy * w + sx] : 0.0f;
      CHECK(y[yy * w + xx] == expect);
    }
}
