#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "ivl/kernels.hpp"
#include "ivl/rng.hpp"
#include "ivl/tensor.hpp"

// Compares the OpenMP kernels against the serial reference implementations:
// wall time, speedup, and a bitwise equality check of the outputs.

namespace {

using ivl::Rng;
using ivl::Tensor;
namespace k = ivl::kernels;

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const std::string& name, double ref_ms, double omp_ms, bool bitwise) {
  printf("%-28s %10.3f ms %10.3f ms %8.2fx   %s\n", name.c_str(), ref_ms, omp_ms, ref_ms / omp_ms,
         bitwise ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  printf("threads: %d\n", omp_get_max_threads());
  printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");
  Rng rng(123);

  {  // conv2d forward, training-like shape
    const int64_t n = 128, ci = 16, h = 14, w = 14, co = 32;
    auto x = ivl::uniform_tensor<float>({n, ci, h, w}, rng, 0, 1);
    auto kk = ivl::uniform_tensor<float>({co, ci, 3, 3}, rng, -0.2, 0.2);
    auto b = ivl::uniform_tensor<float>({co}, rng, -0.1, 0.1);
    Tensor<float> y1({n, co, 7, 7}), y2({n, co, 7, 7});
    const double t_ref = time_ms(
        [&] { k::ref::conv2d_fwd(x.ptr(), kk.ptr(), b.ptr(), y1.ptr(), n, ci, h, w, co, 3, 3, 2, 1); }, 3);
    const double t_omp = time_ms(
        [&] { k::conv2d_fwd(x.ptr(), kk.ptr(), b.ptr(), y2.ptr(), n, ci, h, w, co, 3, 3, 2, 1); }, 3);
    report("conv2d_fwd 128x16x14x14", t_ref, t_omp, y1.same_bits(y2));
  }
  {  // conv2d input gradient
    const int64_t n = 128, ci = 16, h = 14, w = 14, co = 32;
    auto gy = ivl::uniform_tensor<float>({n, co, 7, 7}, rng, -1, 1);
    auto kk = ivl::uniform_tensor<float>({co, ci, 3, 3}, rng, -0.2, 0.2);
    Tensor<float> g1({n, ci, h, w}), g2({n, ci, h, w});
    const double t_ref = time_ms(
        [&] { g1.fill(0); k::ref::conv2d_bwd_x(gy.ptr(), kk.ptr(), g1.ptr(), n, ci, h, w, co, 3, 3, 2, 1); },
        3);
    const double t_omp = time_ms(
        [&] { g2.fill(0); k::conv2d_bwd_x(gy.ptr(), kk.ptr(), g2.ptr(), n, ci, h, w, co, 3, 3, 2, 1); }, 3);
    report("conv2d_bwd_x 128x16x14x14", t_ref, t_omp, g1.same_bits(g2));
  }
  {  // conv2d kernel gradient
    const int64_t n = 128, ci = 16, h = 14, w = 14, co = 32;
    auto x = ivl::uniform_tensor<float>({n, ci, h, w}, rng, 0, 1);
    auto gy = ivl::uniform_tensor<float>({n, co, 7, 7}, rng, -1, 1);
    Tensor<float> g1({co, ci, 3, 3}), g2({co, ci, 3, 3});
    const double t_ref = time_ms(
        [&] { g1.fill(0); k::ref::conv2d_bwd_k(x.ptr(), gy.ptr(), g1.ptr(), n, ci, h, w, co, 3, 3, 2, 1); },
        3);
    const double t_omp = time_ms(
        [&] { g2.fill(0); k::conv2d_bwd_k(x.ptr(), gy.ptr(), g2.ptr(), n, ci, h, w, co, 3, 3, 2, 1); }, 3);
    report("conv2d_bwd_k 128x16x14x14", t_ref, t_omp, g1.same_bits(g2));
  }
  {  // dense forward, the decoder's big matmul
    const int64_t n = 128, in = 128, out = 1568;
    auto x = ivl::uniform_tensor<float>({n, in}, rng, -1, 1);
    auto w = ivl::uniform_tensor<float>({in, out}, rng, -0.1, 0.1);
    auto b = ivl::uniform_tensor<float>({out}, rng, -0.1, 0.1);
    Tensor<float> y1({n, out}), y2({n, out});
    const double t_ref =
        time_ms([&] { k::ref::dense_fwd(x.ptr(), w.ptr(), b.ptr(), y1.ptr(), n, in, out); }, 5);
    const double t_omp = time_ms([&] { k::dense_fwd(x.ptr(), w.ptr(), b.ptr(), y2.ptr(), n, in, out); }, 5);
    report("dense_fwd 128x128x1568", t_ref, t_omp, y1.same_bits(y2));
  }
  {  // dense weight gradient
    const int64_t n = 128, in = 128, out = 1568;
    auto x = ivl::uniform_tensor<float>({n, in}, rng, -1, 1);
    auto gy = ivl::uniform_tensor<float>({n, out}, rng, -1, 1);
    Tensor<float> g1({in, out}), g2({in, out});
    const double t_ref =
        time_ms([&] { g1.fill(0); k::ref::dense_bwd_w(x.ptr(), gy.ptr(), g1.ptr(), n, in, out); }, 5);
    const double t_omp =
        time_ms([&] { g2.fill(0); k::dense_bwd_w(x.ptr(), gy.ptr(), g2.ptr(), n, in, out); }, 5);
    report("dense_bwd_w 128x128x1568", t_ref, t_omp, g1.same_bits(g2));
  }
  {  // bilinear rotation of a batch-sized stack of images
    const int64_t h = 72, w = 72;
    auto img = ivl::uniform_tensor<float>({h, w}, rng, 0, 1);
    Tensor<float> o1({h, w}), o2({h, w});
    const float c = 0.8f, s = 0.6f;
    const double t_ref = time_ms([&] { k::ref::rotate_fwd(img.ptr(), c, s, o1.ptr(), h, w); }, 50);
    const double t_omp = time_ms([&] { k::rotate_fwd(img.ptr(), c, s, o2.ptr(), h, w); }, 50);
    report("rotate_fwd 72x72", t_ref, t_omp, o1.same_bits(o2));
  }
  return 0;
}
