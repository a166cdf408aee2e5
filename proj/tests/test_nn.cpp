#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ivl/autodiff.hpp"
#include "ivl/optim.hpp"

using ivl::Rng;
using ivl::Shape;
using ivl::Tensor;
namespace ad = ivl::ad;
namespace nn = ivl::nn;
using ivltest::grad_check;

namespace {

// loss = sum(out * random_weights): makes the scalar sensitive to every
// output element with distinct coefficients
ad::Var weighted(ad::Tape<double>& t, ad::Var out, uint64_t seed) {
  Rng rng(seed);
  Tensor<double> w(t.val(out).shape);
  for (auto& v : w.data) v = rng.uniform(-1, 1);
  return ad::sum(t, ad::mul(t, out, t.leaf(w, false)));
}

}  // namespace

TEST_CASE("dense forward identity and gradients") {
  ad::Tape<float> t;
  Tensor<float> x({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor<float> w({3, 3});
  for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0f;
  Tensor<float> b({3});
  const ad::Var y = ad::dense(t, t.leaf(x, false), t.leaf(w, false), t.leaf(b, false));
  CHECK(t.val(y).same_bits(x));

  Rng rng(31);
  for (int it = 0; it < 10; ++it) {
    const int64_t n = 1 + int64_t(rng.below(4)), in = 1 + int64_t(rng.below(6)),
                  out = 1 + int64_t(rng.below(6));
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::dense(tp, v[0], v[1], v[2]), 900 + uint64_t(it));
        },
        {ivl::uniform_tensor<double>({n, in}, rng, -1, 1),
         ivl::uniform_tensor<double>({in, out}, rng, -1, 1),
         ivl::uniform_tensor<double>({out}, rng, -1, 1)});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("conv2d gradients vs finite differences") {
  Rng rng(32);
  for (int it = 0; it < 8; ++it) {
    const int64_t n = 1 + int64_t(rng.below(2)), ci = 1 + int64_t(rng.below(3)),
                  co = 1 + int64_t(rng.below(3));
    const int64_t h = 5 + int64_t(rng.below(4)), w = 5 + int64_t(rng.below(4));
    const int64_t stride = 1 + int64_t(rng.below(2)), pad = int64_t(rng.below(2));
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::conv2d(tp, v[0], v[1], v[2], stride, pad), 910 + uint64_t(it));
        },
        {ivl::uniform_tensor<double>({n, ci, h, w}, rng, -1, 1),
         ivl::uniform_tensor<double>({co, ci, 3, 3}, rng, -1, 1),
         ivl::uniform_tensor<double>({co}, rng, -1, 1)});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("relu / sigmoid / upsample / reshape gradients") {
  Rng rng(33);
  for (int it = 0; it < 10; ++it) {
    auto x = ivl::uniform_tensor<double>({3, 7}, rng, -2, 2);
    auto r1 = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::relu(tp, v[0]), 920 + uint64_t(it));
        },
        {x});
    CHECK(r1.max_rel_err < 1e-4);
    auto r2 = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::sigmoid(tp, v[0]), 930 + uint64_t(it));
        },
        {x});
    CHECK(r2.max_rel_err < 1e-4);
    auto u = ivl::uniform_tensor<double>({2, 2, 3, 3}, rng, -1, 1);
    auto r3 = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::upsample2x(tp, v[0]), 940 + uint64_t(it));
        },
        {u});
    CHECK(r3.max_rel_err < 1e-4);
    auto r4 = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::reshape(tp, v[0], Shape{7, 3}), 950 + uint64_t(it));
        },
        {x});
    CHECK(r4.max_rel_err < 1e-4);
  }
}

TEST_CASE("reparameterize: closed forms and gradients") {
  {
    ad::Tape<float> t;
    Tensor<float> mu({1, 3}, {0.5f, -1.0f, 2.0f});
    Tensor<float> lv({1, 3});
    Tensor<float> eps({1, 3});
    const ad::Var z = ad::reparameterize(t, t.leaf(mu, false), t.leaf(lv, false), t.leaf(eps, false));
    CHECK(t.val(z).same_bits(mu));  // eps = 0 -> z = mu
  }
  {
    ad::Tape<float> t;
    Tensor<float> mu({1, 2}, {0.25f, -0.5f});
    Tensor<float> lv({1, 2});
    Tensor<float> eps({1, 2}, {1.0f, 1.0f});
    const ad::Var z = ad::reparameterize(t, t.leaf(mu, false), t.leaf(lv, false), t.leaf(eps, false));
    CHECK(t.val(z)[0] == doctest::Approx(1.25f));  // logvar = 0, eps = 1 -> mu + 1
    CHECK(t.val(z)[1] == doctest::Approx(0.5f));
  }
  {
    // d(sum z)/d logvar at logvar = 0 is eps/2, hand-differentiated
    ad::Tape<double> t;
    Tensor<double> mu({1, 4});
    Tensor<double> lv({1, 4});
    Tensor<double> eps({1, 4}, {0.3, -1.2, 2.0, 0.9});
    const ad::Var lvv = t.leaf(lv, true);
    const ad::Var z = ad::reparameterize(t, t.leaf(mu, false), lvv, t.leaf(eps, false));
    t.backward(ad::sum(t, z));
    for (int i = 0; i < 4; ++i) CHECK(t.grad(lvv)[i] == doctest::Approx(eps[i] / 2).epsilon(1e-12));
  }
  Rng rng(34);
  for (int it = 0; it < 10; ++it) {
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::reparameterize(tp, v[0], v[1], v[2]), 960 + uint64_t(it));
        },
        {ivl::uniform_tensor<double>({2, 5}, rng, -1, 1),
         ivl::uniform_tensor<double>({2, 5}, rng, -1, 1),
         ivl::uniform_tensor<double>({2, 5}, rng, -1, 1)});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("kl_diag_gaussian: closed forms, non-negativity, gradients") {
  auto kl_of = [](std::vector<float> mu, std::vector<float> lv) {
    ad::Tape<float> t;
    const int64_t d = int64_t(mu.size());
    return t.val(ad::kl_diag_gaussian(t, t.leaf(Tensor<float>({1, d}, std::move(mu)), false),
                                      t.leaf(Tensor<float>({1, d}, std::move(lv)), false)))[0];
  };
  CHECK(kl_of({0, 0, 0}, {0, 0, 0}) == 0.0f);
  CHECK(kl_of({1}, {0}) == doctest::Approx(0.5));
  CHECK(kl_of({0}, {1}) == doctest::Approx((std::exp(1.0) - 2.0) / 2.0));  // ~0.35914

  Rng rng(35);
  for (int it = 0; it < 20; ++it) {
    std::vector<float> mu(4), lv(4);
    for (auto& v : mu) v = float(rng.uniform(-3, 3));
    for (auto& v : lv) v = float(rng.uniform(-3, 3));
    CHECK(kl_of(mu, lv) >= 0.0f);
  }
  for (int it = 0; it < 10; ++it) {
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return ad::kl_diag_gaussian(tp, v[0], v[1]);
        },
        {ivl::uniform_tensor<double>({3, 4}, rng, -1, 1),
         ivl::uniform_tensor<double>({3, 4}, rng, -1, 1)});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("bernoulli_ce: clamping and gradients") {
  {
    ad::Tape<float> t;
    Tensor<float> x({1, 4}, {0.0f, 1.0f, 0.0f, 1.0f});
    Tensor<float> r({1, 4}, {0.0f, 1.0f, 1.0f, 0.0f});  // exact 0/1 must be clamped, not inf
    const ad::Var ce = ad::bernoulli_ce(t, t.leaf(r, false), t.leaf(x, false));
    CHECK(std::isfinite(t.val(ce)[0]));
  }
  Rng rng(36);
  for (int it = 0; it < 10; ++it) {
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return ad::bernoulli_ce(tp, v[0], v[1]);
        },
        {ivl::uniform_tensor<double>({2, 6}, rng, 0.05, 0.95),
         ivl::uniform_tensor<double>({2, 6}, rng, 0, 1)});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("row_normalize: unit rows, degenerate error, gradients") {
  Rng rng(37);
  {
    ad::Tape<float> t;
    auto x = ivl::uniform_tensor<float>({5, 2}, rng, -2, 2);
    const ad::Var y = ad::row_normalize(t, t.leaf(x, false));
    for (int64_t r = 0; r < 5; ++r) {
      const double n = std::hypot(double(t.val(y)[r * 2]), double(t.val(y)[r * 2 + 1]));
      CHECK(n == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  {
    ad::Tape<float> t;
    Tensor<float> x({1, 2});  // zero row
    CHECK_THROWS_AS(ad::row_normalize(t, t.leaf(x, false)), ivl::Error);
  }
  for (int it = 0; it < 10; ++it) {
    auto x = ivl::uniform_tensor<double>({3, 2}, rng, -2, 2);
    for (auto& v : x.data) v += (v >= 0 ? 0.3 : -0.3);  // keep rows away from zero
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return weighted(tp, ad::row_normalize(tp, v[0]), 970 + uint64_t(it));
        },
        {x});
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("squared_distance / add / mul / scale gradients") {
  Rng rng(38);
  for (int it = 0; it < 10; ++it) {
    auto res = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return ad::squared_distance(tp, v[0], v[1]);
        },
        {ivl::uniform_tensor<double>({3, 5}, rng, -1, 1),
         ivl::uniform_tensor<double>({3, 5}, rng, -1, 1)});
    CHECK(res.max_rel_err < 1e-4);
    auto res2 = grad_check(
        [&](ad::Tape<double>& tp, const std::vector<ad::Var>& v) {
          return ad::sum(tp, ad::mul(tp, ad::add(tp, v[0], v[1]), ad::scale(tp, v[0], 0.7)));
        },
        {ivl::uniform_tensor<double>({2, 4}, rng, -1, 1),
         ivl::uniform_tensor<double>({2, 4}, rng, -1, 1)});
    CHECK(res2.max_rel_err < 1e-4);
  }
  ad::Tape<float> t;
  Tensor<float> a({1, 3}, {1, 0, 0});
  Tensor<float> b({1, 3});
  CHECK(t.val(ad::squared_distance(t, t.leaf(a, false), t.leaf(b, false)))[0] == 1.0f);
}

TEST_CASE("adam: single-step hand computation") {
  // param 0, g = 1, lr = 0.1: mhat = vhat = 1, step = -lr / (1 + eps)
  nn::AdamState<double> st;
  st.cfg.lr = 0.1;
  st.cfg.beta1 = 0.9;
  st.cfg.beta2 = 0.999;
  st.cfg.eps = 1e-8;
  st.init({Shape{1}});
  Tensor<double> p({1});
  Tensor<double> g({1});
  g[0] = 1.0;
  st.step({&p}, {&g}, {"p"});
  CHECK(std::abs(p[0] + 0.1) < 1e-8);
  CHECK(st.t == 1);
}

TEST_CASE("adam: zero gradients leave parameters unchanged") {
  nn::AdamState<float> st;
  st.init({Shape{3}});
  Tensor<float> p({3}, {1.0f, -2.0f, 0.5f});
  const Tensor<float> before = p;
  Tensor<float> g({3});
  for (int i = 0; i < 5; ++i) st.step({&p}, {&g}, {"p"});
  CHECK(p.same_bits(before));
}

TEST_CASE("adam: NaN gradient aborts naming the parameter") {
  nn::AdamState<float> st;
  st.init({Shape{2}});
  Tensor<float> p({2});
  Tensor<float> g({2});
  g[1] = std::nanf("");
  try {
    st.step({&p}, {&g}, {"enc.fc.w"});
    FAIL("expected an error");
  } catch (const ivl::Error& e) {
    CHECK(std::string(e.what()).find("enc.fc.w") != std::string::npos);
  }
}

TEST_CASE("adam: 200 steps on (x-3)^2 converge") {
  nn::AdamState<float> st;
  st.cfg.lr = 0.1f;
  st.init({Shape{1}});
  Tensor<float> x({1});
  for (int i = 0; i < 200; ++i) {
    Tensor<float> g({1});
    g[0] = 2.0f * (x[0] - 3.0f);
    st.step({&x}, {&g}, {"x"});
  }
  CHECK(std::abs(x[0] - 3.0f) < 0.05f);
}

TEST_CASE("adam: identical runs are bitwise identical") {
  auto run = [] {
    Rng rng(77);
    nn::AdamState<float> st;
    st.init({Shape{8}});
    Tensor<float> p = ivl::uniform_tensor<float>({8}, rng, -1, 1);
    for (int i = 0; i < 50; ++i) {
      Tensor<float> g = ivl::uniform_tensor<float>({8}, rng, -1, 1);
      st.step({&p}, {&g}, {"p"});
    }
    return p;
  };
  CHECK(run().same_bits(run()));
}

TEST_CASE("param init: glorot bounds and determinism") {
  std::vector<nn::ParamSpec> specs = {
      {"w", {64, 32}, nn::Init::kGlorot, 0.0, 64, 32},
      {"b", {32}, nn::Init::kZero},
      {"pose_b", {2}, nn::Init::kUnitX},
  };
  const auto p1 = nn::init_params(specs, 123);
  const auto p2 = nn::init_params(specs, 123);
  CHECK(p1.same_bits(p2));
  const double bound = std::sqrt(6.0 / (64 + 32));
  for (float v : p1.at("w").data) {
    REQUIRE(std::abs(v) <= bound);
  }
  for (float v : p1.at("b").data) REQUIRE(v == 0.0f);
  CHECK(p1.at("pose_b")[0] == 1.0f);
  CHECK(p1.at("pose_b")[1] == 0.0f);
  const auto p3 = nn::init_params(specs, 124);
  CHECK(!p1.same_bits(p3));
}

TEST_CASE("tape: backward skips unreachable branches and leaves") {
  ad::Tape<float> t;
  const ad::Var a = t.leaf(Tensor<float>({1, 2}, {1, 2}), true);
  const ad::Var b = t.leaf(Tensor<float>({1, 2}, {3, 4}), true);
  const ad::Var used = ad::scale(t, a, 2.0f);
  ad::scale(t, b, 5.0f);  // dead branch
  t.backward(ad::sum(t, used));
  CHECK(t.grad(a)[0] == 2.0f);
  CHECK(!t.grad_touched(b));
}
