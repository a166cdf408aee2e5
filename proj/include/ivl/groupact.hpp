#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "ivl/rng.hpp"
#include "ivl/tensor.hpp"

namespace ivl::group {

// A planar rotation stored as a unit vector (cos theta, sin theta).
struct GroupElement {
  double c = 1.0;
  double s = 0.0;

  static GroupElement identity() { return {1.0, 0.0}; }
  static GroupElement from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

  // exact k*90-degree rotation; grid-aligned, so no interpolation
  static GroupElement quarter_turn(int k) {
    static const double cs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int i = ((k % 4) + 4) % 4;
    return {cs[i][0], cs[i][1]};
  }

  GroupElement compose(const GroupElement& o) const {
    return {c * o.c - s * o.s, s * o.c + c * o.s};
  }
  GroupElement inverse() const { return {c, -s}; }
  double angle() const {
    double a = std::atan2(s, c);
    if (a < 0) a += 2.0 * std::numbers::pi;
    return a;
  }
  double norm_err() const { return std::abs(c * c + s * s - 1.0); }
  bool is_unit(double tol = 1e-6) const { return norm_err() <= tol; }
};

// Uniform angles over [0, 2pi), deterministic given the seed.
class AngleSampler {
 public:
  explicit AngleSampler(uint64_t seed) : rng_(Rng::derive(seed, 0x616e676c65ull)) {}

  double next_angle() { return rng_.uniform() * 2.0 * std::numbers::pi; }
  GroupElement next() { return GroupElement::from_angle(next_angle()); }

 private:
  Rng rng_;
};

// Bilinear rotation of a single-channel image (shape [h, w]) about the pixel
// center; source samples outside the image read as zero. Total function.
Tensor<float> rotate_image(const Tensor<float>& img, const GroupElement& g);

}  // namespace ivl::group
