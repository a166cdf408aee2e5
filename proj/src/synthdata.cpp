#include "ivl/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace fs = std::filesystem;

namespace ivl::synth {

namespace {

constexpr double kPi = std::numbers::pi;

struct Vec2 {
  double x = 0, y = 0;
};

double sd_disk(Vec2 p, Vec2 c, double r) { return std::hypot(p.x - c.x, p.y - c.y) - r; }

double sd_ring(Vec2 p, Vec2 c, double r, double w) {
  return std::abs(std::hypot(p.x - c.x, p.y - c.y) - r) - w / 2;
}

double sd_capsule(Vec2 p, Vec2 a, Vec2 b, double r) {
  const double bax = b.x - a.x, bay = b.y - a.y;
  const double pax = p.x - a.x, pay = p.y - a.y;
  const double len2 = bax * bax + bay * bay;
  double t = len2 > 0 ? (pax * bax + pay * bay) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(pax - t * bax, pay - t * bay) - r;
}

// filled star: radius modulated by cos(k * phi)
double sd_star(Vec2 p, Vec2 c, double r0, double amp, int k) {
  const double dx = p.x - c.x, dy = p.y - c.y;
  const double phi = std::atan2(dy, dx);
  return std::hypot(dx, dy) - (r0 + amp * std::cos(k * phi));
}

double sd_arc(Vec2 p, Vec2 c, double r, double w, double a0, double a1) {
  // polyline approximation, good to a fraction of a pixel at these radii
  const int segs = 24;
  double d = 1e9;
  Vec2 prev{c.x + r * std::cos(a0), c.y + r * std::sin(a0)};
  for (int i = 1; i <= segs; ++i) {
    const double a = a0 + (a1 - a0) * double(i) / segs;
    Vec2 cur{c.x + r * std::cos(a), c.y + r * std::sin(a)};
    d = std::min(d, sd_capsule(p, prev, cur, w / 2));
    prev = cur;
  }
  return d;
}

double coverage(double d, double aa = 1.1) { return std::clamp(0.5 - d / aa, 0.0, 1.0); }

struct GlyphParams {
  double scale = 1.0;
  double thick = 1.5;
  double intensity = 1.0;
  Vec2 jitter;
  double extra[4] = {0, 0, 0, 0};
};

// Signed distance of one glyph class at canvas point p (origin at image
// center, y down). Classes are chosen to be mutually distinct while mostly
// rotation-asymmetric, so pose matters for a non-invariant embedding.
double glyph_sdf(GlyphSet set, int cls, Vec2 p, const GlyphParams& gp) {
  const double s = gp.scale;
  const double th = gp.thick;
  auto P = [&](double x, double y) { return Vec2{x * s, y * s}; };
  const Vec2 c{0, 0};
  if (set == GlyphSet::kA) {
    switch (cls) {
      case 0:  // bar
        return sd_capsule(p, P(-7.5, 0), P(7.5, 0), th);
      case 1: {  // triangle outline
        const double r = 7.4 * s;
        Vec2 v[3];
        for (int i = 0; i < 3; ++i) {
          const double a = -kPi / 2 + 2 * kPi * i / 3;
          v[i] = Vec2{r * std::cos(a), r * std::sin(a)};
        }
        double d = 1e9;
        for (int i = 0; i < 3; ++i) d = std::min(d, sd_capsule(p, v[i], v[(i + 1) % 3], th * 0.8));
        return d;
      }
      case 2: {  // square outline
        const double a = 5.6 * s;
        double d = 1e9;
        const Vec2 v[4] = {{-a, -a}, {a, -a}, {a, a}, {-a, a}};
        for (int i = 0; i < 4; ++i) d = std::min(d, sd_capsule(p, v[i], v[(i + 1) % 4], th * 0.8));
        return d;
      }
      case 3:  // five-point star
        return sd_star(p, c, 5.0 * s, gp.extra[0] * s, 5);
      case 4: {  // cross
        const double l = 7.0 * s;
        return std::min(sd_capsule(p, P(-l / s, 0), P(l / s, 0), th),
                        sd_capsule(p, P(0, -l / s), P(0, l / s), th));
      }
      case 5: {  // crescent
        const double r = 6.8 * s;
        return std::max(sd_disk(p, c, r), -sd_disk(p, Vec2{0.45 * r, 0}, 0.8 * r));
      }
      case 6: {  // three-dot constellation (scalene)
        const double rho = 6.2 * s, r = gp.extra[0] * s;
        double d = 1e9;
        const double angs[3] = {0.0, 100.0 * kPi / 180, 170.0 * kPi / 180};
        for (double a : angs)
          d = std::min(d, sd_disk(p, Vec2{rho * std::cos(a), rho * std::sin(a)}, r));
        return d;
      }
      case 7: {  // T
        const double hw = 6.2 * s, top = -4.5 * s;
        return std::min(sd_capsule(p, Vec2{-hw, top}, Vec2{hw, top}, th),
                        sd_capsule(p, Vec2{0, top}, Vec2{0, 7.0 * s}, th));
      }
      case 8: {  // L
        const double hx = 4.6 * s, hy = 5.8 * s;
        return std::min(sd_capsule(p, Vec2{-hx, -hy}, Vec2{-hx, hy}, th),
                        sd_capsule(p, Vec2{-hx, hy}, Vec2{hx + 1.2 * s, hy}, th));
      }
      default: {  // C: ring with a gap at angle 0
        const double gap = 0.75;
        return sd_arc(p, c, 6.6 * s, th * 2, gap, 2 * kPi - gap);
      }
    }
  }
  switch (cls) {
    case 0: {  // two parallel bars
      const double g = gp.extra[0] * s, l = 6.4 * s;
      return std::min(sd_capsule(p, Vec2{-l, -g}, Vec2{l, -g}, th),
                      sd_capsule(p, Vec2{-l, g}, Vec2{l, g}, th));
    }
    case 1:  // V
      return std::min(sd_capsule(p, P(0, 6), P(-5.6, -6.4), th),
                      sd_capsule(p, P(0, 6), P(5.6, -6.4), th));
    case 2:  // dot over bar
      return std::min(sd_disk(p, P(0, -5.2), gp.extra[0] * s),
                      sd_capsule(p, P(-6.4, 3.6), P(6.4, 3.6), th));
    case 3:  // three-point star
      return sd_star(p, c, 4.7 * s, gp.extra[0] * s, 3);
    case 4: {  // triangle outline with center dot
      const double r = 6.8 * s;
      Vec2 v[3];
      for (int i = 0; i < 3; ++i) {
        const double a = -kPi / 2 + 2 * kPi * i / 3;
        v[i] = Vec2{r * std::cos(a), r * std::sin(a)};
      }
      double d = sd_disk(p, c, 1.9 * s);
      for (int i = 0; i < 3; ++i) d = std::min(d, sd_capsule(p, v[i], v[(i + 1) % 3], th * 0.75));
      return d;
    }
    case 5:  // half disk
      return std::max(sd_disk(p, c, 6.4 * s), -(p.y - 0.4 * s));
    case 6: {  // four dots, uneven spacing
      const double rho = 6.3 * s, r = gp.extra[0] * s;
      const double angs[4] = {0.0, 70 * kPi / 180, 140 * kPi / 180, 250 * kPi / 180};
      double d = 1e9;
      for (double a : angs)
        d = std::min(d, sd_disk(p, Vec2{rho * std::cos(a), rho * std::sin(a)}, r));
      return d;
    }
    case 7: {  // zigzag of three offset bars
      const double l = 4.6 * s, dy = 4.8 * s, off = 2.4 * s;
      double d = sd_capsule(p, Vec2{-l - off, -dy}, Vec2{l - off, -dy}, th);
      d = std::min(d, sd_capsule(p, Vec2{-l + off, 0}, Vec2{l + off, 0}, th));
      return std::min(d, sd_capsule(p, Vec2{-l - off, dy}, Vec2{l - off, dy}, th));
    }
    case 8:  // ring with off-center inner dot
      return std::min(sd_ring(p, c, 6.7 * s, th * 2), sd_disk(p, Vec2{2.1 * s, 0}, 1.9 * s));
    default:  // comet: head disk with a tail
      return std::min(sd_disk(p, P(3.4, 0), 3.4 * s),
                      sd_capsule(p, P(1.0, 0), P(-7.6, 0), th * 0.8));
  }
}

float quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return float(std::lround(c * 255.0)) / 255.0f;
}

}  // namespace

ingest::RawDataset make_glyphs(GlyphSet set, int64_t n, uint64_t seed, int64_t side,
                               const std::string& name) {
  IVL_CHECK(n >= 1 && side >= 16, "make_glyphs: need n >= 1 and side >= 16");
  ingest::RawDataset ds;
  ds.name = name;
  ds.images = Tensor<float>({n, side, side});
  ds.labels.resize(size_t(n));
  const double cx = double(side - 1) / 2;
  const double unit = double(side) / 28.0;  // shape sizes are tuned on a 28px canvas

  for (int64_t i = 0; i < n; ++i) {
    const int cls = int(i % 10);
    ds.labels[size_t(i)] = cls;
    Rng rng = Rng::derive(seed, uint64_t(set == GlyphSet::kA ? 0xA : 0xB), uint64_t(i));
    GlyphParams gp;
    gp.scale = rng.uniform(0.85, 1.15) * unit;
    gp.thick = rng.uniform(1.2, 1.9) * unit;
    gp.intensity = rng.uniform(0.75, 1.0);
    gp.jitter = {rng.uniform(-1.0, 1.0) * unit, rng.uniform(-1.0, 1.0) * unit};
    gp.extra[0] = rng.uniform(0, 1);
    // class-specific extras share the draw above so streams stay aligned
    if (set == GlyphSet::kA) {
      if (cls == 3) gp.extra[0] = 2.2 + gp.extra[0];        // star amplitude
      if (cls == 6) gp.extra[0] = 1.7 + 0.5 * gp.extra[0];  // dot radius
    } else {
      if (cls == 0) gp.extra[0] = 3.6 + 1.6 * gp.extra[0];  // bar gap
      if (cls == 2) gp.extra[0] = 1.9 + 0.6 * gp.extra[0];  // dot radius
      if (cls == 3) gp.extra[0] = 2.4 + gp.extra[0];        // star amplitude
      if (cls == 6) gp.extra[0] = 1.5 + 0.4 * gp.extra[0];  // dot radius
    }
    const double noise_amp = 0.04;
    float* px = ds.images.ptr() + i * side * side;
    for (int64_t y = 0; y < side; ++y) {
      for (int64_t x = 0; x < side; ++x) {
        const Vec2 p{double(x) - cx - gp.jitter.x, double(y) - cx - gp.jitter.y};
        const double d = glyph_sdf(set, cls, p, gp);
        double v = gp.intensity * coverage(d, 1.1 * unit);
        v += noise_amp * rng.uniform();
        px[y * side + x] = quantize(v);
      }
    }
  }
  ds.validate();
  return ds;
}

ingest::RawDataset make_faces(int64_t n_identities, int64_t imgs_per_identity, uint64_t seed,
                              int64_t side, const std::string& name) {
  IVL_CHECK(n_identities >= 2 && imgs_per_identity >= 1, "make_faces: need >= 2 identities");
  ingest::RawDataset ds;
  ds.name = name;
  const int64_t n = n_identities * imgs_per_identity;
  ds.images = Tensor<float>({n, side, side});
  const double u = double(side) / 120.0;  // geometry tuned on a 120px canvas
  for (int64_t id = 0; id < n_identities; ++id) ds.label_names.push_back(strfmt("person_%04lld", (long long)id));

  for (int64_t id = 0; id < n_identities; ++id) {
    Rng irng = Rng::derive(seed, 0xFACEull, uint64_t(id));
    const double head_a = irng.uniform(23, 30) * u;
    const double head_b = irng.uniform(29, 37) * u;
    const double skin = irng.uniform(0.55, 0.8);
    const double eye_dx = irng.uniform(0.36, 0.56) * head_a;
    const double eye_dy = -irng.uniform(0.18, 0.36) * head_b;
    const double eye_r = irng.uniform(2.0, 3.8) * u;
    const double eye_level = irng.uniform(0.05, 0.22);
    const double brow_tilt = irng.uniform(-0.35, 0.35);
    const double brow_th = irng.uniform(0.9, 1.7) * u;
    const double brow_gap = irng.uniform(4.0, 7.0) * u;
    const double nose_len = irng.uniform(5.0, 10.0) * u;
    const double nose_th = irng.uniform(1.0, 1.9) * u;
    const double nose_shade = irng.uniform(-0.14, 0.14);
    const double mouth_y = irng.uniform(0.38, 0.58) * head_b;
    const double mouth_hw = irng.uniform(6.0, 11.0) * u;
    const double mouth_curve = irng.uniform(-2.6, 2.6) * u;
    const double mouth_level = irng.uniform(0.12, 0.32);
    const double hairline = -irng.uniform(0.30, 0.52) * head_b;
    const double hair_factor = irng.uniform(0.3, 0.75);

    for (int64_t im = 0; im < imgs_per_identity; ++im) {
      const int64_t i = id * imgs_per_identity + im;
      ds.labels.push_back(int32_t(id));
      Rng prng = Rng::derive(seed ^ 0x1111, uint64_t(id), uint64_t(im));
      const double bright = prng.uniform(0.92, 1.08);
      const double jx = prng.uniform(-0.8, 0.8) * u, jy = prng.uniform(-0.8, 0.8) * u;
      const double cx = double(side - 1) / 2 + jx;
      const double cy = double(side - 1) / 2 + 2 * u + jy;
      float* px = ds.images.ptr() + i * side * side;
      for (int64_t y = 0; y < side; ++y) {
        for (int64_t x = 0; x < side; ++x) {
          const Vec2 p{double(x) - cx, double(y) - cy};
          const double rad = std::hypot(p.x / head_a, p.y / head_b);
          const double d_head = (rad - 1.0) * std::min(head_a, head_b);
          const double a_head = coverage(d_head, 1.4 * u);
          double v = skin;
          // hair: darken above the hairline with a soft 2px edge
          const double hair_mix = std::clamp(0.5 - (p.y - hairline) / (2.0 * u), 0.0, 1.0);
          v *= 1.0 - hair_mix * (1.0 - hair_factor);
          // eyes
          for (int e = -1; e <= 1; e += 2) {
            const Vec2 ec{e * eye_dx, eye_dy};
            const double a = coverage(sd_disk(p, ec, eye_r), 1.0 * u);
            v = v * (1 - a) + eye_level * a;
            // brow
            const Vec2 b0{ec.x - 3.2 * u, ec.y - brow_gap - e * brow_tilt * 3.2 * u};
            const Vec2 b1{ec.x + 3.2 * u, ec.y - brow_gap + e * brow_tilt * 3.2 * u};
            const double ab = coverage(sd_capsule(p, b0, b1, brow_th), 1.0 * u);
            v = v * (1 - ab) + 0.15 * ab;
          }
          // nose
          {
            const double an = coverage(sd_capsule(p, Vec2{0, -1 * u}, Vec2{0, -1 * u + nose_len}, nose_th),
                                       1.0 * u);
            const double lvl = std::clamp(skin + nose_shade, 0.0, 1.0);
            v = v * (1 - an) + lvl * an;
          }
          // mouth: polyline through a curved midpoint
          {
            const Vec2 m0{-mouth_hw, mouth_y}, m1{0, mouth_y + mouth_curve}, m2{mouth_hw, mouth_y};
            double dm = std::min(sd_capsule(p, m0, m1, 1.2 * u), sd_capsule(p, m1, m2, 1.2 * u));
            const double am = coverage(dm, 1.0 * u);
            v = v * (1 - am) + mouth_level * am;
          }
          v *= a_head * bright;
          v += 0.03 * prng.uniform();
          px[y * side + x] = quantize(v);
        }
      }
    }
  }
  ds.validate();
  return ds;
}

void write_idx_files(const ingest::RawDataset& ds, const std::string& images_path,
                     const std::string& labels_path) {
  ds.validate();
  IVL_CHECK(ds.label_names.empty(), "IDX labels are plain u8 class ids; identity datasets need a face tree");
  ingest::IdxData imgs;
  imgs.dims = {ds.count(), ds.height(), ds.width()};
  imgs.data.reserve(size_t(ds.images.size()));
  for (float v : ds.images.data) imgs.data.push_back(uint8_t(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  ingest::IdxData labs;
  labs.dims = {ds.count()};
  for (int32_t l : ds.labels) {
    IVL_CHECK(l >= 0 && l <= 255, "IDX label %d out of u8 range", l);
    labs.data.push_back(uint8_t(l));
  }
  const auto ib = ingest::serialize_idx(imgs);
  const auto lb = ingest::serialize_idx(labs);
  write_file_bytes(images_path, ib.data(), ib.size());
  write_file_bytes(labels_path, lb.data(), lb.size());
}

void write_face_tree(const ingest::RawDataset& ds, const std::string& root) {
  ds.validate();
  IVL_CHECK(!ds.label_names.empty(), "face tree needs identity labels");
  fs::create_directories(root);
  std::vector<int> counter(ds.label_names.size(), 0);
  for (int64_t i = 0; i < ds.count(); ++i) {
    const std::string& ident = ds.label_names[size_t(ds.labels[size_t(i)])];
    const fs::path dir = fs::path(root) / ident;
    fs::create_directories(dir);
    const std::string fname = strfmt("img_%03d.pgm", counter[size_t(ds.labels[size_t(i)])]++);
    ingest::write_pgm((dir / fname).string(), ds.image(i));
  }
}

}  // namespace ivl::synth
