#include "ivl/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace ivl::report {

ScatterSheet latent_scatter(const models::VaeModel& model, const ingest::RawDataset& ds,
                            group::AngleSampler& sampler, int64_t n, uint64_t seed) {
  IVL_VALIDATE(model.config().latent_dim == 2, "latent_scatter needs latent_dim = 2, model has %lld",
               (long long)model.config().latent_dim);
  IVL_VALIDATE(n >= 0 && n <= ds.count(), "scatter size %lld exceeds dataset size %lld", (long long)n,
               (long long)ds.count());
  std::vector<int64_t> idx(size_t(ds.count()));
  for (int64_t i = 0; i < ds.count(); ++i) idx[size_t(i)] = i;
  Rng rng = Rng::derive(seed, 0x73636174ull);
  shuffle(idx, rng);
  idx.resize(size_t(n));

  ScatterSheet sheet;
  sheet.model_id = model.config().invariant ? "invariant" : "vanilla";
  sheet.domain_id = ds.provenance.valid ? ds.provenance.side : ds.name;
  const int64_t side = ds.height();
  for (int64_t i = 0; i < n; ++i) {
    const double theta = sampler.next_angle();
    Tensor<float> img = group::rotate_image(ds.image(idx[size_t(i)]), group::GroupElement::from_angle(theta));
    Tensor<float> batch({1, side, side});
    batch.data = img.data;
    const Tensor<float> mu = model.embed_batch(batch);
    sheet.points.push_back({mu[0], mu[1], ds.labels[size_t(idx[size_t(i)])], theta});
  }
  return sheet;
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0 || sbb <= 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

double circular_linear_correlation(const ScatterSheet& sheet) {
  IVL_CHECK(sheet.points.size() >= 3, "circular-linear correlation needs >= 3 points");
  std::vector<double> c, s;
  for (const auto& p : sheet.points) {
    c.push_back(std::cos(p.theta));
    s.push_back(std::sin(p.theta));
  }
  const double rcs = pearson(c, s);
  double best = 0;
  for (int coord = 0; coord < 2; ++coord) {
    std::vector<double> x;
    for (const auto& p : sheet.points) x.push_back(coord == 0 ? double(p.z1) : double(p.z2));
    const double rxc = pearson(x, c), rxs = pearson(x, s);
    const double denom = 1.0 - rcs * rcs;
    if (denom <= 1e-12) continue;
    const double r2 = (rxc * rxc + rxs * rxs - 2.0 * rxc * rxs * rcs) / denom;
    best = std::max(best, std::sqrt(std::max(0.0, r2)));
  }
  return best;
}

double silhouette_by_class(const ScatterSheet& sheet) {
  const auto& pts = sheet.points;
  IVL_CHECK(pts.size() >= 2, "silhouette needs >= 2 points");
  std::map<int32_t, std::vector<size_t>> by_class;
  for (size_t i = 0; i < pts.size(); ++i) by_class[pts[i].label].push_back(i);
  IVL_CHECK(by_class.size() >= 2, "silhouette needs >= 2 classes");

  auto dist = [&](size_t i, size_t j) {
    const double dx = double(pts[i].z1) - double(pts[j].z1);
    const double dy = double(pts[i].z2) - double(pts[j].z2);
    return std::sqrt(dx * dx + dy * dy);
  };

  double total = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const auto& own = by_class[pts[i].label];
    if (own.size() < 2) continue;  // convention: singleton clusters score 0
    double a = 0;
    for (size_t j : own)
      if (j != i) a += dist(i, j);
    a /= double(own.size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (const auto& [cls, members] : by_class) {
      if (cls == pts[i].label) continue;
      double m = 0;
      for (size_t j : members) m += dist(i, j);
      b = std::min(b, m / double(members.size()));
    }
    const double denom = std::max(a, b);
    if (denom > 0) total += (b - a) / denom;
  }
  return total / double(pts.size());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (eol > pos) lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

}  // namespace

void write_scatter_csv(const std::string& path, const ScatterSheet& sheet) {
  std::string out = "z1,z2,label,theta\n";
  for (const auto& p : sheet.points)
    out += strfmt("%.9g,%.9g,%d,%.17g\n", double(p.z1), double(p.z2), p.label, p.theta);
  write_file_text(path, out);
}

ScatterSheet read_scatter_csv(const std::string& path) {
  const auto lines = csv_lines(read_file_text(path));
  IVL_VALIDATE(!lines.empty() && lines[0] == "z1,z2,label,theta", "%s: not a scatter csv", path.c_str());
  ScatterSheet sheet;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    IVL_VALIDATE(f.size() == 4, "%s: malformed row '%s'", path.c_str(), lines[i].c_str());
    ScatterPoint p;
    p.z1 = std::stof(f[0]);
    p.z2 = std::stof(f[1]);
    p.label = int32_t(std::stol(f[2]));
    p.theta = std::stod(f[3]);
    sheet.points.push_back(p);
  }
  return sheet;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepSeries>& series) {
  std::string out = "n_train_classes,auc,model\n";
  for (const auto& s : series)
    for (size_t i = 0; i < s.n_classes.size(); ++i)
      out += strfmt("%lld,%.17g,%s\n", (long long)s.n_classes[i], s.auc[i], s.model_id.c_str());
  write_file_text(path, out);
}

std::vector<SweepSeries> read_sweep_csv(const std::string& path) {
  const auto lines = csv_lines(read_file_text(path));
  IVL_VALIDATE(!lines.empty() && lines[0] == "n_train_classes,auc,model", "%s: not a sweep csv",
               path.c_str());
  std::vector<SweepSeries> series;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    IVL_VALIDATE(f.size() == 3, "%s: malformed row '%s'", path.c_str(), lines[i].c_str());
    auto it = std::find_if(series.begin(), series.end(),
                           [&](const SweepSeries& s) { return s.model_id == f[2]; });
    if (it == series.end()) {
      series.push_back({f[2], {}, {}});
      it = series.end() - 1;
    }
    it->n_classes.push_back(std::stoll(f[0]));
    it->auc.push_back(std::stod(f[1]));
  }
  return series;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

namespace {

constexpr int kW = 640, kH = 480;
constexpr double kMarginL = 70, kMarginR = 30, kMarginT = 50, kMarginB = 60;

const char* kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string hsv_hex(double h, double s, double v) {
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c; g = x;
  } else if (hp < 2) {
    r = x; g = c;
  } else if (hp < 3) {
    g = c; b = x;
  } else if (hp < 4) {
    g = x; b = c;
  } else if (hp < 5) {
    r = x; b = c;
  } else {
    r = c; b = x;
  }
  const double m = v - c;
  return strfmt("#%02x%02x%02x", int(std::lround((r + m) * 255)), int(std::lround((g + m) * 255)),
                int(std::lround((b + m) * 255)));
}

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double px(double x) const { return kMarginL + (x - x0) / (x1 - x0) * (kW - kMarginL - kMarginR); }
  double py(double y) const { return kH - kMarginB - (y - y0) / (y1 - y0) * (kH - kMarginT - kMarginB); }
};

std::string svg_header() {
  return strfmt("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n<rect width=\"%d\" height=\"%d\" fill=\"white\"/>\n",
                kW, kH, kW, kH, kW, kH);
}

std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel,
                 const std::string& title, int ticks = 5) {
  std::string s;
  s += strfmt("<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
              "text-anchor=\"middle\">%s</text>\n",
              kW / 2, title.c_str());
  s += strfmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
              f.px(f.x0), f.py(f.y0), f.px(f.x1), f.py(f.y0));
  s += strfmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
              f.px(f.x0), f.py(f.y0), f.px(f.x0), f.py(f.y1));
  for (int i = 0; i <= ticks; ++i) {
    const double tx = f.x0 + (f.x1 - f.x0) * i / ticks;
    const double ty = f.y0 + (f.y1 - f.y0) * i / ticks;
    s += strfmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                f.px(tx), f.py(f.y0), f.px(tx), f.py(f.y0) + 5);
    s += strfmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"middle\">%.2f</text>\n",
                f.px(tx), f.py(f.y0) + 18, tx);
    s += strfmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n",
                f.px(f.x0) - 5, f.py(ty), f.px(f.x0), f.py(ty));
    s += strfmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\" "
                "text-anchor=\"end\">%.2f</text>\n",
                f.px(f.x0) - 8, f.py(ty) + 4, ty);
  }
  s += strfmt("<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
              "text-anchor=\"middle\">%s</text>\n",
              kW / 2, kH - 14, xlabel.c_str());
  s += strfmt("<text x=\"18\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" "
              "text-anchor=\"middle\" transform=\"rotate(-90 18 %d)\">%s</text>\n",
              kH / 2, kH / 2, ylabel.c_str());
  return s;
}

}  // namespace

std::string render_roc_svg(const eval::RocCurve& curve, const std::string& title) {
  IVL_VALIDATE(!curve.fpr.empty(), "cannot render an empty ROC curve");
  Frame f{0, 1, 0, 1};
  std::string s = svg_header();
  s += axes(f, "false positive rate", "true positive rate", title);
  s += strfmt("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#bbbbbb\" "
              "stroke-dasharray=\"4 3\"/>\n",
              f.px(0), f.py(0), f.px(1), f.py(1));
  std::string path;
  for (size_t i = 0; i < curve.fpr.size(); ++i)
    path += strfmt("%s%.2f %.2f", i ? " L " : "M ", f.px(curve.fpr[i]), f.py(curve.tpr[i]));
  s += strfmt("<path d=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"2\"/>\n", path.c_str(),
              kPalette[0]);
  s += strfmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"13\">AUC = %.4f"
              "</text>\n",
              f.px(0.55), f.py(0.08), curve.auc);
  s += "</svg>\n";
  return s;
}

std::string render_sweep_svg(const std::vector<SweepSeries>& series, const std::string& title) {
  IVL_VALIDATE(!series.empty(), "cannot render an empty sweep");
  int64_t xmax = 1;
  for (const auto& s : series) {
    IVL_VALIDATE(!s.n_classes.empty(), "cannot render an empty sweep series");
    for (int64_t v : s.n_classes) xmax = std::max(xmax, v);
  }
  Frame f{0, double(xmax) + 1, 0, 1};
  std::string out = svg_header();
  out += axes(f, "training classes", "AUC", title);
  for (size_t si = 0; si < series.size(); ++si) {
    const char* color = kPalette[si % 10];
    std::string path;
    for (size_t i = 0; i < series[si].n_classes.size(); ++i) {
      path += strfmt("%s%.2f %.2f", i ? " L " : "M ", f.px(double(series[si].n_classes[i])),
                     f.py(series[si].auc[i]));
      out += strfmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"%s\"/>\n",
                    f.px(double(series[si].n_classes[i])), f.py(series[si].auc[i]), color);
    }
    out += strfmt("<path d=\"%s\" fill=\"none\" stroke=\"%s\" stroke-width=\"2\"/>\n", path.c_str(),
                  color);
    out += strfmt("<rect x=\"%.2f\" y=\"%.2f\" width=\"12\" height=\"12\" fill=\"%s\"/>\n",
                  f.px(f.x1) - 150.0, kMarginT + 10 + 20.0 * double(si), color);
    out += strfmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                  f.px(f.x1) - 132.0, kMarginT + 20 + 20.0 * double(si), series[si].model_id.c_str());
  }
  out += "</svg>\n";
  return out;
}

std::string render_scatter_svg(const ScatterSheet& sheet, ScatterColor mode, const std::string& title) {
  double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
  for (const auto& p : sheet.points) {
    x0 = std::min(x0, double(p.z1));
    x1 = std::max(x1, double(p.z1));
    y0 = std::min(y0, double(p.z2));
    y1 = std::max(y1, double(p.z2));
  }
  const double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  Frame f{x0 - padx, x1 + padx, y0 - pady, y1 + pady};
  std::string s = svg_header();
  s += axes(f, "z1", "z2", title);
  for (const auto& p : sheet.points) {
    std::string color;
    if (mode == ScatterColor::kByClass) {
      color = kPalette[((p.label % 10) + 10) % 10];
    } else {
      const double deg = std::fmod(p.theta / (2.0 * std::numbers::pi) * 360.0 + 360.0, 360.0);
      color = hsv_hex(deg, 0.85, 0.85);
    }
    s += strfmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.2\" fill=\"%s\" fill-opacity=\"0.8\"/>\n",
                f.px(double(p.z1)), f.py(double(p.z2)), color.c_str());
  }
  if (mode == ScatterColor::kByClass) {
    std::vector<int32_t> seen;
    for (const auto& p : sheet.points)
      if (std::find(seen.begin(), seen.end(), p.label) == seen.end()) seen.push_back(p.label);
    std::sort(seen.begin(), seen.end());
    for (size_t i = 0; i < seen.size() && i < 12; ++i) {
      s += strfmt("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"%s\"/>\n", double(kW - 90),
                  kMarginT + 12 + 16.0 * double(i), kPalette[((seen[i] % 10) + 10) % 10]);
      s += strfmt("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"11\">%d</text>\n",
                  double(kW - 80), kMarginT + 16 + 16.0 * double(i), seen[i]);
    }
  }
  s += "</svg>\n";
  return s;
}

}  // namespace ivl::report
