#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "ivl/report.hpp"
#include "ivl/synthdata.hpp"

using ivl::Rng;
using ivl::Tensor;
using namespace ivl::report;

namespace {

ivl::models::VaeModel latent2_model(uint64_t seed) {
  ivl::models::VaeConfig cfg;
  cfg.input_side = 16;
  cfg.latent_dim = 2;
  cfg.conv1_ch = 4;
  cfg.conv2_ch = 6;
  cfg.fc_dim = 16;
  cfg.invariant = true;
  return ivl::models::VaeModel(cfg, ivl::nn::init_params(ivl::models::param_specs(cfg), seed));
}

}  // namespace

TEST_CASE("latent_scatter: shapes, determinism, latent-dim guard") {
  const auto ds = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kA, 40, 3, 16, "sc");
  const auto model = latent2_model(21);
  ivl::group::AngleSampler s1(5), s2(5);
  const ScatterSheet a = latent_scatter(model, ds, s1, 25, 9);
  const ScatterSheet b = latent_scatter(model, ds, s2, 25, 9);
  REQUIRE(a.points.size() == 25);
  for (size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].z1 == b.points[i].z1);
    REQUIRE(a.points[i].theta == b.points[i].theta);
    REQUIRE(a.points[i].theta >= 0.0);
    REQUIRE(a.points[i].theta < 2 * std::numbers::pi);
  }

  // n = 0 is a valid empty sheet
  ivl::group::AngleSampler s3(5);
  CHECK(latent_scatter(model, ds, s3, 0, 9).points.empty());

  ivl::models::VaeConfig cfg10 = model.config();
  cfg10.latent_dim = 10;
  const ivl::models::VaeModel m10(cfg10, ivl::nn::init_params(ivl::models::param_specs(cfg10), 1));
  ivl::group::AngleSampler s4(5);
  CHECK_THROWS_AS(latent_scatter(m10, ds, s4, 5, 9), ivl::ValidationError);
}

TEST_CASE("scatter csv: lossless round trip reproduces the svg byte-for-byte") {
  const std::string dir = ivltest::tmpdir("report");
  const auto ds = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kA, 40, 3, 16, "sc");
  const auto model = latent2_model(22);
  ivl::group::AngleSampler sm(6);
  ScatterSheet sheet = latent_scatter(model, ds, sm, 30, 10);
  write_scatter_csv(dir + "/scatter.csv", sheet);
  ScatterSheet back = read_scatter_csv(dir + "/scatter.csv");
  REQUIRE(back.points.size() == sheet.points.size());
  for (size_t i = 0; i < sheet.points.size(); ++i) {
    REQUIRE(back.points[i].z1 == sheet.points[i].z1);  // %.9g round-trips f32 exactly
    REQUIRE(back.points[i].z2 == sheet.points[i].z2);
    REQUIRE(back.points[i].label == sheet.points[i].label);
    REQUIRE(back.points[i].theta == sheet.points[i].theta);  // %.17g round-trips f64
  }
  const std::string svg1 = render_scatter_svg(sheet, ScatterColor::kByAngle, "t");
  const std::string svg2 = render_scatter_svg(back, ScatterColor::kByAngle, "t");
  CHECK(svg1 == svg2);
  CHECK(render_scatter_svg(sheet, ScatterColor::kByClass, "t") ==
        render_scatter_svg(back, ScatterColor::kByClass, "t"));
}

TEST_CASE("svg rendering: determinism and geometry") {
  ivl::eval::RocCurve perfect;
  perfect.thresholds = {std::numeric_limits<double>::infinity(), 0.9, 0.1,
                        -std::numeric_limits<double>::infinity()};
  perfect.fpr = {0, 0, 0, 1};
  perfect.tpr = {0, 0, 1, 1};
  perfect.auc = 1.0;
  const std::string svg = render_roc_svg(perfect, "perfect");
  CHECK(render_roc_svg(perfect, "perfect") == svg);  // byte determinism
  // the (fpr=0, tpr=1) corner in plot coordinates: x = margin-left, y = margin-top
  CHECK(svg.find("L 70.00 50.00") != std::string::npos);
  CHECK(svg.find("AUC = 1.0000") != std::string::npos);

  ivl::eval::RocCurve empty;
  CHECK_THROWS_AS(render_roc_svg(empty, "x"), ivl::ValidationError);

  std::vector<SweepSeries> series = {{"invariant", {1, 3, 5}, {0.9, 0.92, 0.95}},
                                     {"vanilla", {1, 3, 5}, {0.6, 0.66, 0.7}}};
  const std::string sw = render_sweep_svg(series, "sweep");
  CHECK(sw.find("invariant") != std::string::npos);
  CHECK(sw.find("vanilla") != std::string::npos);
  CHECK_THROWS_AS(render_sweep_svg({}, "x"), ivl::ValidationError);
}

TEST_CASE("angle palette is cyclic: theta 0 and 2pi-eps map to near-identical colors") {
  ScatterSheet sheet;
  sheet.points = {{0, 0, 0, 0.0}, {0, 0, 0, 2 * std::numbers::pi - 1e-6}};
  const std::string svg = render_scatter_svg(sheet, ScatterColor::kByAngle, "cyc");
  // extract the fill color of both data points (radius 2.2 circles)
  std::vector<std::string> fills;
  size_t pos = 0;
  while ((pos = svg.find("r=\"2.2\" fill=\"", pos)) != std::string::npos) {
    pos += 14;
    fills.push_back(svg.substr(pos, 7));
  }
  REQUIRE(fills.size() == 2);
  CHECK(fills[0] == fills[1]);
}

TEST_CASE("sweep csv round trip") {
  const std::string dir = ivltest::tmpdir("sweepcsv");
  std::vector<SweepSeries> series = {{"invariant", {1, 2, 3}, {0.91, 0.93, 0.94}},
                                     {"vanilla", {1, 2, 3}, {0.55, 0.61, 0.64}}};
  write_sweep_csv(dir + "/sweep.csv", series);
  const auto back = read_sweep_csv(dir + "/sweep.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].model_id == "invariant");
  CHECK(back[1].model_id == "vanilla");
  for (size_t i = 0; i < 3; ++i) {
    REQUIRE(back[0].auc[i] == series[0].auc[i]);
    REQUIRE(back[1].n_classes[i] == series[1].n_classes[i]);
  }
  CHECK(render_sweep_svg(back, "t") == render_sweep_svg(series, "t"));
}

TEST_CASE("circular-linear correlation: high for angle-coded points, low for noise") {
  Rng rng(60);
  ScatterSheet coded, noise;
  for (int i = 0; i < 400; ++i) {
    const double th = rng.uniform(0, 2 * std::numbers::pi);
    // z encodes the angle directly
    coded.points.push_back({float(std::cos(th)), float(std::sin(th)), 0, th});
    // z independent of the angle
    noise.points.push_back({float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), 0, th});
  }
  CHECK(circular_linear_correlation(coded) > 0.9);
  CHECK(circular_linear_correlation(noise) < 0.15);
}

TEST_CASE("silhouette: separated clusters beat mixed ones") {
  Rng rng(61);
  ScatterSheet tight, mixed;
  for (int i = 0; i < 200; ++i) {
    const int32_t cls = int32_t(i % 2);
    const float cx = cls == 0 ? -3.0f : 3.0f;
    tight.points.push_back({cx + float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3)), cls, 0});
    mixed.points.push_back({float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1)), cls, 0});
  }
  CHECK(silhouette_by_class(tight) > 0.8);
  CHECK(silhouette_by_class(mixed) < 0.2);
}
