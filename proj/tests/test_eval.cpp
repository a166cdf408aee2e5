#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "ivl/evalharness.hpp"
#include "ivl/synthdata.hpp"

using ivl::Rng;
using ivl::Tensor;
using namespace ivl::eval;

namespace {

// independent AUC oracle: count positive-over-negative pairs, ties half
double mann_whitney(const ScoreSet& s) {
  double wins = 0;
  int64_t pos = 0, neg = 0;
  for (size_t i = 0; i < s.scores.size(); ++i) {
    if (!s.labels[i]) continue;
    ++pos;
    for (size_t j = 0; j < s.scores.size(); ++j) {
      if (s.labels[j]) continue;
      if (s.scores[i] > s.scores[j]) wins += 1;
      else if (s.scores[i] == s.scores[j]) wins += 0.5;
    }
  }
  for (uint8_t l : s.labels)
    if (!l) ++neg;
  return wins / (double(pos) * double(neg));
}

ScoreSet random_scores(Rng& rng, int64_t n, bool with_ties) {
  ScoreSet s;
  bool has_pos = false, has_neg = false;
  for (int64_t i = 0; i < n; ++i) {
    double v = rng.uniform(-1, 1);
    if (with_ties) v = std::round(v * 8) / 8;  // heavy tie mass
    const bool label = rng.uniform() < 0.5;
    s.scores.push_back(v);
    s.labels.push_back(label);
    (label ? has_pos : has_neg) = true;
  }
  if (!has_pos) s.labels[0] = 1;
  if (!has_neg) s.labels[size_t(n - 1)] = 0;
  return s;
}

}  // namespace

TEST_CASE("cosine similarity basics") {
  CHECK(cosine_similarity({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
  CHECK(cosine_similarity({1, 0}, {0, 1}) == doctest::Approx(0.0));
  CHECK(cosine_similarity({1, 2}, {-1, -2}) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(cosine_similarity({0, 0}, {1, 2}), ivl::ValidationError);
}

TEST_CASE("classify_pair is a strict threshold") {
  CHECK(classify_pair(0.9, 0.5));
  CHECK(!classify_pair(0.5, 0.5));  // score == tau -> different
  CHECK(!classify_pair(0.2, 0.5));
  CHECK(classify_pair(-0.999, -1.0));
  CHECK(!classify_pair(-1.0, -1.0));
}

TEST_CASE("roc: perfect separation and degenerate ties") {
  ScoreSet perfect;
  perfect.scores = {0.9, 0.8, 0.2, 0.1};
  perfect.labels = {1, 1, 0, 0};
  CHECK(roc_auc(perfect).auc == doctest::Approx(1.0));

  ScoreSet allsame;
  allsame.scores = {0.5, 0.5, 0.5, 0.5};
  allsame.labels = {1, 0, 1, 0};
  const RocCurve c = roc_auc(allsame);
  CHECK(c.auc == doctest::Approx(0.5));
  // the informative sweep is the two points (0,0) and (1,1)
  CHECK(c.fpr.front() == 0.0);
  CHECK(c.tpr.front() == 0.0);
  CHECK(c.fpr.back() == 1.0);
  CHECK(c.tpr.back() == 1.0);

  ScoreSet single;
  single.scores = {0.5};
  single.labels = {1};
  CHECK_THROWS_AS(roc_auc(single), ivl::ValidationError);
}

TEST_CASE("roc: frozen hand-computed case") {
  // scores [0.9 +, 0.8 +, 0.4 -, 0.3 +]: two of the three positives beat the
  // single negative -> AUC 2/3
  ScoreSet s;
  s.scores = {0.9, 0.8, 0.4, 0.3};
  s.labels = {1, 1, 0, 1};
  const double mw = mann_whitney(s);
  CHECK(roc_auc(s).auc == doctest::Approx(mw).epsilon(1e-12));
  CHECK(mw == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("roc/auc oracle: trapezoid equals Mann-Whitney on 1000 random sets") {
  Rng rng(55);
  for (int it = 0; it < 1000; ++it) {
    const int64_t n = 2 + int64_t(rng.below(it < 500 ? 40 : 1000));
    const ScoreSet s = random_scores(rng, n, it % 2 == 0);
    const RocCurve c = roc_auc(s);
    const double mw = mann_whitney(s);
    REQUIRE(std::abs(c.auc - mw) < 1e-12);
    REQUIRE(c.auc >= 0.0);
    REQUIRE(c.auc <= 1.0);
    // monotone sweep with exact endpoints
    REQUIRE(c.fpr.front() == 0.0);
    REQUIRE(c.tpr.front() == 0.0);
    REQUIRE(c.fpr.back() == 1.0);
    REQUIRE(c.tpr.back() == 1.0);
    for (size_t i = 1; i < c.fpr.size(); ++i) {
      REQUIRE(c.fpr[i] >= c.fpr[i - 1]);
      REQUIRE(c.tpr[i] >= c.tpr[i - 1]);
      REQUIRE(c.thresholds[i] < c.thresholds[i - 1]);  // strictly descending sweep
    }
  }
}

TEST_CASE("threshold-classifier consistency: classify_pair rates lie on the curve") {
  Rng rng(56);
  const ScoreSet s = random_scores(rng, 200, true);
  const RocCurve c = roc_auc(s);
  int64_t pos = 0, neg = 0;
  for (uint8_t l : s.labels) (l ? pos : neg)++;
  for (int it = 0; it < 50; ++it) {
    const double tau = rng.uniform(-1.2, 1.2);
    int64_t tp = 0, fp = 0;
    for (size_t i = 0; i < s.scores.size(); ++i)
      if (classify_pair(s.scores[i], tau)) (s.labels[i] ? tp : fp)++;
    const double want_fpr = double(fp) / double(neg), want_tpr = double(tp) / double(pos);
    bool found = false;
    for (size_t i = 0; i < c.fpr.size(); ++i)
      if (c.fpr[i] == want_fpr && c.tpr[i] == want_tpr) found = true;
    REQUIRE(found);
  }
}

TEST_CASE("gen_pairs: counts, hygiene, determinism") {
  const auto ds = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kA, 60, 7, 16, "gp");
  PairGenConfig cfg;
  cfg.n_pos = 40;
  cfg.n_neg = 25;
  const auto pairs = gen_pairs(ds, cfg, 9);
  REQUIRE(pairs.size() == 65);
  int64_t pos = 0;
  for (const auto& p : pairs) {
    if (p.is_same) {
      ++pos;
      REQUIRE(p.idx_a == p.idx_b);
      REQUIRE(p.g.is_unit(1e-12));
      // materialized positive is exactly the rotated original
      const PairSample ps = materialize(ds, p);
      const auto want = ivl::group::rotate_image(ds.image(p.idx_a), p.g);
      REQUIRE(ps.img_b.same_bits(want));
    } else {
      // negatives always cross classes
      REQUIRE(ds.labels[size_t(p.idx_a)] != ds.labels[size_t(p.idx_b)]);
    }
  }
  CHECK(pos == 40);

  const auto again = gen_pairs(ds, cfg, 9);
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(pairs[i].idx_a == again[i].idx_a);
    CHECK(pairs[i].idx_b == again[i].idx_b);
    CHECK(pairs[i].g.c == again[i].g.c);
  }

  // single-class dataset cannot produce negatives
  auto one = ds;
  std::fill(one.labels.begin(), one.labels.end(), 0);
  CHECK_THROWS_AS(gen_pairs(one, cfg, 9), ivl::ValidationError);
}

TEST_CASE("scale invariance: scaling all embeddings leaves scores and AUC unchanged") {
  Rng rng(57);
  ScoreSet base, scaled;
  for (int i = 0; i < 300; ++i) {
    std::vector<float> u(6), v(6);
    for (auto& x : u) x = float(rng.uniform(-1, 1));
    for (auto& x : v) x = float(rng.uniform(-1, 1));
    std::vector<float> u4 = u, v4 = v, u5 = u, v5 = v;
    for (auto& x : u4) x *= 4.0f;  // power of two: exact in f32
    for (auto& x : v4) x *= 4.0f;
    for (auto& x : u5) x *= 5.0f;  // arbitrary scale: rounds the inputs
    for (auto& x : v5) x *= 5.0f;
    const bool label = rng.uniform() < 0.5;
    base.scores.push_back(cosine_similarity(u, v));
    base.labels.push_back(label);
    scaled.scores.push_back(cosine_similarity(u4, v4));
    scaled.labels.push_back(label);
    REQUIRE(std::abs(cosine_similarity(u5, v5) - base.scores.back()) < 1e-6);
  }
  for (size_t i = 0; i < base.scores.size(); ++i)
    REQUIRE(std::abs(base.scores[i] - scaled.scores[i]) < 1e-12);
  CHECK(roc_auc(base).auc == doctest::Approx(roc_auc(scaled).auc).epsilon(1e-12));
}

TEST_CASE("evaluate_pairs: end-to-end on an untrained model, with provenance checks") {
  const auto full = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kA, 80, 7, 16, "gp");
  ivl::ingest::SplitSpec spec;
  spec.mode = ivl::ingest::SplitSpec::Mode::kByClassList;
  spec.train_classes = {0, 1, 2, 3, 4};
  auto [x1, x2] = ivl::ingest::split_by_labels(full, spec);

  ivl::train::TrainConfig cfg;
  cfg.kind = ivl::train::ModelKind::kInvariant;
  cfg.vae.input_side = 16;
  cfg.vae.latent_dim = 3;
  cfg.vae.conv1_ch = 4;
  cfg.vae.conv2_ch = 6;
  cfg.vae.fc_dim = 16;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.seed = 1;
  cfg.normalize();
  const auto ck = ivl::train::train(cfg, x1);

  EvalConfig ec;
  ec.pairs.n_pos = 50;
  ec.pairs.n_neg = 50;
  ec.seed = 11;
  const EvalResult res = evaluate_pairs(ck, x2, ec);
  REQUIRE(res.scores.scores.size() == 100);
  for (double v : res.scores.scores) {
    REQUIRE(v >= -1.0);
    REQUIRE(v <= 1.0);
  }
  CHECK(res.roc.auc >= 0.0);
  CHECK(res.scores.model_id == "invariant");

  // same dataset, overlapping labels -> rejected
  CHECK_THROWS_AS(evaluate_pairs(ck, x1, ec), ivl::ValidationError);
  // different corpus with identical label ids -> allowed (cross-dataset)
  auto other = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kB, 80, 8, 16, "other");
  CHECK_NOTHROW(evaluate_pairs(ck, other, ec));

  // determinism of the whole pipeline
  const EvalResult res2 = evaluate_pairs(ck, x2, ec);
  REQUIRE(res2.scores.scores == res.scores.scores);
}

TEST_CASE("score and roc csv round-trips") {
  const std::string dir = ivltest::tmpdir("evalcsv");
  Rng rng(58);
  const ScoreSet s = random_scores(rng, 50, false);
  write_scores_csv(dir + "/scores.csv", s);
  const std::string text = ivl::read_file_text(dir + "/scores.csv");
  CHECK(text.substr(0, 14) == "score,is_same\n");

  const RocCurve c = roc_auc(s);
  write_roc_csv(dir + "/roc.csv", c);
  const RocCurve back = read_roc_csv(dir + "/roc.csv");
  REQUIRE(back.thresholds.size() == c.thresholds.size());
  for (size_t i = 0; i < c.fpr.size(); ++i) {
    REQUIRE(back.fpr[i] == c.fpr[i]);
    REQUIRE(back.tpr[i] == c.tpr[i]);
  }
  CHECK(back.auc == doctest::Approx(c.auc).epsilon(1e-15));
}
