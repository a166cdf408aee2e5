#include "ivl/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <json.hpp>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace ivl::eval {

std::vector<PairSpec> gen_pairs(const ingest::RawDataset& x2, const PairGenConfig& cfg, uint64_t seed) {
  IVL_VALIDATE(cfg.n_pos >= 1 && cfg.n_neg >= 1, "pair counts must be >= 1");
  const auto classes = x2.distinct_labels();
  IVL_VALIDATE(classes.size() >= 2, "negative pairs need >= 2 classes, dataset '%s' has %zu",
               x2.name.c_str(), classes.size());
  const int64_t n = x2.count();
  Rng rng = Rng::derive(seed, 0x7061697273ull);
  std::vector<PairSpec> out;
  out.reserve(size_t(cfg.n_pos + cfg.n_neg));
  for (int64_t i = 0; i < cfg.n_pos; ++i) {
    PairSpec p;
    p.idx_a = int64_t(rng.below(uint64_t(n)));
    p.idx_b = p.idx_a;
    p.g = group::GroupElement::from_angle(rng.uniform() * 2.0 * std::numbers::pi);
    p.rotate_b = true;
    p.is_same = true;
    out.push_back(p);
  }
  for (int64_t i = 0; i < cfg.n_neg; ++i) {
    PairSpec p;
    p.idx_a = int64_t(rng.below(uint64_t(n)));
    do {
      p.idx_b = int64_t(rng.below(uint64_t(n)));
    } while (x2.labels[size_t(p.idx_b)] == x2.labels[size_t(p.idx_a)]);
    if (cfg.rotate_negatives) {
      p.g = group::GroupElement::from_angle(rng.uniform() * 2.0 * std::numbers::pi);
      p.rotate_b = true;
    }
    p.is_same = false;
    out.push_back(p);
  }
  return out;
}

PairSample materialize(const ingest::RawDataset& x2, const PairSpec& p) {
  PairSample s;
  s.img_a = x2.image(p.idx_a);
  s.img_b = p.rotate_b ? group::rotate_image(x2.image(p.idx_b), p.g) : x2.image(p.idx_b);
  s.is_same = p.is_same;
  return s;
}

std::vector<float> embed(const models::VaeModel& model, const Tensor<float>& img) {
  return model.encode(img).mu;
}

double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v) {
  IVL_CHECK(u.size() == v.size() && !u.empty(), "cosine_similarity length mismatch (%zu vs %zu)",
            u.size(), v.size());
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += double(u[i]) * double(v[i]);
    nu += double(u[i]) * double(u[i]);
    nv += double(v[i]) * double(v[i]);
  }
  IVL_VALIDATE(nu > 0 && nv > 0, "cosine similarity of a zero vector is undefined");
  const double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return c < -1.0 ? -1.0 : (c > 1.0 ? 1.0 : c);
}

RocCurve roc_auc(const ScoreSet& s) {
  IVL_CHECK(s.scores.size() == s.labels.size(), "score/label length mismatch");
  int64_t pos = 0, neg = 0;
  for (uint8_t l : s.labels) (l ? pos : neg)++;
  IVL_VALIDATE(pos >= 1 && neg >= 1, "ROC needs at least one positive and one negative label");
  for (double v : s.scores) IVL_VALIDATE(std::isfinite(v), "non-finite score %g", v);

  std::vector<size_t> order(s.scores.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return s.scores[a] > s.scores[b]; });

  RocCurve c;
  const double inf = std::numeric_limits<double>::infinity();
  c.thresholds.push_back(inf);
  c.fpr.push_back(0);
  c.tpr.push_back(0);
  int64_t tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    const double v = s.scores[order[i]];
    // consume the whole tie group; a threshold exactly at v classifies the
    // group as "different" (strict >), so the point for tau = v excludes it
    c.thresholds.push_back(v);
    c.fpr.push_back(double(fp) / double(neg));
    c.tpr.push_back(double(tp) / double(pos));
    while (i < order.size() && s.scores[order[i]] == v) {
      (s.labels[order[i]] ? tp : fp)++;
      ++i;
    }
  }
  c.thresholds.push_back(-inf);
  c.fpr.push_back(double(fp) / double(neg));
  c.tpr.push_back(double(tp) / double(pos));

  double auc = 0;
  for (size_t k = 1; k < c.fpr.size(); ++k)
    auc += (c.fpr[k] - c.fpr[k - 1]) * (c.tpr[k] + c.tpr[k - 1]) / 2.0;
  c.auc = auc;
  return c;
}

namespace {

void check_provenance(const train::Checkpoint& ck, const ingest::RawDataset& x2) {
  if (!ck.provenance.valid) return;
  const std::string eval_dataset = x2.provenance.valid ? x2.provenance.dataset : x2.name;
  if (ck.provenance.dataset != eval_dataset) return;  // cross-dataset transfer: disjoint by corpus
  std::set<int32_t> train(ck.provenance.train_classes.begin(), ck.provenance.train_classes.end());
  for (int32_t l : x2.labels)
    IVL_VALIDATE(!train.count(l),
                 "provenance mismatch: checkpoint was trained on label %d of '%s', which appears in "
                 "the evaluation domain",
                 l, ck.provenance.dataset.c_str());
}

}  // namespace

EvalResult evaluate_pairs(const train::Checkpoint& ck, const ingest::RawDataset& x2,
                          const EvalConfig& cfg) {
  x2.validate();
  check_provenance(ck, x2);
  const models::VaeModel model = ck.model();
  const auto pairs = gen_pairs(x2, cfg.pairs, cfg.seed);

  EvalResult res;
  res.scores.model_id = kind_name(ck.cfg.kind);
  res.scores.dataset_id = x2.name;
  res.scores.seed = cfg.seed;
  res.scores.scores.resize(pairs.size());
  res.scores.labels.resize(pairs.size());

  const int64_t side = x2.height();
  const int64_t chunk = std::max<int64_t>(1, cfg.embed_batch / 2);
  for (size_t base = 0; base < pairs.size(); base += size_t(chunk)) {
    const size_t count = std::min(size_t(chunk), pairs.size() - base);
    Tensor<float> batch({int64_t(count) * 2, side, side});
    for (size_t j = 0; j < count; ++j) {
      PairSample ps = materialize(x2, pairs[base + j]);
      std::copy(ps.img_a.data.begin(), ps.img_a.data.end(),
                batch.data.begin() + int64_t(2 * j) * side * side);
      std::copy(ps.img_b.data.begin(), ps.img_b.data.end(),
                batch.data.begin() + int64_t(2 * j + 1) * side * side);
    }
    const Tensor<float> mu = model.embed_batch(batch);
    const int64_t d = mu.shape[1];
    for (size_t j = 0; j < count; ++j) {
      std::vector<float> a(mu.data.begin() + int64_t(2 * j) * d, mu.data.begin() + int64_t(2 * j + 1) * d);
      std::vector<float> b(mu.data.begin() + int64_t(2 * j + 1) * d,
                           mu.data.begin() + int64_t(2 * j + 2) * d);
      res.scores.scores[base + j] = cosine_similarity(a, b);
      res.scores.labels[base + j] = pairs[base + j].is_same ? 1 : 0;
    }
  }
  res.roc = roc_auc(res.scores);
  return res;
}

double mean_orbit_cosine(const models::VaeModel& model, const ingest::RawDataset& ds, int64_t n,
                         uint64_t seed) {
  IVL_CHECK(n >= 1 && ds.count() >= 1, "mean_orbit_cosine needs samples");
  Rng rng = Rng::derive(seed, 0x6f72626974ull);
  double acc = 0;
  for (int64_t i = 0; i < n; ++i) {
    const int64_t idx = int64_t(rng.below(uint64_t(ds.count())));
    const auto g = group::GroupElement::from_angle(rng.uniform() * 2.0 * std::numbers::pi);
    const Tensor<float> img = ds.image(idx);
    acc += cosine_similarity(embed(model, img), embed(model, group::rotate_image(img, g)));
  }
  return acc / double(n);
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return strfmt("%.17g", v);
}

}  // namespace

void write_scores_csv(const std::string& path, const ScoreSet& s) {
  std::string out = "score,is_same\n";
  for (size_t i = 0; i < s.scores.size(); ++i)
    out += fmt_double(s.scores[i]) + (s.labels[i] ? ",1\n" : ",0\n");
  write_file_text(path, out);
}

void write_roc_csv(const std::string& path, const RocCurve& c) {
  std::string out = "threshold,fpr,tpr\n";
  for (size_t i = 0; i < c.thresholds.size(); ++i)
    out += fmt_double(c.thresholds[i]) + "," + fmt_double(c.fpr[i]) + "," + fmt_double(c.tpr[i]) + "\n";
  write_file_text(path, out);
}

RocCurve read_roc_csv(const std::string& path) {
  const std::string text = read_file_text(path);
  RocCurve c;
  size_t pos = text.find('\n');
  IVL_VALIDATE(pos != std::string::npos && text.substr(0, pos) == "threshold,fpr,tpr",
               "%s: not a ROC csv", path.c_str());
  ++pos;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const size_t c1 = line.find(','), c2 = line.find(',', c1 + 1);
    IVL_VALIDATE(c1 != std::string::npos && c2 != std::string::npos, "%s: malformed row '%s'",
                 path.c_str(), line.c_str());
    auto parse = [](const std::string& t) {
      if (t == "inf") return std::numeric_limits<double>::infinity();
      if (t == "-inf") return -std::numeric_limits<double>::infinity();
      return std::stod(t);
    };
    c.thresholds.push_back(parse(line.substr(0, c1)));
    c.fpr.push_back(parse(line.substr(c1 + 1, c2 - c1 - 1)));
    c.tpr.push_back(parse(line.substr(c2 + 1)));
  }
  double auc = 0;
  for (size_t k = 1; k < c.fpr.size(); ++k)
    auc += (c.fpr[k] - c.fpr[k - 1]) * (c.tpr[k] + c.tpr[k - 1]) / 2.0;
  c.auc = auc;
  return c;
}

void write_summary_json(const std::string& path, const EvalResult& r) {
  int64_t pos = 0, neg = 0;
  for (uint8_t l : r.scores.labels) (l ? pos : neg)++;
  nlohmann::json j;
  j["auc"] = r.roc.auc;
  j["n_pos"] = pos;
  j["n_neg"] = neg;
  j["model"] = r.scores.model_id;
  j["dataset"] = r.scores.dataset_id;
  j["seed"] = r.scores.seed;
  write_file_text(path, j.dump(2) + "\n");
}

}  // namespace ivl::eval
