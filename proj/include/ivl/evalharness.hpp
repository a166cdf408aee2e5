#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivl/groupact.hpp"
#include "ivl/ingest.hpp"
#include "ivl/models.hpp"
#include "ivl/trainer.hpp"

namespace ivl::eval {

// A verification trial before materialization: indices into the evaluation
// dataset plus the rotation applied to img_b of positive pairs.
struct PairSpec {
  int64_t idx_a = 0;
  int64_t idx_b = 0;
  group::GroupElement g;  // identity for negatives unless rotate_negatives
  bool is_same = false;
  bool rotate_b = false;
};

struct PairSample {
  Tensor<float> img_a, img_b;
  bool is_same = false;
};

struct PairGenConfig {
  int64_t n_pos = 10000;
  int64_t n_neg = 10000;
  // The default protocol compares two unrotated images for negatives; this
  // option rotates both members of negative pairs instead.
  bool rotate_negatives = false;
};

// Positives: (x, g x) for a sampled image and angle. Negatives: two sampled
// images with different labels. Deterministic given the seed.
std::vector<PairSpec> gen_pairs(const ingest::RawDataset& x2, const PairGenConfig& cfg, uint64_t seed);
PairSample materialize(const ingest::RawDataset& x2, const PairSpec& p);

std::vector<float> embed(const models::VaeModel& model, const Tensor<float>& img);

double cosine_similarity(const std::vector<float>& u, const std::vector<float>& v);
// "same" iff score is strictly greater than the threshold
inline bool classify_pair(double score, double tau) { return score > tau; }

struct ScoreSet {
  std::vector<double> scores;
  std::vector<uint8_t> labels;  // 1 = same
  std::string model_id, dataset_id;
  uint64_t seed = 0;
};

struct RocCurve {
  std::vector<double> thresholds;  // descending, with +inf / -inf sentinels
  std::vector<double> fpr, tpr;    // nondecreasing, (0,0) .. (1,1)
  double auc = 0;
};

// Exact ROC: one sweep step per distinct score (ties grouped), trapezoidal
// AUC, which equals the Mann-Whitney statistic with half credit for ties.
RocCurve roc_auc(const ScoreSet& s);

struct EvalConfig {
  PairGenConfig pairs;
  uint64_t seed = 0;
  int64_t embed_batch = 256;
};

struct EvalResult {
  ScoreSet scores;
  RocCurve roc;
};

// Embeds both members of every pair with the checkpoint's frozen model and
// scores them by cosine similarity. Rejects checkpoints whose training
// classes/identities overlap the evaluation domain of the same dataset.
EvalResult evaluate_pairs(const train::Checkpoint& ck, const ingest::RawDataset& x2,
                          const EvalConfig& cfg);

// Mean cosine similarity between mu(x) and mu(g x) over n seeded draws.
double mean_orbit_cosine(const models::VaeModel& model, const ingest::RawDataset& ds, int64_t n,
                         uint64_t seed);

void write_scores_csv(const std::string& path, const ScoreSet& s);
void write_roc_csv(const std::string& path, const RocCurve& c);
RocCurve read_roc_csv(const std::string& path);
void write_summary_json(const std::string& path, const EvalResult& r);

}  // namespace ivl::eval
