#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivl/evalharness.hpp"
#include "ivl/groupact.hpp"
#include "ivl/ingest.hpp"
#include "ivl/models.hpp"

namespace ivl::report {

struct ScatterPoint {
  float z1 = 0, z2 = 0;
  int32_t label = 0;
  double theta = 0;  // the rotation actually applied before embedding
};

struct ScatterSheet {
  std::vector<ScatterPoint> points;
  std::string model_id, domain_id;
};

// Requires a latent_dim = 2 model: n seeded samples are rotated by sampled
// angles, embedded, and recorded with their class label and applied angle.
ScatterSheet latent_scatter(const models::VaeModel& model, const ingest::RawDataset& ds,
                            group::AngleSampler& sampler, int64_t n, uint64_t seed);

// Auxiliary statistics that make the latent-space figures auditable.
// Mardia circular-linear correlation between theta and each latent
// coordinate; returns the larger of the two coefficients (in [0, 1]).
double circular_linear_correlation(const ScatterSheet& sheet);
// Mean silhouette over points, grouped by class label, euclidean distance.
double silhouette_by_class(const ScatterSheet& sheet);

struct SweepSeries {
  std::string model_id;
  std::vector<int64_t> n_classes;
  std::vector<double> auc;
};

// --- CSV (the numbers behind every figure live next to it) ---

void write_scatter_csv(const std::string& path, const ScatterSheet& sheet);
ScatterSheet read_scatter_csv(const std::string& path);
void write_sweep_csv(const std::string& path, const std::vector<SweepSeries>& series);
std::vector<SweepSeries> read_sweep_csv(const std::string& path);

// --- SVG (self-contained, byte-deterministic) ---

enum class ScatterColor { kByClass, kByAngle };

std::string render_roc_svg(const eval::RocCurve& curve, const std::string& title);
std::string render_sweep_svg(const std::vector<SweepSeries>& series, const std::string& title);
std::string render_scatter_svg(const ScatterSheet& sheet, ScatterColor mode, const std::string& title);

}  // namespace ivl::report
