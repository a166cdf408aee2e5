#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ivl/ingest.hpp"
#include "ivl/trainer.hpp"

namespace ivl::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// One JSON document drives every command; flags may override single fields.
// Unknown keys anywhere in the document are rejected.
struct DatasetRef {
  std::string kind;  // "idx" | "faces" | "cache"
  std::string name;
  std::string images, labels;  // idx
  std::string root;            // faces
  std::string path;            // cache
};

struct ManifestTrain {
  std::string model = "invariant";
  int64_t epochs = 100;
  int64_t batch_size = 128;
  int64_t latent_dim = 10;
  int64_t conv1_ch = 16, conv2_ch = 32, fc_dim = 128;
  double beta = 1.0, lambda = 1.0, lr = 1e-3;
  bool consistency = true;
  int64_t subset = 0;
  std::optional<uint64_t> seed;
};

struct ManifestEval {
  int64_t n_pos = 10000, n_neg = 10000;
  bool rotate_negatives = false;
  std::optional<uint64_t> seed;
};

struct ManifestSweep {
  std::vector<int64_t> class_counts;
};

struct ManifestViz {
  int64_t n_points = 2000;
  std::optional<uint64_t> seed;
};

struct Manifest {
  uint64_t seed = 42;
  int64_t threads = 0;
  std::string out_dir;
  std::map<std::string, DatasetRef> datasets;  // roles: "train", "eval"
  std::optional<ingest::PreprocessConfig> preprocess;
  std::optional<ingest::SplitSpec> split;
  ManifestTrain train;
  ManifestEval eval;
  ManifestSweep sweep;
  ManifestViz viz;

  // whether a split seed was given explicitly (otherwise the global seed)
  bool split_seed_explicit = false;

  uint64_t train_seed() const { return train.seed.value_or(seed); }
  uint64_t eval_seed() const { return eval.seed.value_or(seed); }
  uint64_t viz_seed() const { return viz.seed.value_or(seed); }

  train::TrainConfig train_config(int64_t input_side, const std::string& dataset_name) const;
  std::string resolved_json() const;  // defaults applied, stable key order
};

Manifest parse_manifest_text(const std::string& json_text);
Manifest parse_manifest_file(const std::string& path);

}  // namespace ivl::cli
