#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ivl/ingest.hpp"
#include "ivl/models.hpp"
#include "ivl/optim.hpp"

namespace ivl::train {

enum class ModelKind { kVanilla, kInvariant };

inline const char* kind_name(ModelKind k) { return k == ModelKind::kVanilla ? "vanilla" : "invariant"; }

struct TrainConfig {
  ModelKind kind = ModelKind::kInvariant;
  models::VaeConfig vae;
  int64_t epochs = 100;
  int64_t batch_size = 128;
  nn::AdamConfig<float> opt;
  uint64_t seed = 0;
  int64_t subset = 0;  // 0 = full dataset, else a seeded subset of this size
  std::string dataset;

  void normalize() { vae.invariant = kind == ModelKind::kInvariant; }
  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& json);
};

struct EpochStats {
  int64_t epoch = 0;
  double recon = 0, kl = 0, consistency = 0, total = 0;
  double wall_ms = 0;  // not serialized; checkpoints must be byte-reproducible
};

struct Checkpoint {
  uint32_t version = 1;
  TrainConfig cfg;
  nn::ParamSet params;
  nn::AdamState<float> adam;
  int64_t epoch = 0;  // epochs completed
  uint64_t rng_seed = 0;
  std::vector<EpochStats> history;
  ingest::SplitProvenance provenance;

  models::VaeModel model() const { return models::VaeModel(cfg.vae, params); }
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Trains from scratch. Every image is re-rotated with a fresh angle each
// epoch (streams derived from (seed, epoch, sample index), so results do not
// depend on batching or threads); the invariant model also encodes a second
// independently rotated view for the consistency penalty.
Checkpoint train(const TrainConfig& cfg, const ingest::RawDataset& x1,
                 const EpochCallback& cb = nullptr);

// Continues a checkpoint to target_epochs. Bitwise-identical to an
// uninterrupted run of the same length.
Checkpoint resume(Checkpoint ck, const ingest::RawDataset& x1, int64_t target_epochs,
                  const EpochCallback& cb = nullptr);

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// One JSON object per line: {"consistency":..,"epoch":..,"kl":..,"recon":..,
// "total":..,"wall_ms":..}
void append_epoch_log(const std::string& path, const EpochStats& st);

}  // namespace ivl::train
