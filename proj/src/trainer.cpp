#include "ivl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include <json.hpp>

#include "ivl/autodiff.hpp"
#include "ivl/groupact.hpp"

namespace ivl::train {

using nlohmann::json;

void TrainConfig::validate() const {
  vae.validate();
  IVL_VALIDATE(epochs >= 1, "epochs must be >= 1, got %lld", (long long)epochs);
  IVL_VALIDATE(batch_size >= 1, "batch_size must be >= 1, got %lld", (long long)batch_size);
  IVL_VALIDATE(subset >= 0, "subset must be >= 0");
  IVL_VALIDATE(vae.invariant == (kind == ModelKind::kInvariant),
               "config mismatch: model kind %s but vae.invariant=%d", kind_name(kind),
               int(vae.invariant));
}

std::string TrainConfig::to_json() const {
  json j;
  j["kind"] = kind_name(kind);
  j["input_side"] = vae.input_side;
  j["latent_dim"] = vae.latent_dim;
  j["conv1_ch"] = vae.conv1_ch;
  j["conv2_ch"] = vae.conv2_ch;
  j["fc_dim"] = vae.fc_dim;
  j["beta"] = double(vae.beta);
  j["lambda"] = double(vae.lambda_consistency);
  j["consistency"] = vae.consistency;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["lr"] = double(opt.lr);
  j["adam_beta1"] = double(opt.beta1);
  j["adam_beta2"] = double(opt.beta2);
  j["adam_eps"] = double(opt.eps);
  j["seed"] = seed;
  j["subset"] = subset;
  j["dataset"] = dataset;
  return j.dump();
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  const json j = json::parse(text);
  TrainConfig c;
  const std::string kind = j.at("kind").get<std::string>();
  IVL_VALIDATE(kind == "vanilla" || kind == "invariant", "unknown model kind '%s'", kind.c_str());
  c.kind = kind == "vanilla" ? ModelKind::kVanilla : ModelKind::kInvariant;
  c.vae.input_side = j.at("input_side").get<int64_t>();
  c.vae.latent_dim = j.at("latent_dim").get<int64_t>();
  c.vae.conv1_ch = j.at("conv1_ch").get<int64_t>();
  c.vae.conv2_ch = j.at("conv2_ch").get<int64_t>();
  c.vae.fc_dim = j.at("fc_dim").get<int64_t>();
  c.vae.beta = float(j.at("beta").get<double>());
  c.vae.lambda_consistency = float(j.at("lambda").get<double>());
  c.vae.consistency = j.at("consistency").get<bool>();
  c.epochs = j.at("epochs").get<int64_t>();
  c.batch_size = j.at("batch_size").get<int64_t>();
  c.opt.lr = float(j.at("lr").get<double>());
  c.opt.beta1 = float(j.at("adam_beta1").get<double>());
  c.opt.beta2 = float(j.at("adam_beta2").get<double>());
  c.opt.eps = float(j.at("adam_eps").get<double>());
  c.seed = j.at("seed").get<uint64_t>();
  c.subset = j.at("subset").get<int64_t>();
  c.dataset = j.at("dataset").get<std::string>();
  c.normalize();
  return c;
}

namespace {

constexpr uint64_t kTagSubset = 0x737562ull;   // per-run subset selection
constexpr uint64_t kTagShuffle = 0x73687566ull;  // per-epoch batch order
constexpr uint64_t kTagSample = 0x726f74ull;   // per-(epoch, sample) rotation + eps

std::vector<int64_t> select_subset(const TrainConfig& cfg, int64_t n) {
  std::vector<int64_t> idx(size_t(n), 0);
  for (int64_t i = 0; i < n; ++i) idx[size_t(i)] = i;
  if (cfg.subset > 0 && cfg.subset < n) {
    Rng rng = Rng::derive(cfg.seed, kTagSubset);
    shuffle(idx, rng);
    idx.resize(size_t(cfg.subset));
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

void check_hygiene(const TrainConfig& cfg, const ingest::RawDataset& x1) {
  if (!x1.provenance.valid) return;
  IVL_CHECK(x1.provenance.side == "X1",
            "training dataset '%s' carries provenance side '%s'; refusing to train on the eval domain",
            x1.name.c_str(), x1.provenance.side.c_str());
  std::set<int32_t> train(x1.provenance.train_classes.begin(), x1.provenance.train_classes.end());
  for (int32_t l : x1.labels)
    IVL_CHECK(train.count(l), "training dataset '%s' contains label %d outside its X1 provenance",
              x1.name.c_str(), l);
  (void)cfg;
}

struct BatchLoss {
  double recon = 0, kl = 0, cons = 0, total = 0;
};

// One optimizer step over one batch; returns the loss scalars.
BatchLoss run_batch(const TrainConfig& cfg, const ingest::RawDataset& ds,
                    const std::vector<int64_t>& batch, int64_t epoch, nn::ParamSet& params,
                    nn::AdamState<float>& adam) {
  const int64_t bn = int64_t(batch.size());
  const int64_t side = cfg.vae.input_side;
  const int64_t d = cfg.vae.latent_dim;
  const bool invariant = cfg.kind == ModelKind::kInvariant;
  const bool with_cons = invariant && cfg.vae.consistency;

  Tensor<float> view1({bn, 1, side, side});
  Tensor<float> view2 = with_cons ? Tensor<float>({bn, 1, side, side}) : Tensor<float>();
  Tensor<float> eps({bn, d});
  for (int64_t j = 0; j < bn; ++j) {
    const int64_t gi = batch[size_t(j)];
    Rng rng = Rng::derive(cfg.seed, kTagSample, (uint64_t(epoch) << 32) | uint64_t(gi));
    const double th1 = rng.uniform() * 2.0 * std::numbers::pi;
    const double th2 = rng.uniform() * 2.0 * std::numbers::pi;
    Tensor<float> img = ds.image(gi);
    Tensor<float> r1 = group::rotate_image(img, group::GroupElement::from_angle(th1));
    std::copy(r1.data.begin(), r1.data.end(), view1.data.begin() + j * side * side);
    if (with_cons) {
      Tensor<float> r2 = group::rotate_image(img, group::GroupElement::from_angle(th2));
      std::copy(r2.data.begin(), r2.data.end(), view2.data.begin() + j * side * side);
    }
    for (int64_t k = 0; k < d; ++k) eps[j * d + k] = float(rng.normal());
  }

  ad::Tape<float> tape;
  auto bound = models::bind_params(tape, params, true);
  ad::Var x1v = tape.leaf(std::move(view1), false);
  auto enc = models::build_encoder(tape, cfg.vae, bound, x1v);
  ad::Var z = ad::reparameterize(tape, enc.mu, enc.logvar, tape.leaf(std::move(eps), false));
  ad::Var canonical = models::build_decoder(tape, cfg.vae, bound, z);
  ad::Var recon = invariant ? ad::rotate_posed(tape, canonical, enc.pose) : canonical;
  ad::Var ce = ad::bernoulli_ce(tape, recon, x1v);
  ad::Var kl = ad::kl_diag_gaussian(tape, enc.mu, enc.logvar);
  ad::Var total = ad::add(tape, ce, ad::scale(tape, kl, cfg.vae.beta));
  ad::Var cons{};
  if (with_cons) {
    auto enc2 = models::build_encoder(tape, cfg.vae, bound, tape.leaf(std::move(view2), false));
    cons = ad::squared_distance(tape, enc.mu, enc2.mu);
    total = ad::add(tape, total, ad::scale(tape, cons, cfg.vae.lambda_consistency));
  }

  BatchLoss loss;
  loss.recon = double(tape.val(ce)[0]);
  loss.kl = double(tape.val(kl)[0]);
  loss.cons = with_cons ? double(tape.val(cons)[0]) : 0.0;
  loss.total = double(tape.val(total)[0]);
  IVL_CHECK(std::isfinite(loss.total), "non-finite loss (recon %g, kl %g, consistency %g)",
            loss.recon, loss.kl, loss.cons);

  tape.backward(total);
  std::vector<Tensor<float>> grads;
  grads.reserve(params.entries.size());
  for (size_t i = 0; i < params.entries.size(); ++i) {
    ad::Var v = bound.vars[i];
    if (tape.grad_touched(v))
      grads.push_back(tape.grad(v));
    else
      grads.push_back(Tensor<float>(params.entries[i].value.shape));
  }
  nn::adam_step(params, grads, adam);
  IVL_CHECK(params.all_finite(), "parameters became non-finite after the optimizer step");
  return loss;
}

Checkpoint train_loop(Checkpoint ck, const ingest::RawDataset& x1, const EpochCallback& cb) {
  const TrainConfig& cfg = ck.cfg;
  cfg.validate();
  x1.validate();
  IVL_CHECK(x1.count() > 0, "training dataset is empty");
  IVL_CHECK(x1.height() == cfg.vae.input_side && x1.width() == cfg.vae.input_side,
            "dataset images %lldx%lld do not match configured input_side %lld", (long long)x1.height(),
            (long long)x1.width(), (long long)cfg.vae.input_side);
  check_hygiene(cfg, x1);

  const std::vector<int64_t> subset = select_subset(cfg, x1.count());
  for (int64_t epoch = ck.epoch; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<int64_t> order = subset;
    Rng rng = Rng::derive(cfg.seed, kTagShuffle, uint64_t(epoch));
    shuffle(order, rng);

    double sum_recon = 0, sum_kl = 0, sum_cons = 0, sum_total = 0;
    for (size_t pos = 0; pos < order.size(); pos += size_t(cfg.batch_size)) {
      const size_t end = std::min(order.size(), pos + size_t(cfg.batch_size));
      std::vector<int64_t> batch(order.begin() + pos, order.begin() + end);
      BatchLoss loss;
      try {
        loss = run_batch(cfg, x1, batch, epoch, ck.params, ck.adam);
      } catch (const Error& e) {
        throw Error(strfmt("epoch %lld batch %zu: %s", (long long)epoch, pos / size_t(cfg.batch_size),
                           e.what()));
      }
      const double w = double(batch.size());
      sum_recon += loss.recon * w;
      sum_kl += loss.kl * w;
      sum_cons += loss.cons * w;
      sum_total += loss.total * w;
    }
    const double n = double(order.size());
    EpochStats st;
    st.epoch = epoch;
    st.recon = sum_recon / n;
    st.kl = sum_kl / n;
    st.consistency = sum_cons / n;
    st.total = sum_total / n;
    st.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    ck.history.push_back(st);
    ck.epoch = epoch + 1;
    if (cb) cb(st);
  }
  return ck;
}

}  // namespace

Checkpoint train(const TrainConfig& cfg_in, const ingest::RawDataset& x1, const EpochCallback& cb) {
  TrainConfig cfg = cfg_in;
  cfg.normalize();
  cfg.validate();
  Checkpoint ck;
  ck.cfg = cfg;
  ck.rng_seed = cfg.seed;
  ck.params = nn::init_params(models::param_specs(cfg.vae), cfg.seed);
  std::vector<Shape> shapes;
  for (const auto& e : ck.params.entries) shapes.push_back(e.value.shape);
  ck.adam.cfg = cfg.opt;
  ck.adam.init(shapes);
  ck.provenance = x1.provenance;
  return train_loop(std::move(ck), x1, cb);
}

Checkpoint resume(Checkpoint ck, const ingest::RawDataset& x1, int64_t target_epochs,
                  const EpochCallback& cb) {
  IVL_VALIDATE(target_epochs >= ck.epoch, "resume target %lld is before checkpoint epoch %lld",
               (long long)target_epochs, (long long)ck.epoch);
  ck.cfg.epochs = target_epochs;
  return train_loop(std::move(ck), x1, cb);
}

// ---------------------------------------------------------------------------
// checkpoint file format ("IVCK"): little-endian, CRC32 trailer; see
// docs/formats.md
// ---------------------------------------------------------------------------

namespace {

void write_tensor_block(ByteWriter& w, const std::vector<std::pair<std::string, const Tensor<float>*>>& tensors) {
  // directory: name, dtype, shape, offset into the data section
  w.u32(uint32_t(tensors.size()));
  uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    w.str(name);
    w.u8(0);  // dtype 0 = f32
    w.u8(uint8_t(t->shape.size()));
    for (int64_t d : t->shape) w.i64(d);
    w.u64(offset);
    offset += uint64_t(t->size()) * 4;
  }
  w.u64(offset);
  for (const auto& [name, t] : tensors)
    for (float v : t->data) w.f32(v);
}

struct TensorDir {
  std::string name;
  Shape shape;
  uint64_t offset;
};

std::vector<std::pair<std::string, Tensor<float>>> read_tensor_block(ByteReader& r) {
  const uint32_t count = r.u32();
  std::vector<TensorDir> dir;
  for (uint32_t i = 0; i < count; ++i) {
    TensorDir d;
    d.name = r.str();
    IVL_VALIDATE(r.u8() == 0, "checkpoint: unsupported tensor dtype");
    const uint8_t ndim = r.u8();
    for (uint8_t k = 0; k < ndim; ++k) d.shape.push_back(r.i64());
    d.offset = r.u64();
    dir.push_back(std::move(d));
  }
  const uint64_t data_size = r.u64();
  std::vector<uint8_t> blob(data_size);
  r.bytes(blob.data(), data_size);
  std::vector<std::pair<std::string, Tensor<float>>> out;
  for (const auto& d : dir) {
    Tensor<float> t(d.shape);
    IVL_VALIDATE(d.offset + uint64_t(t.size()) * 4 <= data_size, "checkpoint: tensor '%s' out of bounds",
                 d.name.c_str());
    __builtin_memcpy(t.ptr(), blob.data() + d.offset, size_t(t.size()) * 4);
    out.emplace_back(d.name, std::move(t));
  }
  return out;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  ByteWriter w;
  w.bytes("IVCK", 4);
  w.u32(ck.version);
  w.str(ck.cfg.to_json());
  w.i64(ck.epoch);
  w.u64(ck.rng_seed);
  w.u32(uint32_t(ck.history.size()));
  for (const auto& h : ck.history) {
    w.i64(h.epoch);
    w.f64(h.recon);
    w.f64(h.kl);
    w.f64(h.consistency);
    w.f64(h.total);
  }
  const auto& p = ck.provenance;
  w.u8(p.valid ? 1 : 0);
  w.str(p.dataset);
  w.str(p.mode);
  w.str(p.side);
  w.u32(uint32_t(p.train_classes.size()));
  for (int32_t c : p.train_classes) w.i32(c);
  w.u64(p.seed);
  w.i64(ck.adam.t);
  std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
  for (size_t i = 0; i < ck.params.entries.size(); ++i) {
    tensors.emplace_back(ck.params.entries[i].name, &ck.params.entries[i].value);
    tensors.emplace_back("adam.m." + ck.params.entries[i].name, &ck.adam.m[i]);
    tensors.emplace_back("adam.v." + ck.params.entries[i].name, &ck.adam.v[i]);
  }
  write_tensor_block(w, tensors);
  const uint32_t crc = crc32(w.data().data(), w.size());
  w.u32(crc);
  write_file_bytes(path, w.data().data(), w.size());
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  IVL_VALIDATE(bytes.size() > 8, "checkpoint '%s' is truncated", path.c_str());
  const uint32_t stored_crc = uint32_t(bytes[bytes.size() - 4]) | (uint32_t(bytes[bytes.size() - 3]) << 8) |
                              (uint32_t(bytes[bytes.size() - 2]) << 16) |
                              (uint32_t(bytes[bytes.size() - 1]) << 24);
  IVL_VALIDATE(crc32(bytes.data(), bytes.size() - 4) == stored_crc,
               "checkpoint '%s' is corrupt (CRC mismatch)", path.c_str());
  ByteReader r(bytes.data(), bytes.size() - 4);
  char magic[4];
  r.bytes(magic, 4);
  IVL_VALIDATE(std::string(magic, 4) == "IVCK", "'%s' is not a checkpoint (bad magic)", path.c_str());
  Checkpoint ck;
  ck.version = r.u32();
  IVL_VALIDATE(ck.version == 1, "checkpoint '%s' has unsupported version %u", path.c_str(), ck.version);
  ck.cfg = TrainConfig::from_json(r.str());
  ck.epoch = r.i64();
  ck.rng_seed = r.u64();
  const uint32_t nh = r.u32();
  for (uint32_t i = 0; i < nh; ++i) {
    EpochStats h;
    h.epoch = r.i64();
    h.recon = r.f64();
    h.kl = r.f64();
    h.consistency = r.f64();
    h.total = r.f64();
    ck.history.push_back(h);
  }
  ck.provenance.valid = r.u8() != 0;
  ck.provenance.dataset = r.str();
  ck.provenance.mode = r.str();
  ck.provenance.side = r.str();
  const uint32_t nc = r.u32();
  for (uint32_t i = 0; i < nc; ++i) ck.provenance.train_classes.push_back(r.i32());
  ck.provenance.seed = r.u64();
  ck.adam.cfg = ck.cfg.opt;
  ck.adam.t = r.i64();
  auto tensors = read_tensor_block(r);
  IVL_VALIDATE(r.remaining() == 0, "checkpoint '%s': %zu trailing bytes", path.c_str(), r.remaining());
  const auto specs = models::param_specs(ck.cfg.vae);
  IVL_VALIDATE(tensors.size() == specs.size() * 3, "checkpoint '%s': expected %zu tensors, found %zu",
               path.c_str(), specs.size() * 3, tensors.size());
  for (size_t i = 0; i < specs.size(); ++i) {
    IVL_VALIDATE(tensors[3 * i].first == specs[i].name, "checkpoint '%s': tensor %zu is '%s', expected '%s'",
                 path.c_str(), i, tensors[3 * i].first.c_str(), specs[i].name.c_str());
    ck.params.add(tensors[3 * i].first, std::move(tensors[3 * i].second));
    ck.adam.m.push_back(std::move(tensors[3 * i + 1].second));
    ck.adam.v.push_back(std::move(tensors[3 * i + 2].second));
  }
  return ck;
}

void append_epoch_log(const std::string& path, const EpochStats& st) {
  nlohmann::json j;
  j["epoch"] = st.epoch;
  j["recon"] = st.recon;
  j["kl"] = st.kl;
  j["consistency"] = st.consistency;
  j["total"] = st.total;
  j["wall_ms"] = st.wall_ms;
  FILE* f = fopen(path.c_str(), "ab");
  IVL_CHECK(f != nullptr, "cannot open epoch log '%s'", path.c_str());
  const std::string line = j.dump() + "\n";
  fwrite(line.data(), 1, line.size(), f);
  fclose(f);
}

}  // namespace ivl::train
