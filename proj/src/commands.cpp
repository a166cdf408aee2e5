#include "ivl/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "ivl/common.hpp"
#include "ivl/evalharness.hpp"
#include "ivl/report.hpp"

namespace fs = std::filesystem;

namespace ivl::cli {

void apply_threads(const Manifest& m) {
  if (m.threads > 0) omp_set_num_threads(int(m.threads));
}

void stamp_output(const Manifest& m) {
  fs::create_directories(m.out_dir);
  write_file_text((fs::path(m.out_dir) / "manifest.resolved.json").string(), m.resolved_json());
  write_file_text((fs::path(m.out_dir) / "VERSION").string(),
                  strfmt("ivlab %s\n", kToolVersion));
}

namespace {

uint64_t fnv1a(const uint8_t* data, size_t n, uint64_t h = 14695981039346656037ull) {
  for (size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t fnv1a_str(const std::string& s, uint64_t h = 14695981039346656037ull) {
  return fnv1a(reinterpret_cast<const uint8_t*>(s.data()), s.size(), h);
}

std::string preprocess_tag(const Manifest& m) {
  const ingest::PreprocessConfig p = m.preprocess.value_or(ingest::PreprocessConfig{});
  return strfmt("crop=%.17g,target=%lld,pad=%lld", p.crop_fraction, (long long)p.target_side,
                (long long)p.pad_to);
}

// content hash of a dataset source, used for prepare idempotence
uint64_t source_hash(const Manifest& m, const DatasetRef& ref) {
  uint64_t h = fnv1a_str(ref.kind);
  if (ref.kind == "idx") {
    const auto a = read_file_bytes(ref.images);
    const auto b = read_file_bytes(ref.labels);
    h = fnv1a(a.data(), a.size(), h);
    h = fnv1a(b.data(), b.size(), h);
  } else if (ref.kind == "faces") {
    h = fnv1a_str(preprocess_tag(m), h);
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(ref.root))
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      h = fnv1a_str(f, h);
      const auto bytes = read_file_bytes(f);
      h = fnv1a(bytes.data(), bytes.size(), h);
    }
  } else {
    const auto bytes = read_file_bytes(ref.path);
    h = fnv1a(bytes.data(), bytes.size(), h);
  }
  return h;
}

ingest::RawDataset load_raw(const Manifest& m, const DatasetRef& ref) {
  if (ref.kind == "idx") return ingest::load_idx_dataset(ref.images, ref.labels, ref.name);
  if (ref.kind == "cache") return ingest::read_cache(ref.path);
  ingest::RawDataset faces = ingest::load_face_dir(ref.root, ref.name);
  return ingest::preprocess_dataset(faces, m.preprocess.value_or(ingest::PreprocessConfig{}));
}

std::string cache_file(const Manifest& m, const DatasetRef& ref) {
  return (fs::path(m.out_dir) / "cache" / (ref.name + ".ivlb")).string();
}

}  // namespace

ingest::RawDataset resolve_dataset(const Manifest& m, const std::string& role) {
  auto it = m.datasets.find(role);
  if (it == m.datasets.end()) it = m.datasets.find("train");
  IVL_VALIDATE(it != m.datasets.end(), "manifest names no dataset for role '%s'", role.c_str());
  const std::string cached = cache_file(m, it->second);
  if (fs::exists(cached)) {
    ingest::RawDataset ds = ingest::read_cache(cached);
    ds.name = it->second.name;
    return ds;
  }
  return load_raw(m, it->second);
}

std::string checkpoint_path(const Manifest& m, const std::string& model) {
  return (fs::path(m.out_dir) / "checkpoints" / (model + ".ivck")).string();
}

// ---------------------------------------------------------------------------
// prepare
// ---------------------------------------------------------------------------

void cmd_prepare(const Manifest& m) {
  apply_threads(m);
  stamp_output(m);
  fs::create_directories(fs::path(m.out_dir) / "cache");
  for (const auto& [role, ref] : m.datasets) {
    const std::string out = cache_file(m, ref);
    const std::string meta = out + ".meta";
    const std::string hash = strfmt("%016llx", (unsigned long long)source_hash(m, ref));
    if (fs::exists(out) && fs::exists(meta) && read_file_text(meta) == hash) {
      printf("prepare: %s up to date (%s)\n", ref.name.c_str(), hash.c_str());
      continue;
    }
    ingest::RawDataset ds = load_raw(m, ref);
    ingest::write_cache(out, ds);
    write_file_text(meta, hash);
    printf("prepare: cached %s (%lld images %lldx%lld) -> %s\n", ref.name.c_str(),
           (long long)ds.count(), (long long)ds.height(), (long long)ds.width(), out.c_str());
  }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

namespace {

// X1 for training / X2 for evaluation under the manifest's split. When the
// eval dataset is a different corpus from the training one, the whole corpus
// is the evaluation domain.
ingest::RawDataset training_domain(const Manifest& m) {
  ingest::RawDataset ds = resolve_dataset(m, "train");
  if (!m.split) return ds;
  auto [x1, x2] = ingest::split_dataset(ds, *m.split);
  return std::move(x1);
}

ingest::RawDataset evaluation_domain(const Manifest& m) {
  const bool have_eval_ref = m.datasets.count("eval") > 0;
  const bool cross_dataset =
      have_eval_ref && m.datasets.at("eval").name != m.datasets.at("train").name;
  ingest::RawDataset ds = resolve_dataset(m, have_eval_ref ? "eval" : "train");
  if (cross_dataset || !m.split) return ds;
  auto [x1, x2] = ingest::split_dataset(ds, *m.split);
  return std::move(x2);
}

}  // namespace

void cmd_train(const Manifest& m) {
  apply_threads(m);
  stamp_output(m);
  ingest::RawDataset x1 = training_domain(m);
  const train::TrainConfig cfg = m.train_config(x1.height(), x1.name);
  fs::create_directories(fs::path(m.out_dir) / "checkpoints");
  const std::string log_path =
      (fs::path(m.out_dir) / "checkpoints" / (m.train.model + ".log.jsonl")).string();
  if (fs::exists(log_path)) fs::remove(log_path);
  printf("train: %s on %s (%lld samples, %lld epochs)\n", m.train.model.c_str(), x1.name.c_str(),
         (long long)(cfg.subset > 0 ? std::min(cfg.subset, x1.count()) : x1.count()),
         (long long)cfg.epochs);
  train::Checkpoint ck = train::train(cfg, x1, [&](const train::EpochStats& st) {
    train::append_epoch_log(log_path, st);
    printf("  epoch %3lld  total %.3f  recon %.3f  kl %.3f  cons %.4f  (%.0f ms)\n",
           (long long)st.epoch, st.total, st.recon, st.kl, st.consistency, st.wall_ms);
    fflush(stdout);
  });
  train::save_checkpoint(ck, checkpoint_path(m, m.train.model));
  printf("train: wrote %s\n", checkpoint_path(m, m.train.model).c_str());
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

namespace {

eval::EvalConfig eval_config(const Manifest& m) {
  eval::EvalConfig ec;
  ec.pairs.n_pos = m.eval.n_pos;
  ec.pairs.n_neg = m.eval.n_neg;
  ec.pairs.rotate_negatives = m.eval.rotate_negatives;
  ec.seed = m.eval_seed();
  return ec;
}

}  // namespace

void cmd_eval(const Manifest& m) {
  apply_threads(m);
  stamp_output(m);
  ingest::RawDataset x2 = evaluation_domain(m);
  const eval::EvalConfig ec = eval_config(m);
  for (const std::string model : {"invariant", "vanilla"}) {
    const std::string ckpath = checkpoint_path(m, model);
    IVL_VALIDATE(fs::exists(ckpath), "missing checkpoint '%s'; run the train command for --model %s",
                 ckpath.c_str(), model.c_str());
    train::Checkpoint ck = train::load_checkpoint(ckpath);
    eval::EvalResult res = eval::evaluate_pairs(ck, x2, ec);
    const fs::path dir = fs::path(m.out_dir) / "eval" / model;
    fs::create_directories(dir);
    eval::write_scores_csv((dir / "scores.csv").string(), res.scores);
    eval::write_roc_csv((dir / "roc.csv").string(), res.roc);
    eval::write_summary_json((dir / "summary.json").string(), res);
    write_file_text((dir / "roc.svg").string(),
                    report::render_roc_svg(res.roc, strfmt("ROC — %s on %s", model.c_str(),
                                                           x2.name.c_str())));
    printf("eval: %s on %s -> AUC %.4f (%s)\n", model.c_str(), x2.name.c_str(), res.roc.auc,
           dir.string().c_str());
  }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

void cmd_sweep(const Manifest& m) {
  apply_threads(m);
  stamp_output(m);
  ingest::RawDataset full = resolve_dataset(m, "train");
  const auto classes = full.distinct_labels();
  std::vector<int64_t> counts = m.sweep.class_counts;
  if (counts.empty())
    for (int64_t k = 1; k < int64_t(classes.size()); ++k) counts.push_back(k);
  for (int64_t k : counts)
    IVL_VALIDATE(k >= 1 && k < int64_t(classes.size()),
                 "sweep count %lld outside [1, %zu)", (long long)k, classes.size());

  const eval::EvalConfig ec = eval_config(m);
  std::vector<report::SweepSeries> series = {{"invariant", {}, {}}, {"vanilla", {}, {}}};
  for (int64_t k : counts) {
    ingest::SplitSpec spec;
    spec.mode = ingest::SplitSpec::Mode::kByClassList;
    spec.train_classes.assign(classes.begin(), classes.begin() + k);
    spec.seed = m.split ? m.split->seed : m.seed;
    auto [x1, x2] = ingest::split_by_labels(full, spec);
    for (auto& s : series) {
      const fs::path dir = fs::path(m.out_dir) / "sweep" / strfmt("L%lld", (long long)k);
      fs::create_directories(dir);
      const std::string ckpath = (dir / (s.model_id + ".ivck")).string();
      train::Checkpoint ck;
      if (fs::exists(ckpath)) {
        ck = train::load_checkpoint(ckpath);
      } else {
        Manifest mk = m;
        mk.train.model = s.model_id;
        const train::TrainConfig cfg = mk.train_config(x1.height(), x1.name);
        printf("sweep: training %s with %lld classes (%lld samples)\n", s.model_id.c_str(),
               (long long)k, (long long)(cfg.subset > 0 ? std::min(cfg.subset, x1.count()) : x1.count()));
        fflush(stdout);
        ck = train::train(cfg, x1);
        train::save_checkpoint(ck, ckpath);
      }
      eval::EvalResult res = eval::evaluate_pairs(ck, x2, ec);
      eval::write_summary_json((dir / (s.model_id + ".summary.json")).string(), res);
      s.n_classes.push_back(k);
      s.auc.push_back(res.roc.auc);
      printf("sweep: |L|=%lld %s AUC %.4f\n", (long long)k, s.model_id.c_str(), res.roc.auc);
      fflush(stdout);
    }
  }
  const fs::path dir = fs::path(m.out_dir) / "sweep";
  report::write_sweep_csv((dir / "sweep.csv").string(), series);
  write_file_text((dir / "sweep.svg").string(),
                  report::render_sweep_svg(series, strfmt("AUC vs training classes — %s",
                                                          full.name.c_str())));
}

// ---------------------------------------------------------------------------
// viz
// ---------------------------------------------------------------------------

void cmd_viz(const Manifest& m) {
  apply_threads(m);
  stamp_output(m);
  ingest::RawDataset x1 = training_domain(m);
  ingest::RawDataset x2 = evaluation_domain(m);
  for (const std::string model : {"invariant", "vanilla"}) {
    const std::string ckpath = checkpoint_path(m, model);
    IVL_VALIDATE(fs::exists(ckpath), "missing checkpoint '%s'; run the train command for --model %s",
                 ckpath.c_str(), model.c_str());
    train::Checkpoint ck = train::load_checkpoint(ckpath);
    IVL_VALIDATE(ck.cfg.vae.latent_dim == 2,
                 "viz needs a latent_dim=2 checkpoint, '%s' has latent_dim=%lld", ckpath.c_str(),
                 (long long)ck.cfg.vae.latent_dim);
    const models::VaeModel vm = ck.model();
    for (const auto* domain : {&x1, &x2}) {
      const std::string dom = domain == &x1 ? "X1" : "X2";
      group::AngleSampler sampler(Rng::derive(m.viz_seed(), fnv1a_str(model + dom)).next_u64());
      const int64_t n = std::min<int64_t>(m.viz.n_points, domain->count());
      report::ScatterSheet sheet = report::latent_scatter(vm, *domain, sampler, n, m.viz_seed());
      sheet.model_id = model;
      sheet.domain_id = dom;
      const fs::path dir = fs::path(m.out_dir) / "viz" / model / dom;
      fs::create_directories(dir);
      report::write_scatter_csv((dir / "scatter.csv").string(), sheet);
      write_file_text((dir / "scatter_by_class.svg").string(),
                      report::render_scatter_svg(sheet, report::ScatterColor::kByClass,
                                                 strfmt("latent by class — %s on %s", model.c_str(),
                                                        dom.c_str())));
      write_file_text((dir / "scatter_by_angle.svg").string(),
                      report::render_scatter_svg(sheet, report::ScatterColor::kByAngle,
                                                 strfmt("latent by angle — %s on %s", model.c_str(),
                                                        dom.c_str())));
      nlohmann::json stats;
      stats["circular_linear_correlation"] = report::circular_linear_correlation(sheet);
      stats["silhouette_by_class"] = report::silhouette_by_class(sheet);
      stats["model"] = model;
      stats["domain"] = dom;
      stats["n"] = sheet.points.size();
      write_file_text((dir / "stats.json").string(), stats.dump(2) + "\n");
      printf("viz: %s %s -> %s\n", model.c_str(), dom.c_str(), dir.string().c_str());
    }
  }
}

}  // namespace ivl::cli
