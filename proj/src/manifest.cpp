#include "ivl/manifest.hpp"

#include <set>

#include <json.hpp>

#include "ivl/common.hpp"

namespace ivl::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  IVL_VALIDATE(j.is_object(), "manifest: '%s' must be a JSON object", where.c_str());
  for (const auto& [k, v] : j.items())
    IVL_VALIDATE(allowed.count(k), "manifest: unknown key '%s' in '%s'", k.c_str(), where.c_str());
}

DatasetRef parse_dataset(const json& j, const std::string& role) {
  check_keys(j, "datasets." + role, {"kind", "name", "images", "labels", "root", "path"});
  DatasetRef r;
  r.kind = j.at("kind").get<std::string>();
  IVL_VALIDATE(r.kind == "idx" || r.kind == "faces" || r.kind == "cache",
               "manifest: datasets.%s.kind must be idx|faces|cache, got '%s'", role.c_str(),
               r.kind.c_str());
  r.name = j.value("name", role);
  if (r.kind == "idx") {
    IVL_VALIDATE(j.contains("images") && j.contains("labels"),
                 "manifest: datasets.%s needs 'images' and 'labels' paths", role.c_str());
    r.images = j.at("images").get<std::string>();
    r.labels = j.at("labels").get<std::string>();
  } else if (r.kind == "faces") {
    IVL_VALIDATE(j.contains("root"), "manifest: datasets.%s needs 'root'", role.c_str());
    r.root = j.at("root").get<std::string>();
  } else {
    IVL_VALIDATE(j.contains("path"), "manifest: datasets.%s needs 'path'", role.c_str());
    r.path = j.at("path").get<std::string>();
  }
  return r;
}

}  // namespace

Manifest parse_manifest_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ValidationError(strfmt("manifest is not valid JSON: %s", e.what()));
  }
  check_keys(j, "<root>",
             {"seed", "threads", "out_dir", "datasets", "preprocess", "split", "train", "eval_spec",
              "sweep", "viz"});
  Manifest m;
  m.seed = j.value("seed", uint64_t(42));
  m.threads = j.value("threads", int64_t(0));
  IVL_VALIDATE(m.threads >= 0, "manifest: threads must be >= 0");
  IVL_VALIDATE(j.contains("out_dir"), "manifest: 'out_dir' is required");
  m.out_dir = j.at("out_dir").get<std::string>();

  IVL_VALIDATE(j.contains("datasets") && j.at("datasets").is_object() && !j.at("datasets").empty(),
               "manifest: 'datasets' must name at least one dataset");
  for (const auto& [role, ds] : j.at("datasets").items()) {
    IVL_VALIDATE(role == "train" || role == "eval", "manifest: unknown dataset role '%s'", role.c_str());
    m.datasets[role] = parse_dataset(ds, role);
  }
  IVL_VALIDATE(m.datasets.count("train"), "manifest: datasets.train is required");

  if (j.contains("preprocess")) {
    check_keys(j.at("preprocess"), "preprocess", {"crop_fraction", "target_side", "pad_to"});
    ingest::PreprocessConfig p;
    p.crop_fraction = j.at("preprocess").value("crop_fraction", 0.6);
    p.target_side = j.at("preprocess").value("target_side", int64_t(50));
    p.pad_to = j.at("preprocess").value("pad_to", int64_t(72));
    p.validate();
    m.preprocess = p;
  }

  if (j.contains("split")) {
    const json& s = j.at("split");
    check_keys(s, "split", {"mode", "train_classes", "test_fraction", "seed"});
    ingest::SplitSpec spec;
    const std::string mode = s.value("mode", std::string("by-class-list"));
    IVL_VALIDATE(mode == "by-class-list" || mode == "by-identity-fraction",
                 "manifest: split.mode must be by-class-list|by-identity-fraction, got '%s'",
                 mode.c_str());
    spec.mode = mode == "by-class-list" ? ingest::SplitSpec::Mode::kByClassList
                                        : ingest::SplitSpec::Mode::kByIdentityFraction;
    if (spec.mode == ingest::SplitSpec::Mode::kByClassList) {
      IVL_VALIDATE(s.contains("train_classes"), "manifest: split.train_classes is required");
      for (const auto& c : s.at("train_classes")) spec.train_classes.push_back(c.get<int32_t>());
      IVL_VALIDATE(!spec.train_classes.empty(), "manifest: split.train_classes must be nonempty");
    } else {
      spec.test_fraction = s.value("test_fraction", 0.1);
      IVL_VALIDATE(spec.test_fraction > 0 && spec.test_fraction < 1,
                   "manifest: split.test_fraction must be in (0,1)");
    }
    m.split_seed_explicit = s.contains("seed");
    spec.seed = s.value("seed", m.seed);
    m.split = spec;
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "train",
               {"model", "epochs", "batch_size", "latent_dim", "conv1_ch", "conv2_ch", "fc_dim",
                "beta", "lambda", "consistency", "lr", "subset", "seed"});
    m.train.model = t.value("model", std::string("invariant"));
    IVL_VALIDATE(m.train.model == "invariant" || m.train.model == "vanilla",
                 "manifest: train.model must be invariant|vanilla, got '%s'", m.train.model.c_str());
    m.train.epochs = t.value("epochs", int64_t(100));
    m.train.batch_size = t.value("batch_size", int64_t(128));
    m.train.latent_dim = t.value("latent_dim", int64_t(10));
    m.train.conv1_ch = t.value("conv1_ch", int64_t(16));
    m.train.conv2_ch = t.value("conv2_ch", int64_t(32));
    m.train.fc_dim = t.value("fc_dim", int64_t(128));
    m.train.beta = t.value("beta", 1.0);
    m.train.lambda = t.value("lambda", 1.0);
    m.train.consistency = t.value("consistency", true);
    m.train.lr = t.value("lr", 1e-3);
    m.train.subset = t.value("subset", int64_t(0));
    if (t.contains("seed")) m.train.seed = t.at("seed").get<uint64_t>();
  }

  if (j.contains("eval_spec")) {
    const json& e = j.at("eval_spec");
    check_keys(e, "eval_spec", {"n_pos", "n_neg", "rotate_negatives", "seed"});
    m.eval.n_pos = e.value("n_pos", int64_t(10000));
    m.eval.n_neg = e.value("n_neg", int64_t(10000));
    m.eval.rotate_negatives = e.value("rotate_negatives", false);
    if (e.contains("seed")) m.eval.seed = e.at("seed").get<uint64_t>();
    IVL_VALIDATE(m.eval.n_pos >= 1 && m.eval.n_neg >= 1, "manifest: eval pair counts must be >= 1");
  }

  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    check_keys(s, "sweep", {"class_counts"});
    if (s.contains("class_counts"))
      for (const auto& c : s.at("class_counts")) m.sweep.class_counts.push_back(c.get<int64_t>());
  }

  if (j.contains("viz")) {
    const json& v = j.at("viz");
    check_keys(v, "viz", {"n_points", "seed"});
    m.viz.n_points = v.value("n_points", int64_t(2000));
    if (v.contains("seed")) m.viz.seed = v.at("seed").get<uint64_t>();
  }

  return m;
}

Manifest parse_manifest_file(const std::string& path) {
  return parse_manifest_text(read_file_text(path));
}

train::TrainConfig Manifest::train_config(int64_t input_side, const std::string& dataset_name) const {
  train::TrainConfig c;
  c.kind = train.model == "vanilla" ? train::ModelKind::kVanilla : train::ModelKind::kInvariant;
  c.vae.input_side = input_side;
  c.vae.latent_dim = train.latent_dim;
  c.vae.conv1_ch = train.conv1_ch;
  c.vae.conv2_ch = train.conv2_ch;
  c.vae.fc_dim = train.fc_dim;
  c.vae.beta = float(train.beta);
  c.vae.lambda_consistency = float(train.lambda);
  c.vae.consistency = train.consistency;
  c.epochs = train.epochs;
  c.batch_size = train.batch_size;
  c.opt.lr = float(train.lr);
  c.seed = train_seed();
  c.subset = train.subset;
  c.dataset = dataset_name;
  c.normalize();
  c.validate();
  return c;
}

std::string Manifest::resolved_json() const {
  json j;
  j["seed"] = seed;
  j["threads"] = threads;
  j["out_dir"] = out_dir;
  for (const auto& [role, d] : datasets) {
    json dj;
    dj["kind"] = d.kind;
    dj["name"] = d.name;
    if (d.kind == "idx") {
      dj["images"] = d.images;
      dj["labels"] = d.labels;
    } else if (d.kind == "faces") {
      dj["root"] = d.root;
    } else {
      dj["path"] = d.path;
    }
    j["datasets"][role] = dj;
  }
  if (preprocess) {
    j["preprocess"]["crop_fraction"] = preprocess->crop_fraction;
    j["preprocess"]["target_side"] = preprocess->target_side;
    j["preprocess"]["pad_to"] = preprocess->pad_to;
  }
  if (split) {
    j["split"]["mode"] = split->mode == ingest::SplitSpec::Mode::kByClassList
                             ? "by-class-list"
                             : "by-identity-fraction";
    if (split->mode == ingest::SplitSpec::Mode::kByClassList)
      j["split"]["train_classes"] = split->train_classes;
    else
      j["split"]["test_fraction"] = split->test_fraction;
    j["split"]["seed"] = split->seed;
  }
  j["train"]["model"] = train.model;
  j["train"]["epochs"] = train.epochs;
  j["train"]["batch_size"] = train.batch_size;
  j["train"]["latent_dim"] = train.latent_dim;
  j["train"]["conv1_ch"] = train.conv1_ch;
  j["train"]["conv2_ch"] = train.conv2_ch;
  j["train"]["fc_dim"] = train.fc_dim;
  j["train"]["beta"] = train.beta;
  j["train"]["lambda"] = train.lambda;
  j["train"]["consistency"] = train.consistency;
  j["train"]["lr"] = train.lr;
  j["train"]["subset"] = train.subset;
  j["train"]["seed"] = train_seed();
  j["eval_spec"]["n_pos"] = eval.n_pos;
  j["eval_spec"]["n_neg"] = eval.n_neg;
  j["eval_spec"]["rotate_negatives"] = eval.rotate_negatives;
  j["eval_spec"]["seed"] = eval_seed();
  if (!sweep.class_counts.empty()) j["sweep"]["class_counts"] = sweep.class_counts;
  j["viz"]["n_points"] = viz.n_points;
  j["viz"]["seed"] = viz_seed();
  return j.dump(2) + "\n";
}

}  // namespace ivl::cli
