#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ivl/commands.hpp"

namespace {

struct Overrides {
  std::string manifest;
  std::optional<uint64_t> seed;
  std::optional<int64_t> threads;
  std::optional<std::string> out;
  std::optional<std::string> model;
  std::optional<int64_t> epochs;
  std::optional<int64_t> latent_dim;
};

void add_common(CLI::App* sub, Overrides& ov) {
  sub->add_option("--manifest", ov.manifest, "experiment manifest (JSON)")->required();
  sub->add_option("--seed", [&ov](const CLI::results_t& r) { ov.seed = std::stoull(r[0]); return true; },
                  "override the manifest's global seed");
  sub->add_option("--threads",
                  [&ov](const CLI::results_t& r) { ov.threads = std::stoll(r[0]); return true; },
                  "cap worker threads (0 = default)");
  sub->add_option("--out", [&ov](const CLI::results_t& r) { ov.out = r[0]; return true; },
                  "override the manifest's out_dir");
}

ivl::cli::Manifest load(const Overrides& ov) {
  ivl::cli::Manifest m = ivl::cli::parse_manifest_file(ov.manifest);
  if (ov.seed) m.seed = *ov.seed;
  if (ov.threads) m.threads = *ov.threads;
  if (ov.out) m.out_dir = *ov.out;
  if (ov.model) m.train.model = *ov.model;
  if (ov.epochs) m.train.epochs = *ov.epochs;
  if (ov.latent_dim) m.train.latent_dim = *ov.latent_dim;
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ivlab — invariant-representation training and OOD verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ivlab ") + ivl::cli::kToolVersion);

  Overrides ov;
  CLI::App* prepare = app.add_subcommand("prepare", "ingest, preprocess and cache datasets");
  CLI::App* train = app.add_subcommand("train", "train one model and write a checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "pair-matching evaluation on the unseen domain");
  CLI::App* sweep = app.add_subcommand("sweep", "AUC as a function of training class count");
  CLI::App* viz = app.add_subcommand("viz", "2-D latent scatter sheets");
  for (CLI::App* sub : {prepare, train, eval, sweep, viz}) add_common(sub, ov);
  train->add_option("--model", [&ov](const CLI::results_t& r) { ov.model = r[0]; return true; },
                    "invariant | vanilla");
  train->add_option("--epochs", [&ov](const CLI::results_t& r) { ov.epochs = std::stoll(r[0]); return true; },
                    "override train.epochs");
  train->add_option("--latent-dim",
                    [&ov](const CLI::results_t& r) { ov.latent_dim = std::stoll(r[0]); return true; },
                    "override train.latent_dim");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ivl::cli::Manifest m = load(ov);
    if (prepare->parsed()) ivl::cli::cmd_prepare(m);
    if (train->parsed()) ivl::cli::cmd_train(m);
    if (eval->parsed()) ivl::cli::cmd_eval(m);
    if (sweep->parsed()) ivl::cli::cmd_sweep(m);
    if (viz->parsed()) ivl::cli::cmd_viz(m);
    return 0;
  } catch (const ivl::ValidationError& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
