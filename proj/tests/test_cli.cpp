#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include <json.hpp>

#include "helpers.hpp"
#include "ivl/commands.hpp"
#include "ivl/synthdata.hpp"

using namespace ivl::cli;
namespace fs = std::filesystem;

namespace {

// glyph corpus on disk + a manifest that trains a micro model on classes 0-4
std::string micro_manifest(const std::string& dir, int64_t latent_dim = 3) {
  const auto ds = ivl::synth::make_glyphs(ivl::synth::GlyphSet::kA, 120, 31, 16, "glyphs");
  ivl::synth::write_idx_files(ds, dir + "/img.idx", dir + "/lab.idx");
  nlohmann::json j;
  j["seed"] = 5;
  j["out_dir"] = dir + "/out";
  j["datasets"]["train"]["kind"] = "idx";
  j["datasets"]["train"]["name"] = "glyphs";
  j["datasets"]["train"]["images"] = dir + "/img.idx";
  j["datasets"]["train"]["labels"] = dir + "/lab.idx";
  j["split"]["mode"] = "by-class-list";
  j["split"]["train_classes"] = {0, 1, 2, 3, 4};
  j["train"]["model"] = "invariant";
  j["train"]["epochs"] = 2;
  j["train"]["batch_size"] = 16;
  j["train"]["latent_dim"] = latent_dim;
  j["train"]["conv1_ch"] = 4;
  j["train"]["conv2_ch"] = 6;
  j["train"]["fc_dim"] = 16;
  j["eval_spec"]["n_pos"] = 30;
  j["eval_spec"]["n_neg"] = 30;
  j["viz"]["n_points"] = 20;
  const std::string path = dir + "/manifest.json";
  ivl::write_file_text(path, j.dump(2));
  return path;
}

}  // namespace

TEST_CASE("manifest: unknown keys are rejected everywhere") {
  CHECK_THROWS_AS(parse_manifest_text(R"({"out_dir":"x","datasets":{"train":{"kind":"idx","images":"a","labels":"b"}},"bogus":1})"),
                  ivl::ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"out_dir":"x","datasets":{"train":{"kind":"idx","images":"a","labels":"b","extra":2}}})"),
                  ivl::ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"out_dir":"x","datasets":{"train":{"kind":"idx","images":"a","labels":"b"}},"train":{"typo":1}})"),
                  ivl::ValidationError);
  CHECK_THROWS_AS(parse_manifest_text("not json"), ivl::ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"datasets":{"train":{"kind":"idx","images":"a","labels":"b"}}})"),
                  ivl::ValidationError);  // out_dir required
  CHECK_THROWS_AS(parse_manifest_text(R"({"out_dir":"x","datasets":{}})"), ivl::ValidationError);
  CHECK_THROWS_AS(parse_manifest_text(R"({"out_dir":"x","datasets":{"train":{"kind":"nope"}}})"),
                  ivl::ValidationError);
}

TEST_CASE("manifest: defaults, seeds, and resolved output") {
  const Manifest m = parse_manifest_text(
      R"({"out_dir":"/tmp/x","datasets":{"train":{"kind":"idx","images":"a","labels":"b"}},
          "train":{"model":"vanilla","epochs":7},"eval_spec":{"seed":99}})");
  CHECK(m.seed == 42);
  CHECK(m.train.model == "vanilla");
  CHECK(m.train.epochs == 7);
  CHECK(m.train.latent_dim == 10);   // paper-scale default
  CHECK(m.train.batch_size == 128);
  CHECK(m.train_seed() == 42);       // falls back to the global seed
  CHECK(m.eval_seed() == 99);        // explicit
  CHECK(m.eval.n_pos == 10000);
  CHECK(m.eval.n_neg == 10000);

  const std::string resolved = m.resolved_json();
  const auto j = nlohmann::json::parse(resolved);
  CHECK(j.at("train").at("epochs") == 7);
  CHECK(j.at("eval_spec").at("seed") == 99);
  // resolved output re-parses cleanly (defaults are schema-valid)
  CHECK_NOTHROW(parse_manifest_text(resolved));
}

TEST_CASE("full micro pipeline: prepare, train both, eval, viz") {
  const std::string dir = ivltest::tmpdir("cli");
  const std::string mpath = micro_manifest(dir, /*latent_dim=*/2);
  Manifest m = parse_manifest_file(mpath);

  cmd_prepare(m);
  CHECK(fs::exists(dir + "/out/cache/glyphs.ivlb"));
  CHECK(fs::exists(dir + "/out/manifest.resolved.json"));
  const std::string stamp = ivl::read_file_text(dir + "/out/VERSION");
  CHECK(stamp.find("ivlab") != std::string::npos);

  // idempotence: second run leaves the cache untouched
  const auto t1 = fs::last_write_time(dir + "/out/cache/glyphs.ivlb");
  cmd_prepare(m);
  CHECK(fs::last_write_time(dir + "/out/cache/glyphs.ivlb") == t1);

  cmd_train(m);
  m.train.model = "vanilla";
  cmd_train(m);
  CHECK(fs::exists(checkpoint_path(m, "invariant")));
  CHECK(fs::exists(checkpoint_path(m, "vanilla")));
  CHECK(fs::exists(dir + "/out/checkpoints/invariant.log.jsonl"));

  cmd_eval(m);
  for (const std::string model : {"invariant", "vanilla"}) {
    CHECK(fs::exists(dir + "/out/eval/" + model + "/scores.csv"));
    CHECK(fs::exists(dir + "/out/eval/" + model + "/roc.csv"));
    CHECK(fs::exists(dir + "/out/eval/" + model + "/roc.svg"));
    const auto sj = nlohmann::json::parse(
        ivl::read_file_text(dir + "/out/eval/" + model + "/summary.json"));
    CHECK(sj.at("n_pos") == 30);
    CHECK(sj.at("n_neg") == 30);
    CHECK(sj.at("model") == model);
    const double auc = sj.at("auc").get<double>();
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
  }

  cmd_viz(m);
  for (const std::string model : {"invariant", "vanilla"})
    for (const std::string dom : {"X1", "X2"}) {
      const std::string base = dir + "/out/viz/" + model + "/" + dom;
      CHECK(fs::exists(base + "/scatter.csv"));
      CHECK(fs::exists(base + "/scatter_by_class.svg"));
      CHECK(fs::exists(base + "/scatter_by_angle.svg"));
      CHECK(fs::exists(base + "/stats.json"));
    }
}

TEST_CASE("eval without checkpoints reports a missing checkpoint") {
  const std::string dir = ivltest::tmpdir("climissing");
  const std::string mpath = micro_manifest(dir);
  const Manifest m = parse_manifest_file(mpath);
  try {
    cmd_eval(m);
    FAIL("expected missing checkpoint error");
  } catch (const ivl::ValidationError& e) {
    CHECK(std::string(e.what()).find("missing checkpoint") != std::string::npos);
  }
}

TEST_CASE("viz rejects non-2d checkpoints") {
  const std::string dir = ivltest::tmpdir("cliviz");
  const std::string mpath = micro_manifest(dir, /*latent_dim=*/3);
  Manifest m = parse_manifest_file(mpath);
  cmd_train(m);
  m.train.model = "vanilla";
  cmd_train(m);
  CHECK_THROWS_AS(cmd_viz(m), ivl::ValidationError);
}

TEST_CASE("cli binary: exit codes 0 / 2 and version flag") {
  const std::string dir = ivltest::tmpdir("clibin");
  const std::string mpath = micro_manifest(dir);
  auto run = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  CHECK(run(std::string(IVLAB_BIN) + " --version") == 0);
  CHECK(run(std::string(IVLAB_BIN) + " prepare --manifest " + mpath) == 0);
  // validation failure: unknown key
  ivl::write_file_text(dir + "/bad.json", R"({"out_dir":"x","bogus":1})");
  CHECK(run(std::string(IVLAB_BIN) + " prepare --manifest " + dir + "/bad.json") == 2);
  // parse failure of the command line itself
  CHECK(run(std::string(IVLAB_BIN) + " frobnicate") == 2);
  // missing dataset file: validation failure, exit 2
  ivl::write_file_text(dir + "/missing.json",
                       R"({"out_dir":")" + dir + R"(/out2","datasets":{"train":{"kind":"idx","images":")" +
                           dir + R"(/nope.idx","labels":")" + dir + R"(/nope2.idx"}}})");
  CHECK(run(std::string(IVLAB_BIN) + " prepare --manifest " + dir + "/missing.json") == 2);
}
