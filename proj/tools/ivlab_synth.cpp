#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "ivl/synthdata.hpp"

namespace fs = std::filesystem;

// Emits the synthetic demo corpora in the toolkit's external formats: two
// glyph families as IDX file pairs and an identity-labelled face tree as PGM
// directories. Everything is deterministic in the seed.
int main(int argc, char** argv) {
  CLI::App app{"ivlab-synth — deterministic synthetic corpora for ivlab"};
  std::string out = "data";
  uint64_t seed = 7;
  int64_t n_glyphs = 20000;
  int64_t n_identities = 520;
  int64_t imgs_per_identity = 3;
  bool skip_faces = false;
  app.add_option("--out", out, "output directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--glyphs", n_glyphs, "samples per glyph family");
  app.add_option("--identities", n_identities, "face identities");
  app.add_option("--images-per-identity", imgs_per_identity, "face images per identity");
  app.add_flag("--skip-faces", skip_faces, "only write the glyph corpora");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out);
    using ivl::synth::GlyphSet;
    const auto a = ivl::synth::make_glyphs(GlyphSet::kA, n_glyphs, seed, 28, "glyphsA");
    ivl::synth::write_idx_files(a, (fs::path(out) / "glyphsA-images.idx").string(),
                                (fs::path(out) / "glyphsA-labels.idx").string());
    printf("wrote glyphsA: %lld images\n", (long long)a.count());
    const auto b = ivl::synth::make_glyphs(GlyphSet::kB, n_glyphs, seed + 1, 28, "glyphsB");
    ivl::synth::write_idx_files(b, (fs::path(out) / "glyphsB-images.idx").string(),
                                (fs::path(out) / "glyphsB-labels.idx").string());
    printf("wrote glyphsB: %lld images\n", (long long)b.count());
    if (!skip_faces) {
      const auto f = ivl::synth::make_faces(n_identities, imgs_per_identity, seed + 2, 120, "synthfaces");
      ivl::synth::write_face_tree(f, (fs::path(out) / "faces").string());
      printf("wrote faces: %lld identities x %lld images\n", (long long)n_identities,
             (long long)imgs_per_identity);
    }
    return 0;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
