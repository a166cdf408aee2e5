#pragma once

#include <cstdint>
#include <string>

#include "ivl/ingest.hpp"

namespace ivl::synth {

// Deterministic synthetic corpora for demos and self-contained experiments.
//
// Glyphs: 10 parametric shape classes per family, drawn in a canonical
// orientation with per-sample scale/thickness/intensity jitter and pixel
// noise. Most classes have little or no rotational symmetry, so a rotated
// sample genuinely differs from its canonical form. Families A and B are
// disjoint shape sets, which makes cross-family transfer a real domain shift.
enum class GlyphSet { kA, kB };

ingest::RawDataset make_glyphs(GlyphSet set, int64_t n, uint64_t seed, int64_t side = 28,
                               const std::string& name = "glyphs");

// Faces: per-identity parametric face (head shape, eye geometry, brows,
// nose, mouth, hair shade) with small per-image jitter, brightness variation
// and noise. Labels are identity ids with names in label_names.
ingest::RawDataset make_faces(int64_t n_identities, int64_t imgs_per_identity, uint64_t seed,
                              int64_t side = 120, const std::string& name = "synthfaces");

// Writers that emit the corpora through the toolkit's real external formats.
void write_idx_files(const ingest::RawDataset& ds, const std::string& images_path,
                     const std::string& labels_path);
void write_face_tree(const ingest::RawDataset& ds, const std::string& root);

}  // namespace ivl::synth
