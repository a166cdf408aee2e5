#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ivl/tensor.hpp"

namespace ivl::ingest {

// Where a dataset came from after a split; carried so downstream stages can
// verify train/eval hygiene (a checkpoint is rejected when its training
// labels overlap the evaluation domain).
struct SplitProvenance {
  bool valid = false;
  std::string dataset;
  std::string mode;                    // "by-class-list" | "by-identity-fraction"
  std::string side;                    // "X1" | "X2"
  std::vector<int32_t> train_classes;  // sorted class/identity ids on the X1 side
  uint64_t seed = 0;
};

struct RawDataset {
  std::string name;
  Tensor<float> images;                  // [n, h, w], pixel values in [0, 1]
  std::vector<int32_t> labels;           // one class id per image
  std::vector<std::string> label_names;  // when nonempty, labels index into it (identities)
  SplitProvenance provenance;

  int64_t count() const { return images.shape.empty() ? 0 : images.shape[0]; }
  int64_t height() const { return images.shape.size() == 3 ? images.shape[1] : 0; }
  int64_t width() const { return images.shape.size() == 3 ? images.shape[2] : 0; }
  Tensor<float> image(int64_t i) const;
  std::vector<int32_t> distinct_labels() const;  // ascending
  void validate() const;
};

// --- IDX (big-endian header, u8 payload) ---

struct IdxData {
  std::vector<int64_t> dims;
  std::vector<uint8_t> data;  // row-major
};

IdxData parse_idx(const uint8_t* bytes, size_t n);
inline IdxData parse_idx(const std::vector<uint8_t>& v) { return parse_idx(v.data(), v.size()); }
std::vector<uint8_t> serialize_idx(const IdxData& idx);

// images: [n,h,w] u8 IDX; labels: [n] u8 IDX; pixels normalized to [0,1]
RawDataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                            const std::string& name);

// --- PGM (P5 binary or P2 ascii, maxval <= 255) ---

Tensor<float> read_pgm(const std::string& path);
void write_pgm(const std::string& path, const Tensor<float>& img);

// Loads <root>/<identity>/<image>.pgm with identities and files visited in
// sorted order; labels index into label_names.
RawDataset load_face_dir(const std::string& root, const std::string& name);

// --- splits ---

struct SplitSpec {
  enum class Mode { kByClassList, kByIdentityFraction };
  Mode mode = Mode::kByClassList;
  std::vector<int32_t> train_classes;
  double test_fraction = 0.1;
  uint64_t seed = 0;
};

std::pair<RawDataset, RawDataset> split_by_labels(const RawDataset& ds, const SplitSpec& spec);
std::pair<RawDataset, RawDataset> split_by_identity(const RawDataset& ds, const SplitSpec& spec);
std::pair<RawDataset, RawDataset> split_dataset(const RawDataset& ds, const SplitSpec& spec);

// --- face preprocessing ---

struct PreprocessConfig {
  double crop_fraction = 0.6;  // central-crop side as a fraction of min(h, w)
  int64_t target_side = 50;    // area-average downsample target
  int64_t pad_to = 72;         // zero-pad to this side, content centered
  void validate() const;
};

// central crop -> box-filter downsample -> symmetric zero pad
Tensor<float> preprocess_face(const Tensor<float>& img, const PreprocessConfig& cfg);
RawDataset preprocess_dataset(const RawDataset& ds, const PreprocessConfig& cfg);

// --- preprocessed dataset cache ("IVLB") ---
// 16-byte header: magic "IVLB", u16 version, u16 label kind (0 = plain ids,
// 1 = ids plus a string table), u32 count, u16 h, u16 w; then count*h*w
// little-endian f32 pixels, count little-endian i32 labels, and for kind 1 a
// string table (u32 count, then length-prefixed names). See docs/formats.md.
void write_cache(const std::string& path, const RawDataset& ds);
RawDataset read_cache(const std::string& path);

}  // namespace ivl::ingest
