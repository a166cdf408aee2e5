#include "ivl/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "ivl/common.hpp"
#include "ivl/rng.hpp"

namespace fs = std::filesystem;

namespace ivl::ingest {

Tensor<float> RawDataset::image(int64_t i) const {
  IVL_CHECK(i >= 0 && i < count(), "image index %lld out of range [0, %lld)", (long long)i,
            (long long)count());
  const int64_t hw = height() * width();
  Tensor<float> img({height(), width()});
  std::copy(images.data.begin() + i * hw, images.data.begin() + (i + 1) * hw, img.data.begin());
  return img;
}

std::vector<int32_t> RawDataset::distinct_labels() const {
  std::set<int32_t> s(labels.begin(), labels.end());
  return std::vector<int32_t>(s.begin(), s.end());
}

void RawDataset::validate() const {
  IVL_VALIDATE(images.shape.size() == 3, "dataset '%s': images must be [n,h,w], got %s", name.c_str(),
               shape_str(images.shape).c_str());
  IVL_VALIDATE(int64_t(labels.size()) == count(), "dataset '%s': %lld images but %zu labels",
               name.c_str(), (long long)count(), labels.size());
  for (float v : images.data)
    IVL_VALIDATE(v >= 0.0f && v <= 1.0f, "dataset '%s': pixel %g outside [0,1]", name.c_str(),
                 double(v));
  if (!label_names.empty())
    for (int32_t l : labels)
      IVL_VALIDATE(l >= 0 && size_t(l) < label_names.size(),
                   "dataset '%s': label %d outside name table of size %zu", name.c_str(), l,
                   label_names.size());
}

// ---------------------------------------------------------------------------
// IDX
// ---------------------------------------------------------------------------

IdxData parse_idx(const uint8_t* bytes, size_t n) {
  IVL_VALIDATE(n >= 4, "IDX: truncated header at byte offset 0 (need 4 bytes, have %zu)", n);
  IVL_VALIDATE(bytes[0] == 0 && bytes[1] == 0, "IDX: bad magic at byte offset 0");
  IVL_VALIDATE(bytes[2] == 0x08, "IDX: unknown type code 0x%02x at byte offset 2 (only u8/0x08 supported)",
               bytes[2]);
  const size_t ndims = bytes[3];
  IVL_VALIDATE(ndims >= 1, "IDX: zero dimensions at byte offset 3");
  const size_t header = 4 + 4 * ndims;
  IVL_VALIDATE(n >= header, "IDX: truncated header at byte offset %zu", n);
  IdxData out;
  uint64_t total = 1;
  for (size_t d = 0; d < ndims; ++d) {
    const size_t off = 4 + 4 * d;
    const uint64_t dim = (uint64_t(bytes[off]) << 24) | (uint64_t(bytes[off + 1]) << 16) |
                         (uint64_t(bytes[off + 2]) << 8) | uint64_t(bytes[off + 3]);
    uint64_t next;
    IVL_VALIDATE(!__builtin_mul_overflow(total, dim, &next) && next <= (uint64_t(1) << 40),
                 "IDX: dimension product overflow at byte offset %zu", off);
    total = next;
    out.dims.push_back(int64_t(dim));
  }
  IVL_VALIDATE(n >= header + total, "IDX: truncated payload at byte offset %zu (need %llu more bytes)",
               n, (unsigned long long)(header + total - n));
  IVL_VALIDATE(n == header + total, "IDX: %zu trailing bytes at byte offset %llu", n - header - size_t(total),
               (unsigned long long)(header + total));
  out.data.assign(bytes + header, bytes + header + total);
  return out;
}

std::vector<uint8_t> serialize_idx(const IdxData& idx) {
  IVL_CHECK(!idx.dims.empty(), "IDX serialize: no dimensions");
  uint64_t total = 1;
  for (int64_t d : idx.dims) {
    IVL_CHECK(d >= 0 && d <= int64_t(UINT32_MAX), "IDX serialize: dimension %lld out of range",
              (long long)d);
    total *= uint64_t(d);
  }
  IVL_CHECK(total == idx.data.size(), "IDX serialize: dims product %llu != data size %zu",
            (unsigned long long)total, idx.data.size());
  std::vector<uint8_t> out;
  out.reserve(4 + 4 * idx.dims.size() + idx.data.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(0x08);
  out.push_back(uint8_t(idx.dims.size()));
  for (int64_t d : idx.dims) {
    out.push_back(uint8_t(uint64_t(d) >> 24));
    out.push_back(uint8_t(uint64_t(d) >> 16));
    out.push_back(uint8_t(uint64_t(d) >> 8));
    out.push_back(uint8_t(uint64_t(d)));
  }
  out.insert(out.end(), idx.data.begin(), idx.data.end());
  return out;
}

RawDataset load_idx_dataset(const std::string& images_path, const std::string& labels_path,
                            const std::string& name) {
  IdxData imgs = parse_idx(read_file_bytes(images_path));
  IdxData labs = parse_idx(read_file_bytes(labels_path));
  IVL_VALIDATE(imgs.dims.size() == 3, "%s: expected 3-D image tensor, got %zu dims",
               images_path.c_str(), imgs.dims.size());
  IVL_VALIDATE(labs.dims.size() == 1, "%s: expected 1-D label vector, got %zu dims",
               labels_path.c_str(), labs.dims.size());
  IVL_VALIDATE(imgs.dims[0] == labs.dims[0], "image count %lld != label count %lld",
               (long long)imgs.dims[0], (long long)labs.dims[0]);
  RawDataset ds;
  ds.name = name;
  ds.images = Tensor<float>({imgs.dims[0], imgs.dims[1], imgs.dims[2]});
  for (size_t i = 0; i < imgs.data.size(); ++i) ds.images.data[i] = float(imgs.data[i]) / 255.0f;
  ds.labels.assign(labs.data.begin(), labs.data.end());
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// PGM
// ---------------------------------------------------------------------------

namespace {

// header tokens may be separated by whitespace and '#' comments
size_t next_token(const std::vector<uint8_t>& b, size_t pos, std::string& tok) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  tok.clear();
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(char(b[pos++]));
  IVL_VALIDATE(!tok.empty(), "PGM: truncated header");
  return pos;
}

}  // namespace

Tensor<float> read_pgm(const std::string& path) {
  const std::vector<uint8_t> b = read_file_bytes(path);
  std::string tok;
  size_t pos = next_token(b, 0, tok);
  IVL_VALIDATE(tok == "P5" || tok == "P2", "%s: not a PGM file (magic '%s')", path.c_str(), tok.c_str());
  const bool binary = tok == "P5";
  pos = next_token(b, pos, tok);
  const int64_t w = std::stoll(tok);
  pos = next_token(b, pos, tok);
  const int64_t h = std::stoll(tok);
  pos = next_token(b, pos, tok);
  const int64_t maxval = std::stoll(tok);
  IVL_VALIDATE(w > 0 && h > 0, "%s: bad PGM dimensions %lldx%lld", path.c_str(), (long long)w,
               (long long)h);
  IVL_VALIDATE(maxval > 0 && maxval <= 255, "%s: unsupported PGM maxval %lld", path.c_str(),
               (long long)maxval);
  Tensor<float> img({h, w});
  if (binary) {
    ++pos;  // single whitespace after maxval
    IVL_VALIDATE(b.size() - pos >= size_t(h * w), "%s: truncated PGM payload", path.c_str());
    for (int64_t i = 0; i < h * w; ++i) img[i] = float(b[pos + size_t(i)]) / float(maxval);
  } else {
    for (int64_t i = 0; i < h * w; ++i) {
      pos = next_token(b, pos, tok);
      img[i] = float(std::stoll(tok)) / float(maxval);
    }
  }
  return img;
}

void write_pgm(const std::string& path, const Tensor<float>& img) {
  IVL_CHECK(img.shape.size() == 2, "write_pgm expects [h,w], got %s", shape_str(img.shape).c_str());
  std::string header = "P5\n" + std::to_string(img.shape[1]) + " " + std::to_string(img.shape[0]) +
                       "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  for (float v : img.data) {
    const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    out.push_back(uint8_t(std::lround(c * 255.0f)));
  }
  write_file_bytes(path, out.data(), out.size());
}

RawDataset load_face_dir(const std::string& root, const std::string& name) {
  IVL_VALIDATE(fs::is_directory(root), "face dataset root '%s' is not a directory", root.c_str());
  std::vector<std::string> identities;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) identities.push_back(e.path().filename().string());
  std::sort(identities.begin(), identities.end());
  IVL_VALIDATE(!identities.empty(), "face dataset root '%s' has no identity directories", root.c_str());

  RawDataset ds;
  ds.name = name;
  ds.label_names = identities;
  std::vector<Tensor<float>> imgs;
  for (size_t id = 0; id < identities.size(); ++id) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(fs::path(root) / identities[id]))
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      imgs.push_back(read_pgm(f));
      ds.labels.push_back(int32_t(id));
    }
  }
  IVL_VALIDATE(!imgs.empty(), "face dataset '%s' has no .pgm images", root.c_str());
  const Shape s0 = imgs[0].shape;
  for (const auto& im : imgs)
    IVL_VALIDATE(im.shape == s0, "face dataset '%s': mixed image sizes %s vs %s", root.c_str(),
                 shape_str(s0).c_str(), shape_str(im.shape).c_str());
  ds.images = Tensor<float>({int64_t(imgs.size()), s0[0], s0[1]});
  for (size_t i = 0; i < imgs.size(); ++i)
    std::copy(imgs[i].data.begin(), imgs[i].data.end(), ds.images.data.begin() + int64_t(i) * s0[0] * s0[1]);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// splits
// ---------------------------------------------------------------------------

namespace {

RawDataset take_subset(const RawDataset& ds, const std::vector<int64_t>& idx) {
  RawDataset out;
  out.name = ds.name;
  out.label_names = ds.label_names;
  out.images = Tensor<float>({int64_t(idx.size()), ds.height(), ds.width()});
  const int64_t hw = ds.height() * ds.width();
  for (size_t i = 0; i < idx.size(); ++i) {
    std::copy(ds.images.data.begin() + idx[i] * hw, ds.images.data.begin() + (idx[i] + 1) * hw,
              out.images.data.begin() + int64_t(i) * hw);
    out.labels.push_back(ds.labels[size_t(idx[i])]);
  }
  return out;
}

}  // namespace

std::pair<RawDataset, RawDataset> split_by_labels(const RawDataset& ds, const SplitSpec& spec) {
  IVL_VALIDATE(spec.mode == SplitSpec::Mode::kByClassList, "split_by_labels requires by-class-list mode");
  IVL_VALIDATE(!spec.train_classes.empty(), "train_classes must be nonempty");
  const auto classes = ds.distinct_labels();
  std::set<int32_t> have(classes.begin(), classes.end());
  std::set<int32_t> train(spec.train_classes.begin(), spec.train_classes.end());
  for (int32_t c : train)
    IVL_VALIDATE(have.count(c), "train class %d does not occur in dataset '%s'", c, ds.name.c_str());
  IVL_VALIDATE(train.size() < have.size(),
               "train_classes cover all %zu classes of '%s'; the test domain would be empty",
               have.size(), ds.name.c_str());

  std::vector<int64_t> i1, i2;
  for (int64_t i = 0; i < ds.count(); ++i)
    (train.count(ds.labels[size_t(i)]) ? i1 : i2).push_back(i);

  RawDataset x1 = take_subset(ds, i1);
  RawDataset x2 = take_subset(ds, i2);
  SplitProvenance prov;
  prov.valid = true;
  prov.dataset = ds.name;
  prov.mode = "by-class-list";
  prov.train_classes.assign(train.begin(), train.end());
  prov.seed = spec.seed;
  x1.provenance = prov;
  x1.provenance.side = "X1";
  x2.provenance = prov;
  x2.provenance.side = "X2";
  return {std::move(x1), std::move(x2)};
}

std::pair<RawDataset, RawDataset> split_by_identity(const RawDataset& ds, const SplitSpec& spec) {
  IVL_VALIDATE(spec.mode == SplitSpec::Mode::kByIdentityFraction,
               "split_by_identity requires by-identity-fraction mode");
  IVL_VALIDATE(spec.test_fraction > 0.0 && spec.test_fraction < 1.0,
               "test_fraction must be in (0,1), got %g", spec.test_fraction);
  const auto ids = ds.distinct_labels();
  IVL_VALIDATE(ids.size() >= 2, "identity split needs at least two identities, dataset '%s' has %zu",
               ds.name.c_str(), ids.size());

  // identities in seeded random order; whole identities move to X2 until it
  // reaches the requested fraction
  std::vector<int32_t> order(ids.begin(), ids.end());
  Rng rng = Rng::derive(spec.seed, 0x6964737074ull);
  shuffle(order, rng);

  std::vector<int64_t> count_by_id(size_t(ids.back()) + 1, 0);
  for (int32_t l : ds.labels) ++count_by_id[size_t(l)];

  const double threshold = spec.test_fraction * double(ds.count());
  std::set<int32_t> test_ids;
  int64_t test_count = 0;
  for (int32_t id : order) {
    if (double(test_count) >= threshold) break;
    test_ids.insert(id);
    test_count += count_by_id[size_t(id)];
  }
  IVL_VALIDATE(test_ids.size() < ids.size(), "identity split consumed every identity of '%s'",
               ds.name.c_str());

  std::vector<int64_t> i1, i2;
  for (int64_t i = 0; i < ds.count(); ++i)
    (test_ids.count(ds.labels[size_t(i)]) ? i2 : i1).push_back(i);

  RawDataset x1 = take_subset(ds, i1);
  RawDataset x2 = take_subset(ds, i2);
  SplitProvenance prov;
  prov.valid = true;
  prov.dataset = ds.name;
  prov.mode = "by-identity-fraction";
  for (int32_t id : ids)
    if (!test_ids.count(id)) prov.train_classes.push_back(id);
  prov.seed = spec.seed;
  x1.provenance = prov;
  x1.provenance.side = "X1";
  x2.provenance = prov;
  x2.provenance.side = "X2";
  return {std::move(x1), std::move(x2)};
}

std::pair<RawDataset, RawDataset> split_dataset(const RawDataset& ds, const SplitSpec& spec) {
  return spec.mode == SplitSpec::Mode::kByClassList ? split_by_labels(ds, spec)
                                                    : split_by_identity(ds, spec);
}

// ---------------------------------------------------------------------------
// preprocessing
// ---------------------------------------------------------------------------

void PreprocessConfig::validate() const {
  IVL_VALIDATE(crop_fraction > 0.0 && crop_fraction <= 1.0, "crop_fraction must be in (0,1], got %g",
               crop_fraction);
  IVL_VALIDATE(target_side >= 1, "target_side must be >= 1");
  IVL_VALIDATE(pad_to >= target_side, "pad_to %lld must be >= target_side %lld", (long long)pad_to,
               (long long)target_side);
}

Tensor<float> preprocess_face(const Tensor<float>& img, const PreprocessConfig& cfg) {
  cfg.validate();
  IVL_CHECK(img.shape.size() == 2, "preprocess_face expects [h,w], got %s",
            shape_str(img.shape).c_str());
  const int64_t h = img.shape[0], w = img.shape[1];
  const int64_t crop = int64_t(std::llround(cfg.crop_fraction * double(std::min(h, w))));
  IVL_VALIDATE(crop >= 1, "crop of %gx%lld is smaller than one pixel", cfg.crop_fraction,
               (long long)std::min(h, w));
  IVL_VALIDATE(crop >= cfg.target_side,
               "cropped side %lld is smaller than target_side %lld; refusing to upsample",
               (long long)crop, (long long)cfg.target_side);

  const int64_t y0 = (h - crop) / 2, x0 = (w - crop) / 2;
  const int64_t t = cfg.target_side;
  const double scale = double(crop) / double(t);

  // exact fractional box filter over the crop window
  Tensor<float> small({t, t});
  for (int64_t oy = 0; oy < t; ++oy) {
    const double ys = oy * scale, ye = (oy + 1) * scale;
    for (int64_t ox = 0; ox < t; ++ox) {
      const double xs = ox * scale, xe = (ox + 1) * scale;
      double acc = 0.0, wsum = 0.0;
      for (int64_t iy = int64_t(std::floor(ys)); iy < int64_t(std::ceil(ye)); ++iy) {
        const double wy = std::min(ye, double(iy + 1)) - std::max(ys, double(iy));
        if (wy <= 0.0) continue;
        for (int64_t ix = int64_t(std::floor(xs)); ix < int64_t(std::ceil(xe)); ++ix) {
          const double wx = std::min(xe, double(ix + 1)) - std::max(xs, double(ix));
          if (wx <= 0.0) continue;
          const int64_t sy = std::min(y0 + iy, h - 1), sx = std::min(x0 + ix, w - 1);
          acc += wy * wx * double(img[sy * w + sx]);
          wsum += wy * wx;
        }
      }
      const double v = acc / wsum;
      small[oy * t + ox] = float(v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v));
    }
  }

  Tensor<float> out({cfg.pad_to, cfg.pad_to});
  const int64_t off = (cfg.pad_to - t) / 2;
  for (int64_t y = 0; y < t; ++y)
    for (int64_t x = 0; x < t; ++x) out[(y + off) * cfg.pad_to + (x + off)] = small[y * t + x];
  return out;
}

RawDataset preprocess_dataset(const RawDataset& ds, const PreprocessConfig& cfg) {
  cfg.validate();
  RawDataset out;
  out.name = ds.name;
  out.labels = ds.labels;
  out.label_names = ds.label_names;
  out.provenance = ds.provenance;
  out.images = Tensor<float>({ds.count(), cfg.pad_to, cfg.pad_to});
  const int64_t hw = cfg.pad_to * cfg.pad_to;
  for (int64_t i = 0; i < ds.count(); ++i) {
    Tensor<float> p = preprocess_face(ds.image(i), cfg);
    std::copy(p.data.begin(), p.data.end(), out.images.data.begin() + i * hw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// cache
// ---------------------------------------------------------------------------

void write_cache(const std::string& path, const RawDataset& ds) {
  ds.validate();
  IVL_CHECK(ds.count() <= int64_t(UINT32_MAX) && ds.height() <= 65535 && ds.width() <= 65535,
            "dataset too large for cache format");
  ByteWriter wtr;
  wtr.bytes("IVLB", 4);
  wtr.u16(1);  // version
  wtr.u16(ds.label_names.empty() ? 0 : 1);
  wtr.u32(uint32_t(ds.count()));
  wtr.u16(uint16_t(ds.height()));
  wtr.u16(uint16_t(ds.width()));
  for (float v : ds.images.data) wtr.f32(v);
  for (int32_t l : ds.labels) wtr.i32(l);
  if (!ds.label_names.empty()) {
    wtr.u32(uint32_t(ds.label_names.size()));
    for (const auto& n : ds.label_names) wtr.str(n);
  }
  write_file_bytes(path, wtr.data().data(), wtr.size());
}

RawDataset read_cache(const std::string& path) {
  const std::vector<uint8_t> bytes = read_file_bytes(path);
  ByteReader rd(bytes);
  char magic[4];
  rd.bytes(magic, 4);
  IVL_VALIDATE(std::string(magic, 4) == "IVLB", "%s: not a dataset cache (bad magic)", path.c_str());
  const uint16_t version = rd.u16();
  IVL_VALIDATE(version == 1, "%s: unsupported cache version %u", path.c_str(), version);
  const uint16_t kind = rd.u16();
  const uint32_t count = rd.u32();
  const uint16_t h = rd.u16();
  const uint16_t w = rd.u16();
  RawDataset ds;
  ds.name = fs::path(path).stem().string();
  ds.images = Tensor<float>({int64_t(count), int64_t(h), int64_t(w)});
  for (auto& v : ds.images.data) v = rd.f32();
  ds.labels.resize(count);
  for (auto& l : ds.labels) l = rd.i32();
  if (kind == 1) {
    const uint32_t nn = rd.u32();
    for (uint32_t i = 0; i < nn; ++i) ds.label_names.push_back(rd.str());
  }
  IVL_VALIDATE(rd.remaining() == 0, "%s: %zu trailing bytes", path.c_str(), rd.remaining());
  ds.validate();
  return ds;
}

}  // namespace ivl::ingest
