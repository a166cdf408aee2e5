#pragma once

#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace ivl {

// Base error for anything that should abort the current operation.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed files, invalid configs, violated preconditions.
// The CLI maps this to exit code 2; everything else maps to 3.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

inline std::string strfmt(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[1024];
  vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

#define IVL_CHECK(cond, ...)                                   \
  do {                                                         \
    if (!(cond)) throw ::ivl::Error(::ivl::strfmt(__VA_ARGS__)); \
  } while (0)

#define IVL_VALIDATE(cond, ...)                                          \
  do {                                                                   \
    if (!(cond)) throw ::ivl::ValidationError(::ivl::strfmt(__VA_ARGS__)); \
  } while (0)

// --- little-endian byte buffer helpers (checkpoints, caches) ---

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) { for (int i = 0; i < 2; ++i) u8(uint8_t(v >> (8 * i))); }
  void u32(uint32_t v) { for (int i = 0; i < 4; ++i) u8(uint8_t(v >> (8 * i))); }
  void u64(uint64_t v) { for (int i = 0; i < 8; ++i) u8(uint8_t(v >> (8 * i))); }
  void i32(int32_t v) { u32(uint32_t(v)); }
  void i64(int64_t v) { u64(uint64_t(v)); }
  void f32(float v) { uint32_t u; static_assert(sizeof(u) == sizeof(v)); __builtin_memcpy(&u, &v, 4); u32(u); }
  void f64(double v) { uint64_t u; __builtin_memcpy(&u, &v, 8); u64(u); }
  void bytes(const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  void str(const std::string& s) { u32(uint32_t(s.size())); bytes(s.data(), s.size()); }
  const std::vector<uint8_t>& data() const { return buf_; }
  std::vector<uint8_t>& data() { return buf_; }
  size_t size() const { return buf_.size(); }

 private:
  std::vector<uint8_t> buf_;
};

class ByteReader {
 public:
  ByteReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const std::vector<uint8_t>& v) : p_(v.data()), n_(v.size()) {}

  size_t offset() const { return off_; }
  size_t remaining() const { return n_ - off_; }

  uint8_t u8() { need(1); return p_[off_++]; }
  uint16_t u16() { uint16_t v = 0; for (int i = 0; i < 2; ++i) v |= uint16_t(u8()) << (8 * i); return v; }
  uint32_t u32() { uint32_t v = 0; for (int i = 0; i < 4; ++i) v |= uint32_t(u8()) << (8 * i); return v; }
  uint64_t u64() { uint64_t v = 0; for (int i = 0; i < 8; ++i) v |= uint64_t(u8()) << (8 * i); return v; }
  int32_t i32() { return int32_t(u32()); }
  int64_t i64() { return int64_t(u64()); }
  float f32() { uint32_t u = u32(); float v; __builtin_memcpy(&v, &u, 4); return v; }
  double f64() { uint64_t u = u64(); double v; __builtin_memcpy(&v, &u, 8); return v; }
  void bytes(void* dst, size_t n) { need(n); __builtin_memcpy(dst, p_ + off_, n); off_ += n; }
  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(p_ + off_), len);
    off_ += len;
    return s;
  }

 private:
  void need(size_t n) const {
    if (off_ + n > n_)
      throw ValidationError(strfmt("truncated buffer: need %zu bytes at offset %zu, have %zu", n, off_, n_ - off_));
  }
  const uint8_t* p_;
  size_t n_;
  size_t off_ = 0;
};

// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
inline uint32_t crc32(const uint8_t* data, size_t n, uint32_t seed = 0) {
  static const auto table = [] {
    std::vector<uint32_t> t(256);
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  uint32_t c = ~seed;
  for (size_t i = 0; i < n; ++i) c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return ~c;
}

std::vector<uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const void* data, size_t n);
std::string read_file_text(const std::string& path);
void write_file_text(const std::string& path, const std::string& text);

}  // namespace ivl
