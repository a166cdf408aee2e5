#include "ivl/common.hpp"

#include <cstdio>
#include <memory>

namespace ivl {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) fclose(f);
  }
};
using File = std::unique_ptr<FILE, FileCloser>;

}  // namespace

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  File f(fopen(path.c_str(), "rb"));
  IVL_VALIDATE(f != nullptr, "cannot open '%s' for reading", path.c_str());
  fseek(f.get(), 0, SEEK_END);
  const long size = ftell(f.get());
  IVL_VALIDATE(size >= 0, "cannot stat '%s'", path.c_str());
  fseek(f.get(), 0, SEEK_SET);
  std::vector<uint8_t> buf(static_cast<size_t>(size), uint8_t(0));
  if (size > 0)
    IVL_VALIDATE(fread(buf.data(), 1, buf.size(), f.get()) == buf.size(), "short read from '%s'",
                 path.c_str());
  return buf;
}

void write_file_bytes(const std::string& path, const void* data, size_t n) {
  File f(fopen(path.c_str(), "wb"));
  IVL_CHECK(f != nullptr, "cannot open '%s' for writing", path.c_str());
  IVL_CHECK(n == 0 || fwrite(data, 1, n, f.get()) == n, "short write to '%s'", path.c_str());
}

std::string read_file_text(const std::string& path) {
  const auto b = read_file_bytes(path);
  return std::string(b.begin(), b.end());
}

void write_file_text(const std::string& path, const std::string& text) {
  write_file_bytes(path, text.data(), text.size());
}

}  // namespace ivl
