#include "segmvs/pfm.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace segmvs {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("PFM '" + path + "': " + what);
}

void write_header(std::FILE* f, const char* magic, Index cols, Index rows) {
  std::fprintf(f, "%s\n%lld %lld\n-1.0\n", magic, (long long)cols, (long long)rows);
}

void read_header(std::FILE* f, const std::string& path, std::string& magic, Index& cols, Index& rows) {
  char tag[3] = {0, 0, 0};
  long long w = 0, h = 0;
  double scale = 0.0;
  if (std::fscanf(f, "%2s %lld %lld %lf", tag, &w, &h, &scale) != 4) fail(path, "malformed header");
  std::fgetc(f);  // single whitespace byte terminating the header
  magic = tag;
  if (scale >= 0.0) fail(path, "big-endian PFM not supported");
  if (w <= 0 || h <= 0) fail(path, "invalid dimensions");
  cols = Index(w);
  rows = Index(h);
}

}  // namespace

void write_pfm(const std::string& path, const Rasterf& raster) {
  if (!raster.isFinite().all()) fail(path, "raster contains non-finite values; use the invalid marker");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  write_header(f.get(), "Pf", raster.cols(), raster.rows());
  // PFM scanlines run bottom-up.
  for (Index r = raster.rows() - 1; r >= 0; --r) {
    if (std::fwrite(raster.row(r).data(), sizeof(float), size_t(raster.cols()), f.get()) !=
        size_t(raster.cols()))
      fail(path, "short write");
  }
}

Rasterf read_pfm(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  std::string magic;
  Index cols = 0, rows = 0;
  read_header(f.get(), path, magic, cols, rows);
  if (magic != "Pf") fail(path, "expected single-channel 'Pf', got '" + magic + "'");
  Rasterf raster(rows, cols);
  for (Index r = rows - 1; r >= 0; --r) {
    if (std::fread(raster.row(r).data(), sizeof(float), size_t(cols), f.get()) != size_t(cols))
      fail(path, "short read");
  }
  return raster;
}

void write_pfm3(const std::string& path, const std::array<Rasterf, 3>& channels) {
  const Index rows = channels[0].rows(), cols = channels[0].cols();
  for (const auto& ch : channels) {
    if (ch.rows() != rows || ch.cols() != cols) fail(path, "channel dimensions differ");
    if (!ch.isFinite().all()) fail(path, "raster contains non-finite values");
  }
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) fail(path, "cannot open for writing");
  write_header(f.get(), "PF", cols, rows);
  std::vector<float> line(size_t(cols) * 3);
  for (Index r = rows - 1; r >= 0; --r) {
    for (Index c = 0; c < cols; ++c)
      for (int k = 0; k < 3; ++k) line[size_t(c) * 3 + k] = channels[size_t(k)](r, c);
    if (std::fwrite(line.data(), sizeof(float), line.size(), f.get()) != line.size())
      fail(path, "short write");
  }
}

std::array<Rasterf, 3> read_pfm3(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) fail(path, "cannot open");
  std::string magic;
  Index cols = 0, rows = 0;
  read_header(f.get(), path, magic, cols, rows);
  if (magic != "PF") fail(path, "expected three-channel 'PF', got '" + magic + "'");
  std::array<Rasterf, 3> channels{Rasterf(rows, cols), Rasterf(rows, cols), Rasterf(rows, cols)};
  std::vector<float> line(size_t(cols) * 3);
  for (Index r = rows - 1; r >= 0; --r) {
    if (std::fread(line.data(), sizeof(float), line.size(), f.get()) != line.size())
      fail(path, "short read");
    for (Index c = 0; c < cols; ++c)
      for (int k = 0; k < 3; ++k) channels[size_t(k)](r, c) = line[size_t(c) * 3 + k];
  }
  return channels;
}

}  // namespace segmvs
