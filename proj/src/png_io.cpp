#include "segmvs/png_io.hpp"

#include <png.h>

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
  throw std::runtime_error("PNG '" + path + "': " + what);
}

class PngWriter {
 public:
  PngWriter(const std::string& path, Index rows, Index cols, int bitDepth, int colorType)
      : path_(path), file_(std::fopen(path.c_str(), "wb")) {
    if (!file_) fail(path_, "cannot open for writing");
    png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) fail(path_, "libpng init failed");
    if (setjmp(png_jmpbuf(png_))) fail(path_, "libpng write error");
    png_init_io(png_, file_.get());
    png_set_IHDR(png_, info_, png_uint_32(cols), png_uint_32(rows), bitDepth, colorType,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png_, info_);
  }

  ~PngWriter() {
    if (png_) png_destroy_write_struct(&png_, &info_);
  }

  void write_rows(std::vector<png_bytep>& rows) {
    if (setjmp(png_jmpbuf(png_))) fail(path_, "libpng write error");
    png_write_image(png_, rows.data());
    png_write_end(png_, nullptr);
  }

 private:
  std::string path_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

class PngReader {
 public:
  explicit PngReader(const std::string& path) : path_(path), file_(std::fopen(path.c_str(), "rb")) {
    if (!file_) fail(path_, "cannot open");
    png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info_ = png_ ? png_create_info_struct(png_) : nullptr;
    if (!png_ || !info_) fail(path_, "libpng init failed");
    if (setjmp(png_jmpbuf(png_))) fail(path_, "libpng read error");
    png_init_io(png_, file_.get());
    png_read_info(png_, info_);
  }

  ~PngReader() {
    if (png_) png_destroy_read_struct(&png_, &info_, nullptr);
  }

  png_structp png() { return png_; }
  png_infop info() { return info_; }

  void read_rows(std::vector<png_bytep>& rows) {
    if (setjmp(png_jmpbuf(png_))) fail(path_, "libpng read error");
    png_read_image(png_, rows.data());
  }

  [[noreturn]] void fail_fmt(const std::string& what) { fail(path_, what); }

 private:
  std::string path_;
  FilePtr file_;
  png_structp png_ = nullptr;
  png_infop info_ = nullptr;
};

}  // namespace

void write_png_gray8(const std::string& path, const Rasteru8& raster) {
  PngWriter w(path, raster.rows(), raster.cols(), 8, PNG_COLOR_TYPE_GRAY);
  std::vector<png_bytep> rows(size_t(raster.rows()));
  for (Index r = 0; r < raster.rows(); ++r)
    rows[size_t(r)] = const_cast<png_bytep>(raster.row(r).data());
  w.write_rows(rows);
}

Rasteru8 read_png_gray8(const std::string& path) {
  PngReader reader(path);
  png_structp png = reader.png();
  png_infop info = reader.info();
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 8)
    reader.fail_fmt("expected 8-bit grayscale");
  Rasteru8 raster(Index(png_get_image_height(png, info)), Index(png_get_image_width(png, info)));
  std::vector<png_bytep> rows(size_t(raster.rows()));
  for (Index r = 0; r < raster.rows(); ++r) rows[size_t(r)] = raster.row(r).data();
  reader.read_rows(rows);
  return raster;
}

void write_png_gray16(const std::string& path, const Rasteru16& raster) {
  PngWriter w(path, raster.rows(), raster.cols(), 16, PNG_COLOR_TYPE_GRAY);
  // PNG samples are big-endian; swap on little-endian hosts.
  std::vector<uint16_t> buf(size_t(raster.rows()) * size_t(raster.cols()));
  for (Index r = 0; r < raster.rows(); ++r)
    for (Index c = 0; c < raster.cols(); ++c) {
      const uint16_t v = raster(r, c);
      buf[size_t(r) * size_t(raster.cols()) + size_t(c)] = uint16_t((v >> 8) | (v << 8));
    }
  std::vector<png_bytep> rows(size_t(raster.rows()));
  for (Index r = 0; r < raster.rows(); ++r)
    rows[size_t(r)] = reinterpret_cast<png_bytep>(&buf[size_t(r) * size_t(raster.cols())]);
  w.write_rows(rows);
}

Rasteru16 read_png_gray16(const std::string& path) {
  PngReader reader(path);
  png_structp png = reader.png();
  png_infop info = reader.info();
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 16)
    reader.fail_fmt("expected 16-bit grayscale");
  const Index rows_n = Index(png_get_image_height(png, info));
  const Index cols_n = Index(png_get_image_width(png, info));
  std::vector<uint16_t> buf(static_cast<size_t>(rows_n) * static_cast<size_t>(cols_n));
  std::vector<png_bytep> rows(static_cast<size_t>(rows_n));
  for (Index r = 0; r < rows_n; ++r)
    rows[size_t(r)] = reinterpret_cast<png_bytep>(&buf[size_t(r) * size_t(cols_n)]);
  reader.read_rows(rows);
  Rasteru16 raster(rows_n, cols_n);
  for (Index r = 0; r < rows_n; ++r)
    for (Index c = 0; c < cols_n; ++c) {
      const uint16_t v = buf[size_t(r) * size_t(cols_n) + size_t(c)];
      raster(r, c) = uint16_t((v >> 8) | (v << 8));
    }
  return raster;
}

void write_png_rgb8(const std::string& path, const std::array<Rasteru8, 3>& rgb) {
  const Index rows_n = rgb[0].rows(), cols_n = rgb[0].cols();
  for (const auto& ch : rgb)
    if (ch.rows() != rows_n || ch.cols() != cols_n) fail(path, "channel dimensions differ");
  PngWriter w(path, rows_n, cols_n, 8, PNG_COLOR_TYPE_RGB);
  std::vector<uint8_t> buf(size_t(rows_n) * size_t(cols_n) * 3);
  for (Index r = 0; r < rows_n; ++r)
    for (Index c = 0; c < cols_n; ++c)
      for (int k = 0; k < 3; ++k)
        buf[(size_t(r) * size_t(cols_n) + size_t(c)) * 3 + size_t(k)] = rgb[size_t(k)](r, c);
  std::vector<png_bytep> rows(static_cast<size_t>(rows_n));
  for (Index r = 0; r < rows_n; ++r) rows[size_t(r)] = &buf[size_t(r) * size_t(cols_n) * 3];
  w.write_rows(rows);
}

std::array<Rasteru8, 3> read_png_rgb8(const std::string& path) {
  PngReader reader(path);
  png_structp png = reader.png();
  png_infop info = reader.info();
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8)
    reader.fail_fmt("expected 8-bit RGB");
  const Index rows_n = Index(png_get_image_height(png, info));
  const Index cols_n = Index(png_get_image_width(png, info));
  std::vector<uint8_t> buf(size_t(rows_n) * size_t(cols_n) * 3);
  std::vector<png_bytep> rows(static_cast<size_t>(rows_n));
  for (Index r = 0; r < rows_n; ++r) rows[size_t(r)] = &buf[size_t(r) * size_t(cols_n) * 3];
  reader.read_rows(rows);
  std::array<Rasteru8, 3> rgb{Rasteru8(rows_n, cols_n), Rasteru8(rows_n, cols_n), Rasteru8(rows_n, cols_n)};
  for (Index r = 0; r < rows_n; ++r)
    for (Index c = 0; c < cols_n; ++c)
      for (int k = 0; k < 3; ++k)
        rgb[size_t(k)](r, c) = buf[(size_t(r) * size_t(cols_n) + size_t(c)) * 3 + size_t(k)];
  return rgb;
}

}  // namespace segmvs
