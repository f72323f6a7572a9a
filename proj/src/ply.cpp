#include "segmvs/ply.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace segmvs {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

constexpr size_t kRecordBytes = 6 * sizeof(float) + 3;

}  // namespace

void write_ply(const std::string& path, const std::vector<PlyPoint>& points) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("PLY '" + path + "': cannot open for writing");
  std::fprintf(f.get(),
               "ply\nformat binary_little_endian 1.0\nelement vertex %zu\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property float nx\nproperty float ny\nproperty float nz\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n",
               points.size());
  for (const PlyPoint& p : points) {
    unsigned char record[kRecordBytes];
    float values[6] = {p.position.x(), p.position.y(), p.position.z(),
                       p.normal.x(),   p.normal.y(),   p.normal.z()};
    std::memcpy(record, values, sizeof(values));
    std::memcpy(record + sizeof(values), p.color.data(), 3);
    if (std::fwrite(record, 1, kRecordBytes, f.get()) != kRecordBytes)
      throw std::runtime_error("PLY '" + path + "': short write");
  }
}

std::vector<PlyPoint> read_ply(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("PLY '" + path + "': cannot open");
  char line[256];
  size_t count = 0;
  bool headerDone = false;
  while (std::fgets(line, sizeof(line), f.get())) {
    if (std::sscanf(line, "element vertex %zu", &count) == 1) continue;
    if (std::strncmp(line, "end_header", 10) == 0) {
      headerDone = true;
      break;
    }
  }
  if (!headerDone) throw std::runtime_error("PLY '" + path + "': missing end_header");
  std::vector<PlyPoint> points(count);
  for (PlyPoint& p : points) {
    unsigned char record[kRecordBytes];
    if (std::fread(record, 1, kRecordBytes, f.get()) != kRecordBytes)
      throw std::runtime_error("PLY '" + path + "': short read");
    float values[6];
    std::memcpy(values, record, sizeof(values));
    p.position = {values[0], values[1], values[2]};
    p.normal = {values[3], values[4], values[5]};
    std::memcpy(p.color.data(), record + sizeof(values), 3);
  }
  return points;
}

}  // namespace segmvs
