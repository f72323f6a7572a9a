#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>

namespace segmvs {

/// Row-major dense raster. Indexing is (row, col); row 0 is the top scanline,
/// pixel centers sit at integer coordinates (x = col, y = row).
template <typename Scalar>
using Raster = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Rasterf = Raster<float>;
using Rasteru8 = Raster<uint8_t>;
using Rasteru16 = Raster<uint16_t>;
using Rasteri32 = Raster<int32_t>;

using Index = Eigen::Index;

struct Pixel {
  Index row = 0;
  Index col = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  // (row, col) lexicographic order; the documented tie-break order for argmins.
  friend std::strong_ordering operator<=>(const Pixel&, const Pixel&) = default;
};

template <typename Scalar>
bool in_bounds(const Raster<Scalar>& r, Index row, Index col) {
  return row >= 0 && row < r.rows() && col >= 0 && col < r.cols();
}

template <typename Scalar>
bool in_bounds(const Raster<Scalar>& r, const Pixel& p) {
  return in_bounds(r, p.row, p.col);
}

inline bool adjacent8(const Pixel& a, const Pixel& b) {
  const Index dr = a.row > b.row ? a.row - b.row : b.row - a.row;
  const Index dc = a.col > b.col ? a.col - b.col : b.col - a.col;
  return std::max(dr, dc) == 1;
}

inline double pixel_distance(const Pixel& a, const Pixel& b) {
  const double dr = double(a.row - b.row);
  const double dc = double(a.col - b.col);
  return std::sqrt(dr * dr + dc * dc);
}

/// Bilinear sample at continuous (x, y) = (col, row). The continuous domain is
/// [0, cols-1] x [0, rows-1]; use inside_bilinear() before calling.
template <typename Scalar>
double bilinear(const Raster<Scalar>& r, double x, double y) {
  const Index c0 = std::clamp<Index>(Index(std::floor(x)), 0, r.cols() - 1);
  const Index r0 = std::clamp<Index>(Index(std::floor(y)), 0, r.rows() - 1);
  const Index c1 = std::min<Index>(c0 + 1, r.cols() - 1);
  const Index r1 = std::min<Index>(r0 + 1, r.rows() - 1);
  const double fx = std::clamp(x - double(c0), 0.0, 1.0);
  const double fy = std::clamp(y - double(r0), 0.0, 1.0);
  const double v00 = double(r(r0, c0)), v01 = double(r(r0, c1));
  const double v10 = double(r(r1, c0)), v11 = double(r(r1, c1));
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v01) + fy * ((1.0 - fx) * v10 + fx * v11);
}

template <typename Scalar>
bool inside_bilinear(const Raster<Scalar>& r, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= double(r.cols() - 1) && y <= double(r.rows() - 1);
}

/// 2x2 box-mean downsample; ceil semantics on odd dimensions (edge boxes
/// average the pixels that exist).
inline Rasterf downsample_mean(const Rasterf& src) {
  const Index rows = (src.rows() + 1) / 2, cols = (src.cols() + 1) / 2;
  Rasterf dst(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double sum = 0.0;
      int n = 0;
      for (Index dr = 0; dr < 2; ++dr) {
        for (Index dc = 0; dc < 2; ++dc) {
          const Index rr = 2 * r + dr, cc = 2 * c + dc;
          if (rr < src.rows() && cc < src.cols()) {
            sum += double(src(rr, cc));
            ++n;
          }
        }
      }
      dst(r, c) = float(sum / n);
    }
  }
  return dst;
}

/// Top-left nearest-neighbor downsample (labels, validity-carrying depth).
template <typename Scalar>
Raster<Scalar> downsample_nearest(const Raster<Scalar>& src) {
  const Index rows = (src.rows() + 1) / 2, cols = (src.cols() + 1) / 2;
  Raster<Scalar> dst(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) dst(r, c) = src(2 * r, 2 * c);
  return dst;
}

}  // namespace segmvs
