#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmat/mask.hpp"
#include "tmat/tmatrix.hpp"

namespace tmat {

/// How pixel lookups behave when a neighborhood reaches past the image
/// border. Replicate clamps to the border sample, Wrap is periodic,
/// Reflect mirrors with the border sample repeated (symmetric padding:
/// index -1 maps back to 0).
enum class BoundaryPolicy { Replicate, Wrap, Reflect };

enum class ValueDomain {
  Byte,  // integer values in [0, 255]; quantized on down-conversion
  Unit,  // real values, nominally in [0, 1]; never clamped
};

/// Height x width x channels raster, stored row-major with the channel
/// index fastest (interleaved samples, as PNG and PPM lay them out).
class SpectralImage {
 public:
  SpectralImage(std::size_t height, std::size_t width, std::size_t channels,
                ValueDomain domain = ValueDomain::Byte)
      : height_(height),
        width_(width),
        channels_(channels),
        domain_(domain),
        data_(height * width * channels, 0.0) {
    if (height == 0 || width == 0 || channels == 0)
      throw std::invalid_argument("SpectralImage: all dimensions must be positive");
  }

  static SpectralImage from_data(std::size_t height, std::size_t width,
                                 std::size_t channels, std::vector<double> data,
                                 ValueDomain domain = ValueDomain::Byte) {
    SpectralImage img(height, width, channels, domain);
    if (data.size() != img.data_.size())
      throw std::invalid_argument(
          "SpectralImage: " + std::to_string(data.size()) + " values for " +
          std::to_string(img.data_.size()) + " samples");
    for (double v : data)
      if (!std::isfinite(v))
        throw std::invalid_argument("SpectralImage: non-finite sample value");
    img.data_ = std::move(data);
    return img;
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t channels() const { return channels_; }
  ValueDomain domain() const { return domain_; }
  std::size_t size() const { return data_.size(); }

  double& at(std::size_t row, std::size_t col, std::size_t channel) {
    check_position(row, col, channel);
    return data_[(row * width_ + col) * channels_ + channel];
  }
  double at(std::size_t row, std::size_t col, std::size_t channel) const {
    check_position(row, col, channel);
    return data_[(row * width_ + col) * channels_ + channel];
  }

  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

 private:
  void check_position(std::size_t row, std::size_t col,
                      std::size_t channel) const {
    if (row >= height_ || col >= width_ || channel >= channels_)
      throw std::invalid_argument(
          "SpectralImage: position (" + std::to_string(row) + ", " +
          std::to_string(col) + ", " + std::to_string(channel) +
          ") outside " + std::to_string(height_) + "x" +
          std::to_string(width_) + "x" + std::to_string(channels_));
  }

  std::size_t height_, width_, channels_;
  ValueDomain domain_;
  std::vector<double> data_;
};

/// A matrix of neighborhood t-scalars lifted from an image: scalar shape
/// I1 x I2 x channels, matrix dims height x width.
struct LiftedTMatrix {
  TMatrix tmatrix;
  std::size_t i1 = 0;  // neighborhood extents, both odd
  std::size_t i2 = 0;
  ValueDomain domain = ValueDomain::Byte;
};

namespace detail {

/// Map a possibly out-of-range signed index into [0, extent).
inline std::size_t fold_index(long i, std::size_t extent,
                              BoundaryPolicy policy) {
  const long n = long(extent);
  if (i >= 0 && i < n) return std::size_t(i);
  switch (policy) {
    case BoundaryPolicy::Replicate:
      return std::size_t(std::clamp(i, long(0), n - 1));
    case BoundaryPolicy::Wrap:
      return std::size_t(((i % n) + n) % n);
    case BoundaryPolicy::Reflect:
      for (;;) {
        if (i < 0)
          i = -i - 1;
        else if (i >= n)
          i = 2 * n - 1 - i;
        else
          return std::size_t(i);
      }
  }
  throw std::logic_error("fold_index: unhandled boundary policy");
}

inline void check_neighborhood(std::size_t i1, std::size_t i2,
                               std::size_t height, std::size_t width) {
  if (i1 % 2 == 0 || i2 % 2 == 0)
    throw std::invalid_argument("neighborhood extents must be odd, got " +
                                std::to_string(i1) + "x" + std::to_string(i2));
  if (i1 > height || i2 > width)
    throw std::invalid_argument(
        "neighborhood " + std::to_string(i1) + "x" + std::to_string(i2) +
        " exceeds image extent " + std::to_string(height) + "x" +
        std::to_string(width));
}

}  // namespace detail

/// Raise an image to a t-matrix whose entry at scalar position (a, b, c)
/// of matrix position (r, col) is the channel-c sample at pixel offset
/// (a - i1/2, b - i2/2) from (r, col), folded at the border per policy.
inline LiftedTMatrix lift_image(const SpectralImage& img, std::size_t i1,
                                std::size_t i2,
                                BoundaryPolicy policy = BoundaryPolicy::Replicate) {
  detail::check_neighborhood(i1, i2, img.height(), img.width());
  const std::size_t d1 = img.height(), d2 = img.width(), d3 = img.channels();
  const long h1 = long(i1 / 2), h2 = long(i2 / 2);

  // The loop nest below is exactly row-major order over the body shape.
  NdArray body({i1, i2, d3, d1, d2});
  std::size_t lin = 0;
  for (std::size_t a = 0; a < i1; ++a)
    for (std::size_t b = 0; b < i2; ++b)
      for (std::size_t c = 0; c < d3; ++c)
        for (std::size_t r = 0; r < d1; ++r) {
          const std::size_t rr = detail::fold_index(long(r) + long(a) - h1, d1, policy);
          for (std::size_t col = 0; col < d2; ++col) {
            const std::size_t cc =
                detail::fold_index(long(col) + long(b) - h2, d2, policy);
            body[lin++] = cdouble{img.at(rr, cc, c), 0.0};
          }
        }
  return {TMatrix(std::move(body), 3), i1, i2, img.domain()};
}

/// Recover the image held at the central scalar position of each matrix
/// entry. The central row of the first-index-fastest reshape of the body
/// to (I1 I2) x (channels height width) is exactly the scalar position
/// (i1/2, i2/2), so it is read off directly. Byte-domain values are
/// rounded half away from zero and clamped to [0, 255].
inline SpectralImage downconvert(const LiftedTMatrix& lifted) {
  const TMatrix& t = lifted.tmatrix;
  if (t.scalar_order() != 3)
    throw std::invalid_argument(
        "downconvert: scalar order must be 3 (I1 x I2 x channels), got " +
        std::to_string(t.scalar_order()));
  const auto ss = t.scalar_shape();
  if (ss[0] != lifted.i1 || ss[1] != lifted.i2)
    throw std::invalid_argument(
        "downconvert: neighborhood " + std::to_string(lifted.i1) + "x" +
        std::to_string(lifted.i2) + " does not match scalar shape");
  if (lifted.i1 % 2 == 0 || lifted.i2 % 2 == 0)
    throw std::invalid_argument("downconvert: neighborhood extents must be odd");
  if (!t.has_real_body())
    throw std::invalid_argument("downconvert: body has nonzero imaginary part");

  const std::size_t d3 = ss[2], d1 = t.rows(), d2 = t.cols();
  const std::size_t h1 = lifted.i1 / 2, h2 = lifted.i2 / 2;
  SpectralImage out(d1, d2, d3, lifted.domain);
  for (std::size_t r = 0; r < d1; ++r)
    for (std::size_t c = 0; c < d2; ++c)
      for (std::size_t ch = 0; ch < d3; ++ch) {
        double v = t.body().at({h1, h2, ch, r, c}).real();
        if (lifted.domain == ValueDomain::Byte)
          v = std::clamp(std::round(v), 0.0, 255.0);
        out.at(r, c, ch) = v;
      }
  return out;
}

/// Lift a pixel-level mask (height x width x channels) to the lifted
/// domain: an entry is observed iff the pixel it replicates is observed.
/// Equivalent to lifting an image with missing pixels marked by a
/// sentinel value and collecting the marked entries.
inline ObservationMask lift_mask(const ObservationMask& pixels, std::size_t i1,
                                 std::size_t i2,
                                 BoundaryPolicy policy = BoundaryPolicy::Replicate) {
  if (pixels.shape().size() != 3)
    throw std::invalid_argument(
        "lift_mask: pixel mask must be height x width x channels");
  const std::size_t d1 = pixels.shape()[0], d2 = pixels.shape()[1],
                    d3 = pixels.shape()[2];
  detail::check_neighborhood(i1, i2, d1, d2);
  if (pixels.none_observed())
    throw std::invalid_argument("lift_mask: every pixel is missing");

  const long h1 = long(i1 / 2), h2 = long(i2 / 2);
  std::vector<std::uint8_t> flags;
  flags.reserve(i1 * i2 * d3 * d1 * d2);
  for (std::size_t a = 0; a < i1; ++a)
    for (std::size_t b = 0; b < i2; ++b)
      for (std::size_t c = 0; c < d3; ++c)
        for (std::size_t r = 0; r < d1; ++r) {
          const std::size_t rr = detail::fold_index(long(r) + long(a) - h1, d1, policy);
          for (std::size_t col = 0; col < d2; ++col) {
            const std::size_t cc =
                detail::fold_index(long(col) + long(b) - h2, d2, policy);
            flags.push_back(pixels.flags()[(rr * d2 + cc) * d3 + c]);
          }
        }
  return ObservationMask({i1, i2, d3, d1, d2}, std::move(flags));
}

}  // namespace tmat
