#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tmat/tmatrix.hpp"

namespace tmat {

/// Boolean mask over a rectangular index domain recording which entries are
/// observed; the missing set is its complement. The domain is linearized
/// row-major, matching NdArray storage (a plain matrix uses r*cols + c).
/// Any subset is representable; the completion solvers reject the two
/// degenerate cases themselves.
class ObservationMask {
 public:
  ObservationMask(std::vector<std::size_t> shape,
                  std::vector<std::uint8_t> observed)
      : shape_(std::move(shape)), observed_(std::move(observed)) {
    if (shape_.empty())
      throw std::invalid_argument("ObservationMask: empty shape");
    std::size_t n = 1;
    for (std::size_t e : shape_) {
      if (e == 0) throw std::invalid_argument("ObservationMask: zero extent");
      n *= e;
    }
    if (observed_.size() != n)
      throw std::invalid_argument(
          "ObservationMask: flag count " + std::to_string(observed_.size()) +
          " does not match domain size " + std::to_string(n));
  }

  static ObservationMask full(std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return ObservationMask(std::move(shape), std::vector<std::uint8_t>(n, 1));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t domain_size() const { return observed_.size(); }
  bool observed(std::size_t linear) const { return observed_[linear] != 0; }
  const std::vector<std::uint8_t>& flags() const { return observed_; }

  std::size_t observed_count() const {
    std::size_t n = 0;
    for (std::uint8_t f : observed_) n += f != 0;
    return n;
  }
  std::size_t missing_count() const {
    return domain_size() - observed_count();
  }
  bool all_observed() const { return observed_count() == domain_size(); }
  bool none_observed() const { return observed_count() == 0; }

  ObservationMask complement() const {
    std::vector<std::uint8_t> flipped(observed_.size());
    for (std::size_t i = 0; i < observed_.size(); ++i)
      flipped[i] = observed_[i] ? 0 : 1;
    return ObservationMask(shape_, std::move(flipped));
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<std::uint8_t> observed_;
};

/// Keep the masked entries, zero the rest.
inline NdArray mask_keep(const NdArray& a, const ObservationMask& mask) {
  if (mask.shape() != a.shape())
    throw std::invalid_argument("mask_keep: mask domain does not match array");
  NdArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.observed(i)) out[i] = cdouble{0.0, 0.0};
  return out;
}

/// Entry-level masking of a t-matrix: the mask covers the whole underlying
/// array, so a partially observed t-scalar keeps its observed entries.
inline TMatrix mask_keep(const TMatrix& a, const ObservationMask& mask) {
  return TMatrix(mask_keep(a.body(), mask), a.scalar_order());
}

inline Eigen::MatrixXd mask_keep(const Eigen::MatrixXd& a,
                                 const ObservationMask& mask) {
  const std::vector<std::size_t> want{std::size_t(a.rows()),
                                      std::size_t(a.cols())};
  if (mask.shape() != want)
    throw std::invalid_argument("mask_keep: mask domain does not match matrix");
  Eigen::MatrixXd out = a;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      if (!mask.observed(std::size_t(r) * std::size_t(a.cols()) +
                         std::size_t(c)))
        out(r, c) = 0.0;
  return out;
}

}  // namespace tmat
