#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tmat/tscalar.hpp"

namespace tmat {

/// Row-major dynamic complex matrix; spectral slices of a t-matrix map onto
/// this layout without copying.
using RowMat =
    Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// D1 x D2 rectangular array of t-scalars over one scalar shape, stored
/// little-endian: the underlying order-(N+2) array carries the N scalar
/// modes first and the two matrix axes last. With row-major storage this
/// puts each Fourier-domain slice in one contiguous D1*D2 block.
class TMatrix {
 public:
  TMatrix(NdArray body, std::size_t scalar_order)
      : body_(std::move(body)), scalar_order_(scalar_order) {
    if (scalar_order_ == 0)
      throw std::invalid_argument("TMatrix: scalar order must be at least 1");
    if (body_.ndim() != scalar_order_ + 2)
      throw std::invalid_argument(
          "TMatrix: body of order " + std::to_string(body_.ndim()) +
          " cannot hold scalar order " + std::to_string(scalar_order_) +
          " plus two matrix axes");
  }

  static TMatrix zeros(std::vector<std::size_t> scalar_shape, std::size_t d1,
                       std::size_t d2) {
    const std::size_t n = scalar_shape.size();
    scalar_shape.push_back(d1);
    scalar_shape.push_back(d2);
    return TMatrix(NdArray(std::move(scalar_shape)), n);
  }

  /// Identity t-matrix: identity t-scalars on the diagonal, zero elsewhere.
  static TMatrix identity(std::vector<std::size_t> scalar_shape, std::size_t d) {
    TMatrix out = zeros(std::move(scalar_shape), d, d);
    for (std::size_t i = 0; i < d; ++i)
      out.body_[i * d + i] = cdouble{1.0, 0.0};
    return out;
  }

  static TMatrix from_real(std::vector<std::size_t> scalar_shape, std::size_t d1,
                           std::size_t d2, std::span<const double> values) {
    const std::size_t n = scalar_shape.size();
    scalar_shape.push_back(d1);
    scalar_shape.push_back(d2);
    return TMatrix(NdArray::from_real(std::move(scalar_shape), values), n);
  }

  const NdArray& body() const { return body_; }
  NdArray& body() { return body_; }
  std::size_t scalar_order() const { return scalar_order_; }

  std::vector<std::size_t> scalar_shape() const {
    return {body_.shape().begin(), body_.shape().begin() + long(scalar_order_)};
  }

  std::size_t rows() const { return body_.shape()[scalar_order_]; }
  std::size_t cols() const { return body_.shape()[scalar_order_ + 1]; }

  /// K: number of spectral slices = dimension of the scalar algebra.
  std::size_t num_slices() const { return body_.size() / (rows() * cols()); }

  /// True when every entry has an exactly-zero imaginary part. Real bodies
  /// enable the conjugate-symmetry fast path in the spectral decompositions.
  bool has_real_body() const { return body_.max_abs_imag() == 0.0; }

  TScalar entry(std::size_t d1, std::size_t d2) const {
    check_position(d1, d2);
    NdArray s(scalar_shape());
    const std::size_t stride = rows() * cols();
    const std::size_t offset = d1 * cols() + d2;
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = body_[k * stride + offset];
    return TScalar(std::move(s));
  }

  void set_entry(std::size_t d1, std::size_t d2, const TScalar& value) {
    check_position(d1, d2);
    if (value.shape() != scalar_shape())
      throw std::invalid_argument("set_entry: scalar shape mismatch");
    const std::size_t stride = rows() * cols();
    const std::size_t offset = d1 * cols() + d2;
    for (std::size_t k = 0; k < value.body().size(); ++k)
      body_[k * stride + offset] = value.body()[k];
  }

 private:
  void check_position(std::size_t d1, std::size_t d2) const {
    if (d1 >= rows() || d2 >= cols())
      throw std::invalid_argument("TMatrix: position (" + std::to_string(d1) +
                                  "," + std::to_string(d2) +
                                  ") outside " + std::to_string(rows()) + "x" +
                                  std::to_string(cols()));
  }

  NdArray body_;
  std::size_t scalar_order_;
};

namespace detail {
inline void require_same_layout(const TMatrix& a, const TMatrix& b,
                                const char* op) {
  if (a.scalar_order() != b.scalar_order())
    throw std::invalid_argument(std::string(op) + ": scalar order mismatch");
  require_same_shape(a.body(), b.body(), op);
}
}  // namespace detail

inline TMatrix add(const TMatrix& a, const TMatrix& b) {
  detail::require_same_layout(a, b, "add");
  return TMatrix(add(a.body(), b.body()), a.scalar_order());
}

inline TMatrix subtract(const TMatrix& a, const TMatrix& b) {
  detail::require_same_layout(a, b, "subtract");
  return TMatrix(subtract(a.body(), b.body()), a.scalar_order());
}

inline TMatrix scale(const TMatrix& a, cdouble factor) {
  return TMatrix(scale(a.body(), factor), a.scalar_order());
}

inline TMatrix operator+(const TMatrix& a, const TMatrix& b) { return add(a, b); }
inline TMatrix operator-(const TMatrix& a, const TMatrix& b) {
  return subtract(a, b);
}
inline TMatrix operator*(double factor, const TMatrix& a) {
  return scale(a, cdouble{factor, 0.0});
}

inline double frobenius_norm(const TMatrix& a) {
  return a.body().frobenius_norm();
}

/// The Fourier transform of a t-matrix over its scalar modes, viewed as K
/// conventional D1 x D2 complex matrices. Slices are contiguous blocks of
/// the transformed body and are exposed as zero-copy Eigen maps.
class SpectralSlices {
 public:
  explicit SpectralSlices(const TMatrix& x)
      : data_(forward_dft(x.body(), leading_modes(x.scalar_order()))),
        scalar_order_(x.scalar_order()) {}

  SpectralSlices(std::vector<std::size_t> scalar_shape, std::size_t d1,
                 std::size_t d2)
      : scalar_order_(scalar_shape.size()) {
    scalar_shape.push_back(d1);
    scalar_shape.push_back(d2);
    data_ = NdArray(std::move(scalar_shape));
  }

  std::size_t scalar_order() const { return scalar_order_; }
  std::size_t rows() const { return data_.shape()[scalar_order_]; }
  std::size_t cols() const { return data_.shape()[scalar_order_ + 1]; }
  std::size_t count() const { return data_.size() / (rows() * cols()); }

  std::vector<std::size_t> scalar_shape() const {
    return {data_.shape().begin(), data_.shape().begin() + long(scalar_order_)};
  }

  Eigen::Map<RowMat> slice(std::size_t k) {
    return {data_.data() + k * rows() * cols(), Eigen::Index(rows()),
            Eigen::Index(cols())};
  }
  Eigen::Map<const RowMat> slice(std::size_t k) const {
    return {data_.data() + k * rows() * cols(), Eigen::Index(rows()),
            Eigen::Index(cols())};
  }

  /// Slice index holding the complex conjugate of slice k whenever the
  /// spatial body is real: each mode index negates modulo its extent.
  std::size_t conj_partner(std::size_t k) const {
    const auto& shape = data_.shape();
    std::vector<std::size_t> idx(scalar_order_);
    for (std::size_t a = scalar_order_; a-- > 0;) {
      idx[a] = k % shape[a];
      k /= shape[a];
    }
    std::size_t partner = 0;
    for (std::size_t a = 0; a < scalar_order_; ++a) {
      const std::size_t neg = idx[a] == 0 ? 0 : shape[a] - idx[a];
      partner = partner * shape[a] + neg;
    }
    return partner;
  }

  /// Human-readable multi-index of slice k, for diagnostics.
  std::string slice_label(std::size_t k) const {
    const auto& shape = data_.shape();
    std::vector<std::size_t> idx(scalar_order_);
    for (std::size_t a = scalar_order_; a-- > 0;) {
      idx[a] = k % shape[a];
      k /= shape[a];
    }
    return detail::shape_to_string({idx.data(), idx.size()});
  }

  TMatrix to_tmatrix() const {
    return TMatrix(inverse_dft(data_, leading_modes(scalar_order_)),
                   scalar_order_);
  }

  /// Inverse transform of a conjugate-symmetric slice family; verifies the
  /// imaginary residue stays below tol relative to scale, then truncates.
  TMatrix to_tmatrix_real(double residue_tol = 1e-9) const {
    NdArray body = inverse_dft(data_, leading_modes(scalar_order_));
    detail::truncate_imag_checked(body, "SpectralSlices::to_tmatrix_real",
                                  residue_tol);
    return TMatrix(std::move(body), scalar_order_);
  }

 private:
  NdArray data_;
  std::size_t scalar_order_;
};

/// Matrix product with t-scalar multiply/add as the scalar operations,
/// computed slice-wise in the Fourier domain. Real bodies in, real body out.
inline TMatrix tmat_mul(const TMatrix& a, const TMatrix& b) {
  if (a.scalar_order() != b.scalar_order() ||
      a.scalar_shape() != b.scalar_shape())
    throw std::invalid_argument("tmat_mul: scalar shape mismatch");
  if (a.cols() != b.rows())
    throw std::invalid_argument(
        "tmat_mul: inner dimensions " + std::to_string(a.cols()) + " and " +
        std::to_string(b.rows()) + " do not match");
  const bool real_out = a.has_real_body() && b.has_real_body();
  const SpectralSlices sa(a);
  const SpectralSlices sb(b);
  SpectralSlices out(a.scalar_shape(), a.rows(), b.cols());
  for (std::size_t k = 0; k < out.count(); ++k)
    out.slice(k) = sa.slice(k) * sb.slice(k);
  return real_out ? out.to_tmatrix_real() : out.to_tmatrix();
}

/// Conjugate transpose: transpose the matrix axes and conjugate every
/// t-scalar entry. Computed in the spatial domain, where it is exact; each
/// spectral slice of the result is the adjoint of the original slice.
inline TMatrix conj_transpose(const TMatrix& x) {
  TMatrix out = TMatrix::zeros(x.scalar_shape(), x.cols(), x.rows());
  for (std::size_t d1 = 0; d1 < x.rows(); ++d1)
    for (std::size_t d2 = 0; d2 < x.cols(); ++d2)
      out.set_entry(d2, d1, x.entry(d1, d2).conjugate());
  return out;
}

}  // namespace tmat
