#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tmat/dft.hpp"
#include "tmat/errors.hpp"
#include "tmat/nd_array.hpp"

namespace tmat {

/// The K complex eigenvalues of a t-scalar: its multi-mode Fourier
/// transform, kept in the same canonical row-major multi-index order as the
/// body.
struct TScalarSpectrum {
  NdArray values;
};

enum class PartialOrder { GreaterEqual, LessEqual, Equal, Incomparable };

/// Element of the commutative algebra C = complex arrays of shape
/// I1 x ... x IN with entrywise addition and N-way circular convolution as
/// multiplication. Immutable; every operation returns a new value.
class TScalar {
 public:
  explicit TScalar(NdArray body) : body_(std::move(body)) {}

  static TScalar zeros(std::vector<std::size_t> shape) {
    return TScalar(NdArray(std::move(shape)));
  }

  /// Multiplicative identity: 1 at the all-zeros multi-index, 0 elsewhere;
  /// its spectrum is the all-ones array.
  static TScalar identity(std::vector<std::size_t> shape) {
    NdArray body(std::move(shape));
    body[0] = cdouble{1.0, 0.0};
    return TScalar(std::move(body));
  }

  static TScalar from_real(std::vector<std::size_t> shape,
                           std::span<const double> values) {
    return TScalar(NdArray::from_real(std::move(shape), values));
  }

  static TScalar from_spectrum(const TScalarSpectrum& s) {
    return TScalar(inverse_dft(s.values, leading_modes(s.values.ndim())));
  }

  /// Inverse-transform a spectrum that is expected to be conjugate
  /// symmetric (i.e. to have a real body). The imaginary residue must stay
  /// below residue_tol relative to the body scale; it is then truncated.
  static TScalar from_spectrum_real(const TScalarSpectrum& s,
                                    double residue_tol = 1e-9) {
    NdArray body = inverse_dft(s.values, leading_modes(s.values.ndim()));
    detail::truncate_imag_checked(body, "from_spectrum_real", residue_tol);
    return TScalar(std::move(body));
  }

  const NdArray& body() const { return body_; }
  const std::vector<std::size_t>& shape() const { return body_.shape(); }
  std::size_t order() const { return body_.ndim(); }

  /// K, the dimension of the algebra.
  std::size_t algebra_dim() const { return body_.size(); }

  TScalarSpectrum spectrum() const {
    return {forward_dft(body_, leading_modes(order()))};
  }

  /// Conjugation: the spectrum of the result is the entrywise complex
  /// conjugate. Computed exactly in the spatial domain, where it is the
  /// entrywise conjugate of the circularly index-reversed body.
  TScalar conjugate() const {
    NdArray out(body_.shape());
    const std::size_t nd = order();
    for (std::size_t lin = 0; lin < body_.size(); ++lin) {
      auto idx = body_.unravel(lin);
      for (std::size_t a = 0; a < nd; ++a)
        idx[a] = idx[a] == 0 ? 0 : body_.shape()[a] - idx[a];
      out.at({idx.data(), idx.size()}) = std::conj(body_[lin]);
    }
    return TScalar(std::move(out));
  }

  /// True iff every spectral entry has |imag| <= tol and real >= -tol.
  bool is_nonnegative(double tol) const {
    if (tol < 0.0) throw std::invalid_argument("is_nonnegative: tol must be >= 0");
    const NdArray spec = spectrum().values;
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (std::abs(spec[i].imag()) > tol || spec[i].real() < -tol) return false;
    return true;
  }

  /// Default tolerance: 1e-9 times the largest spectral magnitude.
  bool is_nonnegative() const {
    return is_nonnegative(1e-9 * spectrum().values.max_abs());
  }

  /// Entrywise modulus of the spectrum; always a nonnegative t-scalar, and
  /// abs(x) * abs(x) = conjugate(x) * x.
  TScalar abs() const {
    NdArray spec = spectrum().values;
    for (std::size_t i = 0; i < spec.size(); ++i)
      spec[i] = cdouble{std::abs(spec[i]), 0.0};
    return from_spectrum({std::move(spec)});
  }

  /// Sum of the spectral entries.
  cdouble trace() const {
    const NdArray spec = spectrum().values;
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < spec.size(); ++i) acc += spec[i];
    return acc;
  }

  /// The K x K diagonal matrix with the spectrum on the diagonal; an
  /// algebra homomorphism: M(x*y) = M(x) M(y), M(conjugate(x)) = M(x)^H.
  Eigen::MatrixXcd matrix_representation() const {
    const NdArray spec = spectrum().values;
    const auto k = static_cast<Eigen::Index>(algebra_dim());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) m(i, i) = spec[std::size_t(i)];
    return m;
  }

 private:
  NdArray body_;
};

inline TScalar add(const TScalar& x, const TScalar& y) {
  return TScalar(add(x.body(), y.body()));
}

inline TScalar subtract(const TScalar& x, const TScalar& y) {
  return TScalar(subtract(x.body(), y.body()));
}

inline TScalar scalar_mul(cdouble lambda, const TScalar& x) {
  return TScalar(scale(x.body(), lambda));
}

/// Circular-convolution product, computed as the Hadamard product of
/// spectra followed by the inverse transform.
inline TScalar mul(const TScalar& x, const TScalar& y) {
  detail::require_same_shape(x.body(), y.body(), "mul");
  const auto modes = leading_modes(x.order());
  NdArray spec = hadamard(forward_dft(x.body(), modes),
                          forward_dft(y.body(), modes));
  return TScalar(inverse_dft(spec, modes));
}

inline TScalar operator+(const TScalar& x, const TScalar& y) { return add(x, y); }
inline TScalar operator-(const TScalar& x, const TScalar& y) {
  return subtract(x, y);
}
inline TScalar operator*(const TScalar& x, const TScalar& y) { return mul(x, y); }
inline TScalar operator*(cdouble lambda, const TScalar& x) {
  return scalar_mul(lambda, x);
}
inline TScalar operator*(double lambda, const TScalar& x) {
  return scalar_mul(cdouble{lambda, 0.0}, x);
}

/// Classify x against y by nonnegativity of the differences, with the same
/// tolerance semantics as is_nonnegative.
inline PartialOrder partial_order_cmp(const TScalar& x, const TScalar& y,
                                      double tol) {
  detail::require_same_shape(x.body(), y.body(), "partial_order_cmp");
  const bool ge = subtract(x, y).is_nonnegative(tol);
  const bool le = subtract(y, x).is_nonnegative(tol);
  if (ge && le) return PartialOrder::Equal;
  if (ge) return PartialOrder::GreaterEqual;
  if (le) return PartialOrder::LessEqual;
  return PartialOrder::Incomparable;
}

/// Default tolerance scaled by the larger spectral magnitude of the inputs.
inline PartialOrder partial_order_cmp(const TScalar& x, const TScalar& y) {
  const double scale = std::max(x.spectrum().values.max_abs(),
                                y.spectrum().values.max_abs());
  return partial_order_cmp(x, y, 1e-9 * scale);
}

}  // namespace tmat
