#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tmat/tmatrix.hpp"

namespace tmat {

/// Factors of the spectral decomposition X = U * S * V^*, with
/// D = min(D1, D2): U is D1 x D, S is D x D diagonal with nonnegative,
/// partial-order-sorted t-scalars, V is D2 x D.
struct TSVDFactors {
  TMatrix u;
  TMatrix s;
  TMatrix v;
};

namespace detail {

struct SliceSvd {
  Eigen::MatrixXcd u;
  Eigen::VectorXd s;
  Eigen::MatrixXcd v;
};

/// Thin SVD of every spectral slice, visit(k, factors) in slice order. For
/// real-bodied inputs only one slice of each conjugate pair is decomposed:
/// the partner's factors are the entrywise conjugates, and self-paired
/// slices are decomposed in real arithmetic, keeping the whole factor
/// family exactly conjugate-symmetric.
template <typename Visit>
void slicewise_svd(const SpectralSlices& sx, bool real_body, Visit&& visit) {
  constexpr unsigned opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  const std::size_t n = sx.count();
  std::vector<char> done(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    if (done[k]) continue;
    const std::size_t partner = real_body ? sx.conj_partner(k) : k;
    SliceSvd f;
    if (real_body && partner == k) {
      const Eigen::MatrixXd a = sx.slice(k).real();
      Eigen::BDCSVD<Eigen::MatrixXd> svd(a, opts);
      if (svd.info() != Eigen::Success)
        throw numerical_error("tsvd: SVD failed to converge on spectral slice " +
                              sx.slice_label(k));
      f = {svd.matrixU().cast<cdouble>(), svd.singularValues(),
           svd.matrixV().cast<cdouble>()};
    } else {
      const Eigen::MatrixXcd a = sx.slice(k);
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, opts);
      if (svd.info() != Eigen::Success)
        throw numerical_error("tsvd: SVD failed to converge on spectral slice " +
                              sx.slice_label(k));
      f = {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    visit(k, f);
    done[k] = 1;
    if (partner != k && !done[partner]) {
      const SliceSvd g{f.u.conjugate(), f.s, f.v.conjugate()};
      visit(partner, g);
      done[partner] = 1;
    }
  }
}

/// Rank cutoff when none is given: count sigma as nonzero above
/// max(D1,D2) * machine epsilon * (largest sigma of that slice).
inline double default_rank_cutoff(const Eigen::VectorXd& s, std::size_t d1,
                                  std::size_t d2) {
  const double smax = s.size() ? s[0] : 0.0;
  return double(std::max(d1, d2)) * std::numeric_limits<double>::epsilon() * smax;
}

}  // namespace detail

inline TSVDFactors tsvd(const TMatrix& x) {
  const bool real_body = x.has_real_body();
  const SpectralSlices sx(x);
  const std::size_t d = std::min(x.rows(), x.cols());
  SpectralSlices su(x.scalar_shape(), x.rows(), d);
  SpectralSlices ss(x.scalar_shape(), d, d);
  SpectralSlices sv(x.scalar_shape(), x.cols(), d);
  detail::slicewise_svd(sx, real_body,
                        [&](std::size_t k, const detail::SliceSvd& f) {
                          su.slice(k) = f.u;
                          auto s = ss.slice(k);
                          s.setZero();
                          s.diagonal() = f.s.cast<cdouble>();
                          sv.slice(k) = f.v;
                        });
  if (real_body)
    return {su.to_tmatrix_real(), ss.to_tmatrix_real(), sv.to_tmatrix_real()};
  return {su.to_tmatrix(), ss.to_tmatrix(), sv.to_tmatrix()};
}

struct TsvtResult {
  TMatrix value;
  /// Nuclear norm of value (sum of all post-shrinkage singular values),
  /// a free byproduct that solvers record in their traces.
  double nuclear_norm;
};

/// Singular value thresholding per spectral slice: shrink every singular
/// value by tau, clamp at zero, recompose. The proximal operator of the
/// nuclear norm.
inline TsvtResult tsvt_with_nuclear(const TMatrix& x, double tau) {
  if (!(tau > 0.0))
    throw std::invalid_argument("tsvt: tau must be positive");
  const bool real_body = x.has_real_body();
  const SpectralSlices sx(x);
  SpectralSlices out(x.scalar_shape(), x.rows(), x.cols());
  double nuclear = 0.0;
  const std::size_t n = sx.count();
  std::vector<char> done(n, 0);
  constexpr unsigned opts = Eigen::ComputeThinU | Eigen::ComputeThinV;
  for (std::size_t k = 0; k < n; ++k) {
    if (done[k]) continue;
    const std::size_t partner = real_body ? sx.conj_partner(k) : k;
    // sigma_max <= Frobenius norm, so such a slice thresholds to zero
    if (sx.slice(k).norm() <= tau) {
      out.slice(k).setZero();
      done[k] = 1;
      if (partner != k && !done[partner]) {
        out.slice(partner).setZero();
        done[partner] = 1;
      }
      continue;
    }
    detail::SliceSvd f;
    if (real_body && partner == k) {
      const Eigen::MatrixXd a = sx.slice(k).real();
      Eigen::BDCSVD<Eigen::MatrixXd> svd(a, opts);
      if (svd.info() != Eigen::Success)
        throw numerical_error("tsvt: SVD failed to converge on spectral slice " +
                              sx.slice_label(k));
      f = {svd.matrixU().cast<cdouble>(), svd.singularValues(),
           svd.matrixV().cast<cdouble>()};
    } else {
      const Eigen::MatrixXcd a = sx.slice(k);
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, opts);
      if (svd.info() != Eigen::Success)
        throw numerical_error("tsvt: SVD failed to converge on spectral slice " +
                              sx.slice_label(k));
      f = {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    Eigen::VectorXd shrunk = f.s;
    for (Eigen::Index i = 0; i < shrunk.size(); ++i)
      shrunk[i] = std::max(shrunk[i] - tau, 0.0);
    const double slice_sum = shrunk.sum();
    nuclear += slice_sum;
    out.slice(k) =
        f.u * shrunk.cast<cdouble>().asDiagonal() * f.v.adjoint();
    done[k] = 1;
    if (partner != k && !done[partner]) {
      out.slice(partner) = out.slice(k).conjugate();
      nuclear += slice_sum;
      done[partner] = 1;
    }
  }
  TMatrix value = real_body ? out.to_tmatrix_real() : out.to_tmatrix();
  return {std::move(value), nuclear};
}

inline TMatrix tsvt(const TMatrix& x, double tau) {
  return tsvt_with_nuclear(x, tau).value;
}

/// Moore-Penrose pseudo-inverse, slice by slice; X * X^+ * X = X within
/// tolerance. Dims transpose: the result is D2 x D1.
inline TMatrix pseudo_inverse(const TMatrix& x) {
  const bool real_body = x.has_real_body();
  const SpectralSlices sx(x);
  SpectralSlices out(x.scalar_shape(), x.cols(), x.rows());
  detail::slicewise_svd(
      sx, real_body, [&](std::size_t k, const detail::SliceSvd& f) {
        const double cutoff =
            detail::default_rank_cutoff(f.s, x.rows(), x.cols());
        Eigen::VectorXd inv = f.s;
        for (Eigen::Index i = 0; i < inv.size(); ++i)
          inv[i] = f.s[i] > cutoff ? 1.0 / f.s[i] : 0.0;
        out.slice(k) = f.v * inv.cast<cdouble>().asDiagonal() * f.u.adjoint();
      });
  return real_body ? out.to_tmatrix_real() : out.to_tmatrix();
}

/// The nonnegative t-scalar whose spectral entry at each multi-index is the
/// numerical rank of that spectral slice.
struct HigherOrderRank {
  TScalar value;
  std::vector<std::size_t> slice_ranks;  // canonical slice order
};

namespace detail {
inline HigherOrderRank higher_order_rank_impl(const TMatrix& x,
                                              std::optional<double> tol) {
  const SpectralSlices sx(x);
  std::vector<std::size_t> ranks(sx.count(), 0);
  slicewise_svd(sx, x.has_real_body(),
                [&](std::size_t k, const SliceSvd& f) {
                  const double cutoff =
                      tol ? *tol
                          : default_rank_cutoff(f.s, x.rows(), x.cols());
                  std::size_t r = 0;
                  for (Eigen::Index i = 0; i < f.s.size(); ++i)
                    if (f.s[i] > cutoff) ++r;
                  ranks[k] = r;
                });
  NdArray spectrum(x.scalar_shape());
  for (std::size_t k = 0; k < ranks.size(); ++k)
    spectrum[k] = cdouble(double(ranks[k]), 0.0);
  return {TScalar::from_spectrum({std::move(spectrum)}), std::move(ranks)};
}
}  // namespace detail

/// Default truncation: per-slice relative cutoff
/// max(D1,D2) * eps * sigma_max(slice).
inline HigherOrderRank higher_order_rank(const TMatrix& x) {
  return detail::higher_order_rank_impl(x, std::nullopt);
}

/// Absolute truncation threshold; tol must be positive.
inline HigherOrderRank higher_order_rank(const TMatrix& x, double tol) {
  if (!(tol > 0.0))
    throw std::invalid_argument("higher_order_rank: tol must be positive");
  return detail::higher_order_rank_impl(x, tol);
}

/// Largest spectral-slice rank.
inline std::size_t tubal_rank(const TMatrix& x) {
  const auto r = higher_order_rank(x).slice_ranks;
  return *std::max_element(r.begin(), r.end());
}

/// Arithmetic mean of the spectral-slice ranks; reported exactly, never
/// rounded.
inline double average_rank(const TMatrix& x) {
  const auto r = higher_order_rank(x).slice_ranks;
  double sum = 0.0;
  for (std::size_t v : r) sum += double(v);
  return sum / double(r.size());
}

/// Sum of the spectral-slice ranks; equals the rank of the direct-sum
/// representation.
inline std::size_t trace_rank(const TMatrix& x) {
  const auto r = higher_order_rank(x).slice_ranks;
  std::size_t sum = 0;
  for (std::size_t v : r) sum += v;
  return sum;
}

/// Higher-order Schatten p-norm as a t-scalar: the spectral entry at each
/// slice is (sum_n sigma_n^p)^(1/p) for that slice.
inline TScalar schatten_norm(const TMatrix& x, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("schatten_norm: p must be >= 1");
  const SpectralSlices sx(x);
  NdArray spectrum(x.scalar_shape());
  detail::slicewise_svd(sx, x.has_real_body(),
                        [&](std::size_t k, const detail::SliceSvd& f) {
                          double acc = 0.0;
                          for (Eigen::Index i = 0; i < f.s.size(); ++i)
                            acc += std::pow(f.s[i], p);
                          spectrum[k] = cdouble(std::pow(acc, 1.0 / p), 0.0);
                        });
  return TScalar::from_spectrum({std::move(spectrum)});
}

/// Scalar Schatten p-norm over all slices: (sum_k sum_n sigma^p)^(1/p).
/// p = 1 is the nuclear norm; p = 2 equals sqrt(K) times the body
/// Frobenius norm.
inline double real_schatten(const TMatrix& x, double p) {
  if (!(p >= 1.0))
    throw std::invalid_argument("real_schatten: p must be >= 1");
  const SpectralSlices sx(x);
  double acc = 0.0;
  detail::slicewise_svd(sx, x.has_real_body(),
                        [&](std::size_t, const detail::SliceSvd& f) {
                          for (Eigen::Index i = 0; i < f.s.size(); ++i)
                            acc += std::pow(f.s[i], p);
                        });
  return std::pow(acc, 1.0 / p);
}

inline double nuclear_norm(const TMatrix& x) { return real_schatten(x, 1.0); }

/// Real inner product <X, Y> = Re trace(M(X)^H M(Y)), evaluated slice-wise
/// without materializing the representation. Equal to half the trace of
/// R(X)^T R(Y) over the 2x2-real-block realification, and to
/// real_schatten(X,2)^2 when Y = X.
inline double real_inner_product(const TMatrix& x, const TMatrix& y) {
  detail::require_same_layout(x, y, "real_inner_product");
  const SpectralSlices sx(x);
  const SpectralSlices sy(y);
  double acc = 0.0;
  for (std::size_t k = 0; k < sx.count(); ++k)
    acc += sx.slice(k).conjugate().cwiseProduct(sy.slice(k)).sum().real();
  return acc;
}

/// Block-diagonal direct sum of the spectral slices: a (K*D1) x (K*D2)
/// dense matrix. Materialized only for K*max(D1,D2) <= 512 to bound
/// memory; primarily an oracle for rank/norm/product identities.
inline Eigen::MatrixXcd direct_sum_representation(const TMatrix& x) {
  const std::size_t k = x.num_slices();
  if (k * std::max(x.rows(), x.cols()) > 512)
    throw std::invalid_argument(
        "direct_sum_representation: K*max(D1,D2) exceeds the 512 "
        "materialization bound");
  const SpectralSlices sx(x);
  Eigen::MatrixXcd rep =
      Eigen::MatrixXcd::Zero(Eigen::Index(k * x.rows()),
                             Eigen::Index(k * x.cols()));
  for (std::size_t i = 0; i < k; ++i)
    rep.block(Eigen::Index(i * x.rows()), Eigen::Index(i * x.cols()),
              Eigen::Index(x.rows()), Eigen::Index(x.cols())) = sx.slice(i);
  return rep;
}

}  // namespace tmat
