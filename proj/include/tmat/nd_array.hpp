#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmat/errors.hpp"

namespace tmat {

using cdouble = std::complex<double>;

namespace detail {

inline std::string shape_to_string(std::span<const std::size_t> shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

inline std::size_t shape_product(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

}  // namespace detail

/// Dense complex array of arbitrary order. Entries are linearized
/// row-major: the LAST index varies fastest. This is the one storage
/// convention used throughout the library; the MATLAB-style
/// first-index-fastest order appears only through reshape_col_major.
class NdArray {
 public:
  NdArray() = default;

  explicit NdArray(std::vector<std::size_t> shape)
      : shape_(std::move(shape)) {
    validate_shape();
    data_.assign(detail::shape_product(shape_), cdouble{0.0, 0.0});
  }

  NdArray(std::vector<std::size_t> shape, std::vector<cdouble> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    validate_shape();
    if (data_.size() != detail::shape_product(shape_))
      throw std::invalid_argument(
          "NdArray: data length " + std::to_string(data_.size()) +
          " does not match shape " + detail::shape_to_string(shape_));
  }

  static NdArray from_real(std::vector<std::size_t> shape,
                           std::span<const double> values) {
    std::vector<cdouble> data(values.size());
    std::transform(values.begin(), values.end(), data.begin(),
                   [](double v) { return cdouble{v, 0.0}; });
    return NdArray(std::move(shape), std::move(data));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }
  std::vector<cdouble>& values() { return data_; }
  const std::vector<cdouble>& values() const { return data_; }

  cdouble& operator[](std::size_t linear) { return data_[linear]; }
  const cdouble& operator[](std::size_t linear) const { return data_[linear]; }

  /// Row-major linear index of a multi-index.
  std::size_t linear_index(std::span<const std::size_t> idx) const {
    if (idx.size() != shape_.size())
      throw std::invalid_argument("NdArray: multi-index order mismatch");
    std::size_t lin = 0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= shape_[a])
        throw std::invalid_argument("NdArray: index " + std::to_string(idx[a]) +
                                    " out of range on axis " + std::to_string(a));
      lin = lin * shape_[a] + idx[a];
    }
    return lin;
  }

  cdouble& at(std::span<const std::size_t> idx) { return data_[linear_index(idx)]; }
  const cdouble& at(std::span<const std::size_t> idx) const {
    return data_[linear_index(idx)];
  }
  cdouble& at(std::initializer_list<std::size_t> idx) {
    return at(std::span<const std::size_t>(idx.begin(), idx.size()));
  }
  const cdouble& at(std::initializer_list<std::size_t> idx) const {
    return at(std::span<const std::size_t>(idx.begin(), idx.size()));
  }

  /// Multi-index of a row-major linear index.
  std::vector<std::size_t> unravel(std::size_t linear) const {
    std::vector<std::size_t> idx(shape_.size());
    for (std::size_t a = shape_.size(); a-- > 0;) {
      idx[a] = linear % shape_[a];
      linear /= shape_[a];
    }
    return idx;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (const cdouble& v : data_) acc += std::norm(v);
    return std::sqrt(acc);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cdouble& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_imag() const {
    double m = 0.0;
    for (const cdouble& v : data_) m = std::max(m, std::abs(v.imag()));
    return m;
  }

  bool all_finite() const {
    for (const cdouble& v : data_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  bool same_shape(const NdArray& other) const { return shape_ == other.shape_; }

 private:
  void validate_shape() const {
    if (shape_.empty())
      throw std::invalid_argument("NdArray: shape needs at least one dimension");
    for (std::size_t e : shape_)
      if (e == 0) throw std::invalid_argument("NdArray: zero extent in shape");
  }

  std::vector<std::size_t> shape_;
  std::vector<cdouble> data_;
};

// ---- elementwise arithmetic -------------------------------------------------

namespace detail {
inline void require_same_shape(const NdArray& a, const NdArray& b,
                               const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                shape_to_string(a.shape()) + " vs " +
                                shape_to_string(b.shape()));
}

/// Zero the imaginary parts of an array expected to be numerically real;
/// throws when the residue exceeds tol relative to the array scale.
inline void truncate_imag_checked(NdArray& a, const char* who,
                                  double tol = 1e-9) {
  const double limit = tol * std::max(1.0, a.max_abs());
  if (a.max_abs_imag() > limit)
    throw numerical_error(std::string(who) + ": imaginary residue " +
                          std::to_string(a.max_abs_imag()) +
                          " exceeds tolerance " + std::to_string(limit));
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = cdouble{a[i].real(), 0.0};
}
}  // namespace detail

inline NdArray add(const NdArray& a, const NdArray& b) {
  detail::require_same_shape(a, b, "add");
  NdArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline NdArray subtract(const NdArray& a, const NdArray& b) {
  detail::require_same_shape(a, b, "subtract");
  NdArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline NdArray scale(const NdArray& a, cdouble factor) {
  NdArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
  return out;
}

inline NdArray hadamard(const NdArray& a, const NdArray& b) {
  detail::require_same_shape(a, b, "hadamard");
  NdArray out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

// ---- axis permutation and MATLAB-order reshape ------------------------------

/// Reorder axes: out.shape[j] = x.shape[perm[j]] and
/// out[(i_{perm(0)},...,i_{perm(n-1)})] = x[(i_0,...,i_{n-1})].
/// perm must be a permutation of {0,...,ndim-1}.
inline NdArray permute_axes(const NdArray& x, std::span<const std::size_t> perm) {
  const std::size_t n = x.ndim();
  if (perm.size() != n)
    throw std::invalid_argument("permute_axes: permutation order " +
                                std::to_string(perm.size()) +
                                " does not match array order " + std::to_string(n));
  std::vector<bool> seen(n, false);
  for (std::size_t a : perm) {
    if (a >= n || seen[a])
      throw std::invalid_argument("permute_axes: malformed permutation");
    seen[a] = true;
  }

  std::vector<std::size_t> out_shape(n);
  for (std::size_t j = 0; j < n; ++j) out_shape[j] = x.shape()[perm[j]];
  NdArray out(out_shape);

  // Walk the output in row-major order; map each output index back to the
  // input linear offset through precomputed strides.
  std::vector<std::size_t> in_strides(n, 1);
  for (std::size_t a = n - 1; a-- > 0;)
    in_strides[a] = in_strides[a + 1] * x.shape()[a + 1];
  std::vector<std::size_t> stride_for_out(n);
  for (std::size_t j = 0; j < n; ++j) stride_for_out[j] = in_strides[perm[j]];

  std::vector<std::size_t> idx(n, 0);
  std::size_t in_lin = 0;
  for (std::size_t out_lin = 0; out_lin < out.size(); ++out_lin) {
    out[out_lin] = x[in_lin];
    for (std::size_t j = n; j-- > 0;) {
      ++idx[j];
      in_lin += stride_for_out[j];
      if (idx[j] < out_shape[j]) break;
      in_lin -= stride_for_out[j] * out_shape[j];
      idx[j] = 0;
    }
  }
  return out;
}

inline NdArray permute_axes(const NdArray& x,
                            std::initializer_list<std::size_t> perm) {
  return permute_axes(x, std::span<const std::size_t>(perm.begin(), perm.size()));
}

/// Relinearize with the first-index-fastest (column-major, MATLAB
/// "reshape") protocol: entry at column-major position p of the input
/// lands at column-major position p of the output. Distinct from the
/// row-major storage order on purpose.
inline NdArray reshape_col_major(const NdArray& x,
                                 std::vector<std::size_t> new_shape) {
  if (detail::shape_product(new_shape) != x.size())
    throw std::invalid_argument(
        "reshape_col_major: new shape " + detail::shape_to_string(new_shape) +
        " has " + std::to_string(detail::shape_product(new_shape)) +
        " entries, array has " + std::to_string(x.size()));

  NdArray out(std::move(new_shape));
  const auto& in_shape = x.shape();
  const auto& out_shape = out.shape();

  // Column-major strides in each array's own row-major storage.
  auto row_major_strides = [](const std::vector<std::size_t>& shape) {
    std::vector<std::size_t> s(shape.size(), 1);
    for (std::size_t a = shape.size() - 1; a-- > 0;)
      s[a] = s[a + 1] * shape[a + 1];
    return s;
  };
  const auto in_strides = row_major_strides(in_shape);
  const auto out_strides = row_major_strides(out_shape);

  std::vector<std::size_t> in_idx(in_shape.size(), 0);
  std::vector<std::size_t> out_idx(out_shape.size(), 0);
  std::size_t in_lin = 0, out_lin = 0;
  for (std::size_t p = 0; p < x.size(); ++p) {
    out[out_lin] = x[in_lin];
    // advance both multi-indices in column-major order (first axis fastest)
    for (std::size_t a = 0; a < in_shape.size(); ++a) {
      ++in_idx[a];
      in_lin += in_strides[a];
      if (in_idx[a] < in_shape[a]) break;
      in_lin -= in_strides[a] * in_shape[a];
      in_idx[a] = 0;
    }
    for (std::size_t a = 0; a < out_shape.size(); ++a) {
      ++out_idx[a];
      out_lin += out_strides[a];
      if (out_idx[a] < out_shape[a]) break;
      out_lin -= out_strides[a] * out_shape[a];
      out_idx[a] = 0;
    }
  }
  return out;
}

}  // namespace tmat
