#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmat/nd_array.hpp"

namespace tmat {

namespace detail {

/// One-dimensional DFT plan for a fixed length. The forward transform is
/// unnormalized, X[k] = sum_j x[j] exp(-2*pi*i*j*k/n); sign +1 runs the
/// conjugate (unscaled inverse) transform. Powers of two use an iterative
/// radix-2 butterfly, tiny non-power lengths use the direct sum, and
/// everything else goes through Bluestein's chirp-z reduction to a
/// power-of-two circular convolution.
class Dft1d {
 public:
  explicit Dft1d(std::size_t n) : n_(n) {
    if (n_ == 0) throw std::invalid_argument("Dft1d: zero transform length");
    if ((n_ & (n_ - 1)) == 0) {
      kind_ = Kind::Pow2;
      init_pow2();
    } else if (n_ <= 8) {
      kind_ = Kind::Direct;
      init_direct();
    } else {
      kind_ = Kind::Bluestein;
      init_bluestein();
    }
  }

  std::size_t length() const { return n_; }

  /// In-place transform of a contiguous line of length(). sign must be -1
  /// (forward) or +1 (unscaled inverse).
  void run(cdouble* line, int sign) {
    switch (kind_) {
      case Kind::Pow2: run_pow2(line, sign); break;
      case Kind::Direct: run_direct(line, sign); break;
      case Kind::Bluestein: run_bluestein(line, sign); break;
    }
  }

 private:
  enum class Kind { Pow2, Direct, Bluestein };

  void init_pow2() {
    bitrev_.resize(n_);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n_) ++bits;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    twiddle_.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < twiddle_.size(); ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * double(k) / double(n_));
  }

  void run_pow2(cdouble* a, int sign) {
    for (std::size_t i = 0; i < n_; ++i)
      if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t base = 0; base < n_; base += len) {
        for (std::size_t k = 0; k < half; ++k) {
          cdouble w = twiddle_[k * step];
          if (sign > 0) w = std::conj(w);
          const cdouble t = a[base + half + k] * w;
          a[base + half + k] = a[base + k] - t;
          a[base + k] += t;
        }
      }
    }
  }

  void init_direct() {
    roots_.resize(n_);
    for (std::size_t t = 0; t < n_; ++t)
      roots_[t] = std::polar(1.0, -2.0 * std::numbers::pi * double(t) / double(n_));
    buf_.resize(n_);
  }

  void run_direct(cdouble* a, int sign) {
    for (std::size_t k = 0; k < n_; ++k) {
      cdouble acc{0.0, 0.0};
      for (std::size_t j = 0; j < n_; ++j) {
        cdouble w = roots_[(j * k) % n_];
        if (sign > 0) w = std::conj(w);
        acc += a[j] * w;
      }
      buf_[k] = acc;
    }
    std::copy(buf_.begin(), buf_.end(), a);
  }

  void init_bluestein() {
    m_ = 1;
    while (m_ < 2 * n_ - 1) m_ <<= 1;
    sub_ = std::make_unique<Dft1d>(m_);
    buf_.resize(m_);

    // Forward-direction chirp c_t = exp(-pi*i*t^2/n); the exponent is
    // reduced mod 2n before the trig call to keep angles small.
    chirp_.resize(n_);
    const std::size_t period = 2 * n_;
    for (std::size_t t = 0; t < n_; ++t)
      chirp_[t] =
          std::polar(1.0, -std::numbers::pi * double((t * t) % period) / double(n_));

    // X[k] = c_k * sum_j (x_j c_j) conj(c_{k-j}): precompute the spectrum of
    // the wrapped conj-chirp for each direction (the inverse chirp is the
    // conjugate of the forward one).
    auto wrapped_spectrum = [&](bool conjugate) {
      std::vector<cdouble> b(m_, cdouble{0.0, 0.0});
      for (std::size_t t = 0; t < n_; ++t) {
        const cdouble v = conjugate ? std::conj(chirp_[t]) : chirp_[t];
        b[t] = v;
        if (t != 0) b[m_ - t] = v;
      }
      sub_->run(b.data(), -1);
      return b;
    };
    bhat_fwd_ = wrapped_spectrum(true);
    bhat_inv_ = wrapped_spectrum(false);
  }

  void run_bluestein(cdouble* a, int sign) {
    const auto& bhat = sign < 0 ? bhat_fwd_ : bhat_inv_;
    std::fill(buf_.begin(), buf_.end(), cdouble{0.0, 0.0});
    for (std::size_t j = 0; j < n_; ++j) {
      const cdouble c = sign < 0 ? chirp_[j] : std::conj(chirp_[j]);
      buf_[j] = a[j] * c;
    }
    sub_->run(buf_.data(), -1);
    for (std::size_t i = 0; i < m_; ++i) buf_[i] *= bhat[i];
    sub_->run(buf_.data(), +1);
    const double inv_m = 1.0 / double(m_);
    for (std::size_t k = 0; k < n_; ++k) {
      const cdouble c = sign < 0 ? chirp_[k] : std::conj(chirp_[k]);
      a[k] = buf_[k] * inv_m * c;
    }
  }

  std::size_t n_ = 0;
  Kind kind_ = Kind::Pow2;
  // Pow2
  std::vector<std::size_t> bitrev_;
  std::vector<cdouble> twiddle_;
  // Direct
  std::vector<cdouble> roots_;
  // Bluestein
  std::size_t m_ = 0;
  std::unique_ptr<Dft1d> sub_;
  std::vector<cdouble> chirp_;
  std::vector<cdouble> bhat_fwd_;
  std::vector<cdouble> bhat_inv_;
  // shared scratch
  std::vector<cdouble> buf_;
};

inline void transform_modes(NdArray& a, std::span<const std::size_t> modes,
                            int sign) {
  const std::size_t nd = a.ndim();
  std::vector<bool> used(nd, false);
  for (std::size_t m : modes) {
    if (m >= nd)
      throw std::invalid_argument("dft: mode " + std::to_string(m) +
                                  " out of range for order-" +
                                  std::to_string(nd) + " array");
    if (used[m])
      throw std::invalid_argument("dft: mode " + std::to_string(m) +
                                  " listed twice");
    used[m] = true;
  }

  for (std::size_t axis : modes) {
    const std::size_t len = a.extent(axis);
    if (len == 1) continue;  // length-1 transform is the identity
    Dft1d plan(len);
    std::size_t stride = 1;
    for (std::size_t t = axis + 1; t < nd; ++t) stride *= a.extent(t);
    const std::size_t block = stride * len;
    const std::size_t outer = a.size() / block;
    if (stride == 1) {
      // lines along the last axis are contiguous
      for (std::size_t o = 0; o < outer; ++o) plan.run(a.data() + o * block, sign);
    } else {
      std::vector<cdouble> line(len);
      for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = o * block;
        for (std::size_t inner = 0; inner < stride; ++inner) {
          cdouble* p = a.data() + base + inner;
          for (std::size_t t = 0; t < len; ++t) line[t] = p[t * stride];
          plan.run(line.data(), sign);
          for (std::size_t t = 0; t < len; ++t) p[t * stride] = line[t];
        }
      }
    }
  }
}

}  // namespace detail

/// Unnormalized multi-mode DFT over the listed axes:
/// F[k] = sum_j x[j] exp(-2*pi*i*<j,k/I>) restricted to the chosen modes.
inline NdArray forward_dft(const NdArray& x, std::span<const std::size_t> modes) {
  NdArray out = x;
  detail::transform_modes(out, modes, -1);
  return out;
}

/// Inverse of forward_dft over the same modes; carries the full 1/K
/// normalization, K being the product of the transformed extents.
inline NdArray inverse_dft(const NdArray& x, std::span<const std::size_t> modes) {
  NdArray out = x;
  detail::transform_modes(out, modes, +1);
  std::size_t k = 1;
  for (std::size_t m : modes) k *= x.extent(m);
  const cdouble scale{1.0 / double(k), 0.0};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale;
  return out;
}

inline NdArray forward_dft(const NdArray& x,
                           std::initializer_list<std::size_t> modes) {
  return forward_dft(x, std::span<const std::size_t>(modes.begin(), modes.size()));
}

inline NdArray inverse_dft(const NdArray& x,
                           std::initializer_list<std::size_t> modes) {
  return inverse_dft(x, std::span<const std::size_t>(modes.begin(), modes.size()));
}

/// The axis list {0, ..., count-1}; the scalar modes of a t-matrix body.
inline std::vector<std::size_t> leading_modes(std::size_t count) {
  std::vector<std::size_t> m(count);
  for (std::size_t i = 0; i < count; ++i) m[i] = i;
  return m;
}

}  // namespace tmat
