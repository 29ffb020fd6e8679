#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmat/completion.hpp"
#include "tmat/image_io.hpp"
#include "tmat/lifting.hpp"
#include "tmat/random.hpp"
#include "tmat/tmatrix.hpp"

namespace tmat {

// ---------------------------------------------------------------------------
// synthetic low-rank instances

struct SyntheticSpec {
  std::size_t d = 0;                      // matrix is d x d
  std::vector<std::size_t> scalar_shape;  // t-scalar extents
  std::size_t r = 0;                      // inner dimension of the factors
  double missing_fraction = 0.0;          // fraction of entries dropped
  std::uint64_t seed = 0;

  void validate() const {
    if (d == 0) throw std::invalid_argument("SyntheticSpec: zero matrix dimension");
    if (scalar_shape.empty())
      throw std::invalid_argument("SyntheticSpec: empty scalar shape");
    for (std::size_t e : scalar_shape)
      if (e == 0) throw std::invalid_argument("SyntheticSpec: zero scalar extent");
    if (r == 0 || r > d)
      throw std::invalid_argument(
          "SyntheticSpec: inner dimension must satisfy 0 < r <= " +
          std::to_string(d) + ", got " + std::to_string(r));
    if (!(missing_fraction > 0.0 && missing_fraction < 1.0))
      throw std::invalid_argument(
          "SyntheticSpec: missing fraction must lie strictly inside (0, 1)");
  }
};

struct SyntheticInstance {
  TMatrix truth;
  ObservationMask mask;
};

/// Product of two i.i.d. standard-normal real factors plus a uniform
/// entry-level mask. Draw order is fixed for reproducibility: the P body
/// row-major, then the Q body row-major, then the missing-index sample.
inline SyntheticInstance gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  const auto draw_factor = [&](std::size_t rows, std::size_t cols) {
    std::vector<std::size_t> shape = spec.scalar_shape;
    shape.push_back(rows);
    shape.push_back(cols);
    NdArray body(std::move(shape));
    for (cdouble& v : body.values()) v = cdouble{rng.normal(), 0.0};
    return TMatrix(std::move(body), spec.scalar_shape.size());
  };
  const TMatrix p = draw_factor(spec.d, spec.r);
  const TMatrix q = draw_factor(spec.r, spec.d);
  TMatrix truth = tmat_mul(p, q);

  const std::size_t total = truth.body().size();
  const std::size_t missing =
      std::size_t(std::llround(spec.missing_fraction * double(total)));
  std::vector<std::uint8_t> flags(total, 1);
  for (std::size_t i : rng.sample_without_replacement(total, missing))
    flags[i] = 0;
  ObservationMask mask(truth.body().shape(), std::move(flags));
  return {std::move(truth), std::move(mask)};
}

// ---------------------------------------------------------------------------
// error metrics

/// Relative Frobenius error of the underlying arrays.
inline double rse(const NdArray& truth, const NdArray& estimate) {
  const double denom = truth.frobenius_norm();
  if (denom == 0.0) throw std::invalid_argument("rse: zero-norm reference");
  return subtract(estimate, truth).frobenius_norm() / denom;
}

inline double rse(const TMatrix& truth, const TMatrix& estimate) {
  return rse(truth.body(), estimate.body());
}

inline double rse(const SpectralImage& truth, const SpectralImage& estimate) {
  if (truth.height() != estimate.height() || truth.width() != estimate.width() ||
      truth.channels() != estimate.channels())
    throw std::invalid_argument("rse: image shapes differ");
  double num2 = 0.0, den2 = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate.values()[i] - truth.values()[i];
    num2 += d * d;
    den2 += truth.values()[i] * truth.values()[i];
  }
  if (den2 == 0.0) throw std::invalid_argument("rse: zero-norm reference");
  return std::sqrt(num2 / den2);
}

/// Peak signal-to-noise ratio in dB with both images normalized to peak 1:
/// 10 log10(sample count / squared error). Identical inputs report the
/// +infinity sentinel rather than an error.
inline double psnr(const SpectralImage& recovered,
                   const SpectralImage& reference) {
  if (recovered.height() != reference.height() ||
      recovered.width() != reference.width() ||
      recovered.channels() != reference.channels())
    throw std::invalid_argument("psnr: image shapes differ");
  const auto unit = [](const SpectralImage& s, std::size_t i) {
    return s.domain() == ValueDomain::Byte ? s.values()[i] / 255.0
                                           : s.values()[i];
  };
  double err2 = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = unit(recovered, i) - unit(reference, i);
    err2 += d * d;
  }
  if (err2 == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(double(reference.size()) / err2);
}

// ---------------------------------------------------------------------------
// phase-transition grids

struct PhaseGridSpec {
  std::size_t d = 0;
  std::vector<std::size_t> scalar_shape;
  std::vector<std::size_t> r_values;
  std::vector<double> rho_values;
  std::size_t trials = 1;
  double threshold = 1e-2;  // an instance succeeds when rse < threshold
  std::uint64_t seed = 0;
  CompletionConfig solver;
};

struct PhaseCell {
  std::size_t r = 0;
  double rho = 0.0;
  double success_rate = 0.0;
  double mean_rse = 0.0;
};

struct PhaseGrid {
  std::vector<PhaseCell> cells;

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "r,rho,success_rate,mean_rse\n" << std::setprecision(17);
    for (const PhaseCell& c : cells)
      out << c.r << "," << c.rho << "," << c.success_rate << "," << c.mean_rse
          << "\n";
    if (!out) throw std::runtime_error("failed writing " + path);
  }
};

/// One completion run per (r, rho, trial). Each cell draws from a child
/// stream derived from (seed, r, rho bits, trial), so the sweep order --
/// or a parallel schedule -- cannot change any instance.
inline PhaseGrid phase_grid(const PhaseGridSpec& spec) {
  if (spec.r_values.empty() || spec.rho_values.empty())
    throw std::invalid_argument("phase_grid: empty parameter range");
  if (spec.trials == 0) throw std::invalid_argument("phase_grid: zero trials");
  spec.solver.validate();

  PhaseGrid grid;
  for (std::size_t r : spec.r_values)
    for (double rho : spec.rho_values) {
      double rse_sum = 0.0;
      std::size_t successes = 0;
      for (std::size_t trial = 0; trial < spec.trials; ++trial) {
        const std::uint64_t child =
            derive_seed(spec.seed, {std::uint64_t(r), seed_tag(rho), trial});
        const SyntheticInstance inst =
            gen_synthetic({spec.d, spec.scalar_shape, r, rho, child});
        const TmatrixResult res = tmatrix_admm(inst.truth, inst.mask, spec.solver);
        const double err = rse(inst.truth, res.completed);
        rse_sum += err;
        successes += err < spec.threshold ? 1 : 0;
      }
      grid.cells.push_back({r, rho, double(successes) / double(spec.trials),
                            rse_sum / double(spec.trials)});
    }
  return grid;
}

namespace detail {

/// "Hot" ramp: black -> red -> yellow -> white over [0, 1].
inline void hot_rgb(double t, double rgb[3]) {
  t = std::clamp(t, 0.0, 1.0);
  rgb[0] = 255.0 * std::clamp(3.0 * t, 0.0, 1.0);
  rgb[1] = 255.0 * std::clamp(3.0 * t - 1.0, 0.0, 1.0);
  rgb[2] = 255.0 * std::clamp(3.0 * t - 2.0, 0.0, 1.0);
}

}  // namespace detail

/// Success-rate heatmap: one block per cell, r values down the rows in
/// first-appearance order, rho values across the columns.
inline void render_phase_heatmap(const PhaseGrid& grid, const std::string& path,
                                 std::size_t cell_px = 16) {
  if (grid.cells.empty())
    throw std::invalid_argument("render_phase_heatmap: empty grid");
  if (cell_px == 0)
    throw std::invalid_argument("render_phase_heatmap: zero cell size");

  std::vector<std::size_t> rs;
  std::vector<double> rhos;
  for (const PhaseCell& c : grid.cells) {
    if (std::find(rs.begin(), rs.end(), c.r) == rs.end()) rs.push_back(c.r);
    if (std::find(rhos.begin(), rhos.end(), c.rho) == rhos.end())
      rhos.push_back(c.rho);
  }

  SpectralImage img(rs.size() * cell_px, rhos.size() * cell_px, 3);
  for (const PhaseCell& c : grid.cells) {
    const std::size_t row =
        std::size_t(std::find(rs.begin(), rs.end(), c.r) - rs.begin());
    const std::size_t col =
        std::size_t(std::find(rhos.begin(), rhos.end(), c.rho) - rhos.begin());
    double rgb[3];
    detail::hot_rgb(c.success_rate, rgb);
    for (std::size_t dr = 0; dr < cell_px; ++dr)
      for (std::size_t dc = 0; dc < cell_px; ++dc)
        for (std::size_t ch = 0; ch < 3; ++ch)
          img.at(row * cell_px + dr, col * cell_px + dc, ch) = rgb[ch];
  }
  write_png(path, img);
}

// ---------------------------------------------------------------------------
// image completion pipeline

struct ImageCompletionOptions {
  std::size_t i1 = 3;  // neighborhood extents, both odd
  std::size_t i2 = 3;
  BoundaryPolicy boundary = BoundaryPolicy::Replicate;
  CompletionConfig solver;
};

struct ImageCompletionResult {
  SpectralImage recovered;
  CompletionTrace trace;  // empty when no pixel was missing
  double psnr_db = 0.0;   // recovered vs the input reference
  double rse = 0.0;
  double wall_time_seconds = 0.0;
};

/// lift -> solve -> down-convert. The mask addresses pixels of the input
/// image; a fully observed mask skips the solver and only re-quantizes.
inline ImageCompletionResult complete_image(const SpectralImage& img,
                                            const ObservationMask& pixels,
                                            const ImageCompletionOptions& opt) {
  const std::vector<std::size_t> want{img.height(), img.width(),
                                      img.channels()};
  if (pixels.shape() != want)
    throw std::invalid_argument("complete_image: mask domain does not match image");
  opt.solver.validate();

  const auto t0 = std::chrono::steady_clock::now();
  LiftedTMatrix lifted = lift_image(img, opt.i1, opt.i2, opt.boundary);
  CompletionTrace trace;
  SpectralImage recovered = [&]() -> SpectralImage {
    if (pixels.all_observed()) return downconvert(lifted);
    const ObservationMask lifted_mask =
        lift_mask(pixels, opt.i1, opt.i2, opt.boundary);
    TmatrixResult res = tmatrix_admm(lifted.tmatrix, lifted_mask, opt.solver);
    trace = std::move(res.trace);
    return downconvert(
        {std::move(res.completed), opt.i1, opt.i2, lifted.domain});
  }();
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const double quality = psnr(recovered, img);
  const double err = rse(img, recovered);
  return {std::move(recovered), std::move(trace), quality, err, wall};
}

}  // namespace tmat
