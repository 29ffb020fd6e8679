#pragma once

#include <Eigen/Dense>
#include <fstream>
#include <functional>
#include <iomanip>
#include <string>
#include <vector>

#include "tmat/mask.hpp"
#include "tmat/tsvd.hpp"

namespace tmat {

/// ADMM schedule shared by both completion solvers.
struct CompletionConfig {
  double tau0 = 1e4;
  double alpha = 0.9;
  double tau_min = 1e-6;
  double rel_tol = 1e-8;
  std::size_t max_iters = 500;

  void validate() const {
    if (!(tau0 > 0.0))
      throw std::invalid_argument("CompletionConfig: tau0 must be positive");
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("CompletionConfig: alpha must lie in (0,1)");
    if (!(tau_min > 0.0))
      throw std::invalid_argument("CompletionConfig: tau_min must be positive");
    if (tau_min > tau0)
      throw std::invalid_argument("CompletionConfig: tau_min must not exceed tau0");
    if (!(rel_tol > 0.0))
      throw std::invalid_argument("CompletionConfig: rel_tol must be positive");
    if (max_iters == 0)
      throw std::invalid_argument("CompletionConfig: max_iters must be positive");
  }
};

struct TraceRecord {
  std::size_t iter;  // 1-based
  double tau;
  double residual;      // ||M - X - E||_F relative to ||M||_F
  double nuclear_norm;  // of the current X iterate
};

struct CompletionTrace {
  std::vector<TraceRecord> records;
  bool converged = false;
  std::size_t iterations = 0;

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
      throw std::runtime_error("CompletionTrace: cannot open " + path);
    out << "iter,tau,residual,nuclear_norm\n" << std::setprecision(17);
    for (const TraceRecord& r : records)
      out << r.iter << ',' << r.tau << ',' << r.residual << ','
          << r.nuclear_norm << '\n';
    if (!out)
      throw std::runtime_error("CompletionTrace: write failed for " + path);
  }
};

namespace detail {

/// The one place the dual variable is updated: Y += (1/tau) * resid,
/// coefficient-wise. Tests replay the update through this same function to
/// check the identity bit-for-bit.
inline void admm_dual_step(Eigen::MatrixXd& y, double inv_tau,
                           const Eigen::MatrixXd& resid) {
  y += inv_tau * resid;
}

inline void admm_dual_step(NdArray& y, double inv_tau, const NdArray& resid) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = cdouble{y[i].real() + inv_tau * resid[i].real(),
                   y[i].imag() + inv_tau * resid[i].imag()};
}

struct SvtOut {
  Eigen::MatrixXd value;
  double nuclear;
};

/// Classical singular value thresholding with the same zero shortcut as the
/// t-matrix operator: sigma_max <= ||A||_F, so the whole result vanishes
/// when tau reaches the Frobenius norm.
inline SvtOut svt_real(const Eigen::MatrixXd& a, double tau) {
  if (a.norm() <= tau)
    return {Eigen::MatrixXd::Zero(a.rows(), a.cols()), 0.0};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw numerical_error("svt: SVD failed to converge");
  Eigen::VectorXd s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = std::max(s[i] - tau, 0.0);
  return {svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose(), s.sum()};
}

}  // namespace detail

/// Per-iteration view handed to an observer: all iterates after the
/// update, the previous dual, and the materialized primal residual
/// M - X - E that fed the dual step.
struct LrmcIterationView {
  std::size_t iter;
  double tau;
  double inv_tau;
  const Eigen::MatrixXd& x;
  const Eigen::MatrixXd& e;
  const Eigen::MatrixXd& y;
  const Eigen::MatrixXd& y_prev;
  const Eigen::MatrixXd& resid;
  double residual;
};
using LrmcObserver = std::function<void(const LrmcIterationView&)>;

struct TmatrixIterationView {
  std::size_t iter;
  double tau;
  double inv_tau;
  const TMatrix& x;
  const TMatrix& e;
  const TMatrix& y;
  const TMatrix& y_prev;
  const TMatrix& resid;
  double residual;
};
using TmatrixObserver = std::function<void(const TmatrixIterationView&)>;

struct LrmcResult {
  Eigen::MatrixXd completed;
  CompletionTrace trace;
};

struct TmatrixResult {
  TMatrix completed;
  CompletionTrace trace;
};

namespace detail {
inline void check_solver_mask(const ObservationMask& mask, const char* who) {
  if (mask.none_observed() || mask.all_observed())
    throw std::invalid_argument(
        std::string(who) +
        ": mask must leave at least one entry observed and at least one "
        "missing");
}
}  // namespace detail

/// Classical low-rank matrix completion: alternate a singular value
/// thresholding step on X, a projection of the leftover onto the missing
/// set for E, and a scaled dual ascent on Y, while the penalty tau decays
/// geometrically to tau_min. Missing entries of M are zeroed up front.
inline LrmcResult lrmc_admm(const Eigen::MatrixXd& m,
                            const ObservationMask& observed,
                            const CompletionConfig& cfg = {},
                            const LrmcObserver& observer = {}) {
  cfg.validate();
  detail::check_solver_mask(observed, "lrmc_admm");
  if (!m.allFinite())
    throw std::invalid_argument("lrmc_admm: input contains non-finite values");

  const ObservationMask missing = observed.complement();
  const Eigen::MatrixXd m0 = mask_keep(m, observed);
  const double m_norm = m0.norm();
  const double denom = m_norm > 0.0 ? m_norm : 1.0;

  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  Eigen::MatrixXd e = x;
  Eigen::MatrixXd y = x;
  Eigen::MatrixXd y_prev;

  CompletionTrace trace;
  double tau = cfg.tau0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const double inv_tau = 1.0 / tau;

    const Eigen::MatrixXd scaled_dual = tau * y;
    const detail::SvtOut sv = detail::svt_real(m0 - e + scaled_dual, tau);
    x = sv.value;
    e = mask_keep(m0 - x + scaled_dual, missing);

    const Eigen::MatrixXd resid = m0 - x - e;
    if (observer) y_prev = y;
    detail::admm_dual_step(y, inv_tau, resid);

    const double residual = resid.norm() / denom;
    trace.records.push_back({k, tau, residual, sv.nuclear});
    trace.iterations = k;
    if (observer)
      observer({k, tau, inv_tau, x, e, y, y_prev, resid, residual});
    if (residual < cfg.rel_tol) {
      trace.converged = true;
      break;
    }
    tau = std::max(cfg.alpha * tau, cfg.tau_min);
  }
  return {std::move(x), std::move(trace)};
}

/// The same ADMM skeleton over t-matrices: TSVT replaces the thresholding
/// step and the mask works entry-level on the underlying array.
inline TmatrixResult tmatrix_admm(const TMatrix& m,
                                  const ObservationMask& observed,
                                  const CompletionConfig& cfg = {},
                                  const TmatrixObserver& observer = {}) {
  cfg.validate();
  detail::check_solver_mask(observed, "tmatrix_admm");
  if (!m.body().all_finite())
    throw std::invalid_argument(
        "tmatrix_admm: input contains non-finite values");
  if (observed.shape() != m.body().shape())
    throw std::invalid_argument(
        "tmatrix_admm: mask domain does not match the t-matrix body");

  const std::size_t order = m.scalar_order();
  const ObservationMask missing = observed.complement();
  const TMatrix m0 = mask_keep(m, observed);
  const double m_norm = m0.body().frobenius_norm();
  const double denom = m_norm > 0.0 ? m_norm : 1.0;

  TMatrix x = TMatrix(NdArray(m.body().shape()), order);
  TMatrix e = x;
  TMatrix y = x;
  TMatrix y_prev = x;

  CompletionTrace trace;
  double tau = cfg.tau0;
  for (std::size_t k = 1; k <= cfg.max_iters; ++k) {
    const double inv_tau = 1.0 / tau;

    const TMatrix scaled_dual = scale(y, cdouble{tau, 0.0});
    TsvtResult sv = tsvt_with_nuclear(m0 - e + scaled_dual, tau);
    x = std::move(sv.value);
    e = mask_keep(m0 - x + scaled_dual, missing);

    const TMatrix resid = m0 - x - e;
    if (observer) y_prev = y;
    detail::admm_dual_step(y.body(), inv_tau, resid.body());

    const double residual = resid.body().frobenius_norm() / denom;
    trace.records.push_back({k, tau, residual, sv.nuclear_norm});
    trace.iterations = k;
    if (observer)
      observer({k, tau, inv_tau, x, e, y, y_prev, resid, residual});
    if (residual < cfg.rel_tol) {
      trace.converged = true;
      break;
    }
    tau = std::max(cfg.alpha * tau, cfg.tau_min);
  }
  return {std::move(x), std::move(trace)};
}

}  // namespace tmat
