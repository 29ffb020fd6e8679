#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>

#include "test_util.hpp"
#include "tmat/completion.hpp"

using tmat::CompletionConfig;
using tmat::NdArray;
using tmat::ObservationMask;
using tmat::TMatrix;
using tmat::cdouble;
using testutil::max_abs_diff;

namespace {

ObservationMask random_mask(std::vector<std::size_t> shape,
                            double observe_fraction, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  std::vector<std::uint8_t> flags(n);
  for (auto& f : flags) f = dist(gen) < observe_fraction ? 1 : 0;
  flags[0] = 1;      // keep both sets nonempty
  flags[n - 1] = 0;
  return ObservationMask(std::move(shape), std::move(flags));
}

Eigen::MatrixXd random_rank(std::size_t n, std::size_t r, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd a(n, r), b(r, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = dist(gen);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = dist(gen);
  return a * b;
}

TMatrix random_real_tmatrix(std::vector<std::size_t> scalar_shape,
                            std::size_t d1, std::size_t d2, unsigned seed) {
  scalar_shape.push_back(d1);
  scalar_shape.push_back(d2);
  const std::size_t n = scalar_shape.size() - 2;
  return TMatrix(testutil::random_real_array(std::move(scalar_shape), seed), n);
}

TMatrix low_rank_tmatrix(std::vector<std::size_t> scalar_shape, std::size_t d,
                         std::size_t r, unsigned seed) {
  const TMatrix p = random_real_tmatrix(scalar_shape, d, r, seed);
  const TMatrix q = random_real_tmatrix(scalar_shape, r, d, seed + 1);
  return tmat_mul(p, q);
}

}  // namespace

TEST_CASE("observation mask bookkeeping", "[completion]") {
  CHECK_THROWS_AS(ObservationMask({2, 2}, std::vector<std::uint8_t>(3)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ObservationMask({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(ObservationMask({2, 0}, {}), std::invalid_argument);

  const ObservationMask m({2, 2}, {1, 0, 0, 1});
  CHECK(m.observed_count() == 2);
  CHECK(m.missing_count() == 2);
  CHECK(m.observed(0));
  CHECK_FALSE(m.observed(1));
  const ObservationMask c = m.complement();
  CHECK(c.observed(1));
  CHECK_FALSE(c.observed(0));
  CHECK(ObservationMask::full({3, 3}).all_observed());
}

TEST_CASE("mask_keep keeps the marked entries", "[completion]") {
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 4;
  const ObservationMask diag({2, 2}, {1, 0, 0, 1});
  const Eigen::MatrixXd kept = mask_keep(a, diag);
  CHECK(kept(0, 0) == 1.0);
  CHECK(kept(0, 1) == 0.0);
  CHECK(kept(1, 0) == 0.0);
  CHECK(kept(1, 1) == 4.0);

  CHECK(mask_keep(a, ObservationMask::full({2, 2})) == a);
  CHECK_THROWS_AS(mask_keep(a, ObservationMask::full({2, 3})),
                  std::invalid_argument);
}

TEST_CASE("masking partitions an array exactly", "[completion]") {
  const NdArray a = testutil::random_array({3, 4, 2}, 7);
  const ObservationMask m = random_mask({3, 4, 2}, 0.5, 8);
  const NdArray sum = add(mask_keep(a, m), mask_keep(a, m.complement()));
  CHECK(max_abs_diff(sum, a) == 0.0);

  const TMatrix t(testutil::random_real_array({2, 3, 4}, 9), 1);
  const ObservationMask mt = random_mask({2, 3, 4}, 0.5, 10);
  const TMatrix tsum = mask_keep(t, mt) + mask_keep(t, mt.complement());
  CHECK(max_abs_diff(tsum.body(), t.body()) == 0.0);
}

TEST_CASE("completion config is validated", "[completion]") {
  CompletionConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tau_min = 1e5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tau0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.rel_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("lrmc recovers a rank-1 matrix from partial entries",
          "[completion]") {
  const Eigen::MatrixXd m = random_rank(20, 1, 40);
  const ObservationMask mask = random_mask({20, 20}, 0.6, 41);
  CompletionConfig cfg;
  cfg.max_iters = 300;
  const auto res = lrmc_admm(m, mask, cfg);
  CHECK((res.completed - m).norm() / m.norm() < 1e-3);
}

TEST_CASE("lrmc fills a single missing entry of a rank-1 pattern",
          "[completion]") {
  const Eigen::MatrixXd m = random_rank(12, 1, 42);
  std::vector<std::uint8_t> flags(144, 1);
  flags[2 * 12 + 3] = 0;
  const auto res = lrmc_admm(m, ObservationMask({12, 12}, std::move(flags)));
  CHECK(res.trace.converged);
  CHECK(std::abs(res.completed(2, 3) - m(2, 3)) < 1e-4);
  // feasibility: observed entries are reproduced
  CHECK(std::abs(res.completed(0, 0) - m(0, 0)) < 10 * 1e-8 * m.norm());
}

TEST_CASE("lrmc on the zero matrix stops immediately", "[completion]") {
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(6, 6);
  const auto res = lrmc_admm(z, random_mask({6, 6}, 0.5, 43));
  CHECK(res.trace.iterations == 1);
  CHECK(res.trace.converged);
  CHECK(res.completed.norm() == 0.0);
}

TEST_CASE("solvers reject degenerate masks and bad input", "[completion]") {
  const Eigen::MatrixXd m = random_rank(5, 1, 44);
  CHECK_THROWS_AS(lrmc_admm(m, ObservationMask::full({5, 5})),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      lrmc_admm(m, ObservationMask({5, 5}, std::vector<std::uint8_t>(25, 0))),
      std::invalid_argument);
  Eigen::MatrixXd bad = m;
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(lrmc_admm(bad, random_mask({5, 5}, 0.5, 45)),
                  std::invalid_argument);

  const TMatrix t = low_rank_tmatrix({2, 2}, 6, 2, 46);
  CHECK_THROWS_AS(tmatrix_admm(t, ObservationMask::full(t.body().shape())),
                  std::invalid_argument);
  CHECK_THROWS_AS(tmatrix_admm(t, random_mask({2, 2, 6, 7}, 0.5, 47)),
                  std::invalid_argument);
}

TEST_CASE("lrmc structural invariants hold along the run", "[completion]") {
  const Eigen::MatrixXd m = random_rank(10, 1, 50);
  const ObservationMask mask = random_mask({10, 10}, 0.6, 51);
  CompletionConfig cfg;
  cfg.max_iters = 60;
  double last_tau = cfg.tau0;
  std::size_t calls = 0;
  const auto res = lrmc_admm(m, mask, cfg, [&](const tmat::LrmcIterationView& v) {
    ++calls;
    // E vanishes on observed entries, exactly
    for (Eigen::Index r = 0; r < v.e.rows(); ++r)
      for (Eigen::Index c = 0; c < v.e.cols(); ++c)
        if (mask.observed(std::size_t(r) * 10 + std::size_t(c)))
          CHECK(v.e(r, c) == 0.0);
    // tau never increases and respects the floor
    CHECK(v.tau <= last_tau);
    CHECK(v.tau >= cfg.tau_min);
    last_tau = v.tau;
    // the dual step replayed through the same function is bit-identical
    Eigen::MatrixXd expect = v.y_prev;
    tmat::detail::admm_dual_step(expect, v.inv_tau, v.resid);
    CHECK((expect - v.y).cwiseAbs().maxCoeff() == 0.0);
    CHECK(v.inv_tau == 1.0 / v.tau);
  });
  CHECK(calls == res.trace.iterations);
}

TEST_CASE("trace exports CSV with the iteration schedule", "[completion]") {
  const Eigen::MatrixXd m = random_rank(8, 1, 52);
  CompletionConfig cfg;
  cfg.max_iters = 25;
  const auto res = lrmc_admm(m, random_mask({8, 8}, 0.6, 53), cfg);
  REQUIRE(res.trace.records.size() == res.trace.iterations);
  for (std::size_t i = 0; i < res.trace.records.size(); ++i) {
    CHECK(res.trace.records[i].iter == i + 1);
    if (i > 0)
      CHECK(res.trace.records[i].tau <= res.trace.records[i - 1].tau);
  }

  const std::string path = "test_trace.csv";
  res.trace.write_csv(path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,tau,residual,nuclear_norm");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == res.trace.iterations);
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("scalar shape 1x1x1 degenerates to classical completion",
          "[completion]") {
  const std::size_t n = 12;
  const Eigen::MatrixXd m = random_rank(n, 2, 60);
  const ObservationMask mask2d = random_mask({n, n}, 0.6, 61);

  NdArray body({1, 1, 1, n, n});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      body.at({0, 0, 0, r, c}) = cdouble(m(long(r), long(c)), 0.0);
  const TMatrix mt(std::move(body), 3);
  const ObservationMask mask5d({1, 1, 1, n, n},
                               std::vector<std::uint8_t>(mask2d.flags()));

  CompletionConfig cfg;
  cfg.max_iters = 40;
  std::vector<Eigen::MatrixXd> xs, es, ys;
  lrmc_admm(m, mask2d, cfg, [&](const tmat::LrmcIterationView& v) {
    xs.push_back(v.x);
    es.push_back(v.e);
    ys.push_back(v.y);
  });
  std::size_t at = 0;
  double worst = 0.0;
  tmatrix_admm(mt, mask5d, cfg, [&](const tmat::TmatrixIterationView& v) {
    REQUIRE(at < xs.size());
    auto body_vs = [&](const TMatrix& t, const Eigen::MatrixXd& ref) {
      double w = 0.0;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          w = std::max(w, std::abs(t.body().at({0, 0, 0, r, c}) -
                                   cdouble(ref(long(r), long(c)), 0.0)));
      return w;
    };
    worst = std::max(worst, body_vs(v.x, xs[at]));
    worst = std::max(worst, body_vs(v.e, es[at]));
    worst = std::max(worst, body_vs(v.y, ys[at]));
    ++at;
  });
  CHECK(at == xs.size());
  CHECK(worst < 1e-10);
}

TEST_CASE("t-matrix completion recovers a synthetic low-rank instance",
          "[completion]") {
  const TMatrix truth = low_rank_tmatrix({2, 2}, 16, 2, 70);
  const ObservationMask mask = random_mask(truth.body().shape(), 0.8, 71);
  const auto res = tmatrix_admm(mask_keep(truth, mask), mask);
  CHECK(res.completed.has_real_body());
  const double rse = max_abs_diff(res.completed.body(), truth.body()) /
                     truth.body().max_abs();
  CHECK(subtract(res.completed.body(), truth.body()).frobenius_norm() /
            truth.body().frobenius_norm() <
        1e-2);
  CHECK(rse < 1e-1);
}

TEST_CASE("t-matrix completion with one missing entry converges tightly",
          "[completion]") {
  const TMatrix truth = low_rank_tmatrix({2, 2}, 10, 2, 72);
  std::vector<std::uint8_t> flags(truth.body().size(), 1);
  flags[truth.body().size() / 2] = 0;
  const ObservationMask mask(truth.body().shape(), std::move(flags));
  const auto res = tmatrix_admm(truth, mask);
  CHECK(res.trace.converged);
  CHECK(subtract(res.completed.body(), truth.body()).frobenius_norm() /
            truth.body().frobenius_norm() <
        1e-6);
}

TEST_CASE("t-matrix solver invariants hold along the run", "[completion]") {
  const TMatrix truth = low_rank_tmatrix({3}, 8, 2, 73);
  const ObservationMask mask = random_mask(truth.body().shape(), 0.7, 74);
  CompletionConfig cfg;
  cfg.max_iters = 50;
  double last_tau = cfg.tau0;
  tmatrix_admm(mask_keep(truth, mask), mask, cfg,
               [&](const tmat::TmatrixIterationView& v) {
                 for (std::size_t i = 0; i < v.e.body().size(); ++i)
                   if (mask.observed(i))
                     CHECK(std::abs(v.e.body()[i]) == 0.0);
                 CHECK(v.tau <= last_tau);
                 CHECK(v.tau >= cfg.tau_min);
                 last_tau = v.tau;
                 NdArray expect = v.y_prev.body();
                 tmat::detail::admm_dual_step(expect, v.inv_tau,
                                              v.resid.body());
                 CHECK(max_abs_diff(expect, v.y.body()) == 0.0);
               });
}
