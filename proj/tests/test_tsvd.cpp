#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "tmat/serialize.hpp"
#include "tmat/tsvd.hpp"

using tmat::NdArray;
using tmat::PartialOrder;
using tmat::SpectralSlices;
using tmat::TMatrix;
using tmat::TScalar;
using tmat::cdouble;
using testutil::max_abs_diff;

namespace {

TMatrix random_tmatrix(std::vector<std::size_t> scalar_shape, std::size_t d1,
                       std::size_t d2, unsigned seed) {
  scalar_shape.push_back(d1);
  scalar_shape.push_back(d2);
  const std::size_t n = scalar_shape.size() - 2;
  return TMatrix(testutil::random_array(std::move(scalar_shape), seed), n);
}

TMatrix random_real_tmatrix(std::vector<std::size_t> scalar_shape,
                            std::size_t d1, std::size_t d2, unsigned seed) {
  scalar_shape.push_back(d1);
  scalar_shape.push_back(d2);
  const std::size_t n = scalar_shape.size() - 2;
  return TMatrix(testutil::random_real_array(std::move(scalar_shape), seed), n);
}

double reconstruction_error(const TMatrix& x) {
  const auto f = tsvd(x);
  const TMatrix back = tmat_mul(tmat_mul(f.u, f.s), conj_transpose(f.v));
  return max_abs_diff(back.body(), x.body()) / x.body().frobenius_norm();
}

double orthogonality_defect(const TMatrix& q) {
  const TMatrix g = tmat_mul(conj_transpose(q), q);
  const TMatrix id = TMatrix::identity(q.scalar_shape(), q.cols());
  return max_abs_diff(g.body(), id.body());
}

}  // namespace

TEST_CASE("tsvd of the identity gives an identity S", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);
  const auto f = tsvd(id);
  CHECK(max_abs_diff(f.s.body(), id.body()) < 1e-10);
  CHECK(orthogonality_defect(f.u) < 1e-9);
  CHECK(orthogonality_defect(f.v) < 1e-9);
}

TEST_CASE("tsvd of zeros gives zero S", "[tsvd]") {
  const TMatrix z = TMatrix::zeros({2, 3}, 4, 2);
  const auto f = tsvd(z);
  CHECK(f.s.body().max_abs() == 0.0);
  CHECK(f.u.rows() == 4);
  CHECK(f.s.rows() == 2);
  CHECK(f.v.rows() == 2);
}

TEST_CASE("tsvd reconstructs and is generalized-orthogonal", "[tsvd]") {
  for (unsigned seed = 0; seed < 4; ++seed) {
    const TMatrix x = seed % 2 == 0
                          ? random_real_tmatrix({3, 3}, 5, 3, 30 + seed)
                          : random_tmatrix({2, 3}, 4, 6, 30 + seed);
    const auto f = tsvd(x);
    CHECK(reconstruction_error(x) < 1e-10);
    CHECK(orthogonality_defect(f.u) < 1e-9);
    CHECK(orthogonality_defect(f.v) < 1e-9);
  }
}

TEST_CASE("real input produces real factors", "[tsvd]") {
  const TMatrix x = random_real_tmatrix({3, 4}, 4, 3, 40);
  const auto f = tsvd(x);
  CHECK(f.u.has_real_body());
  CHECK(f.s.has_real_body());
  CHECK(f.v.has_real_body());
  CHECK(reconstruction_error(x) < 1e-10);
}

TEST_CASE("singular values are nonnegative and sorted", "[tsvd]") {
  const TMatrix x = random_tmatrix({2, 2}, 4, 4, 50);
  const auto f = tsvd(x);
  const SpectralSlices ss(f.s);
  for (std::size_t k = 0; k < ss.count(); ++k) {
    const auto diag = ss.slice(k).diagonal();
    for (Eigen::Index d = 0; d < diag.size(); ++d) {
      CHECK(diag[d].real() > -1e-10);
      if (d + 1 < diag.size())
        CHECK(diag[d].real() >= diag[d + 1].real() - 1e-10);
    }
  }
  // slice-wise total order implies the t-scalar partial order on diagonals
  for (std::size_t d = 0; d + 1 < f.s.rows(); ++d) {
    const auto cmp = partial_order_cmp(f.s.entry(d, d), f.s.entry(d + 1, d + 1));
    CHECK((cmp == PartialOrder::GreaterEqual || cmp == PartialOrder::Equal));
    CHECK(f.s.entry(d, d).is_nonnegative(1e-9));
  }
}

TEST_CASE("tsvt wipes a matrix when tau dominates every slice", "[tsvd]") {
  const TMatrix x = random_tmatrix({2, 2}, 3, 3, 60);
  // Frobenius norm of the whole spectrum bounds every slice's sigma_max
  const double tau = 2.0 * std::sqrt(4.0) * x.body().frobenius_norm();
  CHECK(tsvt(x, tau).body().max_abs() == 0.0);
}

TEST_CASE("tsvt at vanishing tau approaches the input", "[tsvd]") {
  const TMatrix x = random_tmatrix({3}, 4, 3, 61);
  const TMatrix y = tsvt(x, 1e-12);
  CHECK(max_abs_diff(y.body(), x.body()) < 1e-8);
  CHECK_THROWS_AS(tsvt(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tsvt(x, -1.0), std::invalid_argument);
}

TEST_CASE("single-slice tsvt equals classical singular value thresholding",
          "[tsvd]") {
  // scalar shape {1}: the t-matrix is a plain matrix, real and complex
  const TMatrix xr = random_real_tmatrix({1}, 5, 4, 62);
  Eigen::MatrixXd mr(5, 4);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      mr(long(i), long(j)) = xr.body().at({0, i, j}).real();
  const Eigen::MatrixXd want_r = oracles::svt_dense(mr, 0.8);
  const TMatrix got_r = tsvt(xr, 0.8);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(got_r.body().at({0, i, j}) - cdouble(want_r(long(i), long(j)), 0.0)) <
            1e-10);

  const TMatrix xc = random_tmatrix({1}, 4, 4, 63);
  Eigen::MatrixXcd mc(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) mc(long(i), long(j)) = xc.body().at({0, i, j});
  const Eigen::MatrixXcd want_c = oracles::svt_dense(mc, 0.5);
  const TMatrix got_c = tsvt(xc, 0.5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(std::abs(got_c.body().at({0, i, j}) - want_c(long(i), long(j))) < 1e-10);
}

TEST_CASE("tsvt equals per-slice thresholding on general shapes", "[tsvd]") {
  const TMatrix x = random_tmatrix({2, 3}, 4, 3, 64);
  const double tau = 0.7;
  const SpectralSlices sx(x);
  SpectralSlices want(x.scalar_shape(), x.rows(), x.cols());
  for (std::size_t k = 0; k < sx.count(); ++k) {
    const Eigen::MatrixXcd a = sx.slice(k);
    want.slice(k) = oracles::svt_dense(a, tau);
  }
  CHECK(max_abs_diff(tsvt(x, tau).body(), want.to_tmatrix().body()) < 1e-10);
}

TEST_CASE("tsvt reports the nuclear norm of its result", "[tsvd]") {
  const TMatrix x = random_real_tmatrix({2, 2}, 4, 4, 65);
  const auto r = tsvt_with_nuclear(x, 0.3);
  CHECK(r.nuclear_norm ==
        Catch::Approx(nuclear_norm(r.value)).margin(1e-8));
}

TEST_CASE("pseudo-inverse satisfies the Penrose identity", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);
  CHECK(max_abs_diff(pseudo_inverse(id).body(), id.body()) < 1e-10);

  const TMatrix z = TMatrix::zeros({2}, 3, 4);
  const TMatrix zp = pseudo_inverse(z);
  CHECK(zp.rows() == 4);
  CHECK(zp.cols() == 3);
  CHECK(zp.body().max_abs() == 0.0);

  const TMatrix x = random_tmatrix({2, 2}, 4, 3, 70);
  const TMatrix xp = pseudo_inverse(x);
  const TMatrix back = tmat_mul(tmat_mul(x, xp), x);
  CHECK(max_abs_diff(back.body(), x.body()) / x.body().frobenius_norm() < 1e-8);
}

TEST_CASE("pseudo-inverse agrees with the factor formula", "[tsvd]") {
  const TMatrix x = random_real_tmatrix({3}, 4, 3, 71);
  const auto f = tsvd(x);
  const TMatrix via_factors =
      tmat_mul(tmat_mul(f.v, pseudo_inverse(f.s)), conj_transpose(f.u));
  CHECK(max_abs_diff(pseudo_inverse(x).body(), via_factors.body()) < 1e-9);
}

TEST_CASE("higher-order rank counts per-slice ranks", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);
  const auto r_id = higher_order_rank(id);
  for (std::size_t v : r_id.slice_ranks) CHECK(v == 3);
  CHECK(r_id.value.is_nonnegative());

  const auto r_zero = higher_order_rank(TMatrix::zeros({2, 2}, 3, 3));
  for (std::size_t v : r_zero.slice_ranks) CHECK(v == 0);

  // random product with inner dimension 2 has every slice rank 2
  const TMatrix p = random_real_tmatrix({2, 2}, 6, 2, 80);
  const TMatrix q = random_real_tmatrix({2, 2}, 2, 6, 81);
  const auto r_pq = higher_order_rank(tmat_mul(p, q));
  for (std::size_t v : r_pq.slice_ranks) CHECK(v == 2);

  CHECK_THROWS_AS(higher_order_rank(id, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(higher_order_rank(id, -1.0), std::invalid_argument);
}

TEST_CASE("rank spectrum lives in the t-scalar value", "[tsvd]") {
  const TMatrix p = random_real_tmatrix({3}, 5, 2, 82);
  const TMatrix q = random_real_tmatrix({3}, 2, 5, 83);
  const auto r = higher_order_rank(tmat_mul(p, q));
  const NdArray spec = r.value.spectrum().values;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    CHECK(std::abs(spec[k].real() - double(r.slice_ranks[k])) < 1e-8);
    CHECK(std::abs(spec[k].imag()) < 1e-8);
  }
}

TEST_CASE("tubal, average, and trace ranks", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);  // K = 4 slices
  CHECK(tubal_rank(id) == 3);
  CHECK(average_rank(id) == Catch::Approx(3.0));
  CHECK(trace_rank(id) == 12);

  // one full-rank slice, all others zero: tubal D, trace D, average D/K
  SpectralSlices ss({2, 2}, 4, 4);
  ss.slice(0) = Eigen::MatrixXcd::Identity(4, 4) +
                0.1 * Eigen::MatrixXcd::Random(4, 4);
  const TMatrix lone = ss.to_tmatrix();
  CHECK(tubal_rank(lone) == 4);
  CHECK(trace_rank(lone) == 4);
  CHECK(average_rank(lone) == Catch::Approx(1.0));
}

TEST_CASE("Schatten norms, nuclear norm, and the Parseval bridge", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);
  CHECK(nuclear_norm(id) == Catch::Approx(12.0).epsilon(1e-10));

  const TMatrix x = random_tmatrix({2, 3}, 3, 4, 90);
  CHECK(real_schatten(x, 2.0) ==
        Catch::Approx(std::sqrt(6.0) * x.body().frobenius_norm())
            .epsilon(1e-10));

  // single-slice nuclear norm equals the dense matrix nuclear norm
  const TMatrix xm = random_tmatrix({1}, 4, 5, 91);
  Eigen::MatrixXcd m(4, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) m(long(i), long(j)) = xm.body().at({0, i, j});
  CHECK(real_schatten(xm, 1.0) ==
        Catch::Approx(oracles::nuclear_norm_dense(m)).epsilon(1e-10));

  CHECK_THROWS_AS(schatten_norm(x, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(real_schatten(x, 0.99), std::invalid_argument);

  // the t-scalar Schatten norm holds per-slice values in its spectrum
  const TScalar n1 = schatten_norm(x, 1.0);
  const SpectralSlices sx(x);
  const NdArray spec = n1.spectrum().values;
  for (std::size_t k = 0; k < sx.count(); ++k) {
    const Eigen::MatrixXcd a = sx.slice(k);
    CHECK(std::abs(spec[k].real() - oracles::nuclear_norm_dense(a)) < 1e-8);
  }
}

TEST_CASE("real inner product", "[tsvd]") {
  const TMatrix x = random_tmatrix({2, 2}, 3, 3, 100);
  const TMatrix y = random_tmatrix({2, 2}, 3, 3, 101);
  const TMatrix z = TMatrix::zeros({2, 2}, 3, 3);

  const double xx = real_inner_product(x, x);
  CHECK(xx >= 0.0);
  CHECK(xx == Catch::Approx(std::pow(real_schatten(x, 2.0), 2)).epsilon(1e-10));
  CHECK(real_inner_product(x, z) == 0.0);
  CHECK(real_inner_product(x, y) == Catch::Approx(real_inner_product(y, x))
                                        .margin(1e-10));

  // bilinear over real coefficients
  const double a = 0.7, b = -1.3;
  const TMatrix combo = a * x + b * y;
  CHECK(real_inner_product(combo, y) ==
        Catch::Approx(a * real_inner_product(x, y) +
                      b * real_inner_product(y, y))
            .margin(1e-8));

  CHECK_THROWS_AS(real_inner_product(x, TMatrix::zeros({2, 2}, 3, 4)),
                  std::invalid_argument);
}

TEST_CASE("real inner product matches the materialized realification",
          "[tsvd]") {
  const TMatrix x = random_tmatrix({2}, 2, 3, 102);
  const TMatrix y = random_tmatrix({2}, 2, 3, 103);
  const Eigen::MatrixXd rx = oracles::realify(direct_sum_representation(x));
  const Eigen::MatrixXd ry = oracles::realify(direct_sum_representation(y));
  const double via_blocks = 0.5 * (rx.transpose() * ry).trace();
  CHECK(real_inner_product(x, y) == Catch::Approx(via_blocks).margin(1e-10));
}

TEST_CASE("direct-sum representation", "[tsvd]") {
  const TMatrix id = TMatrix::identity({2, 2}, 3);
  const Eigen::MatrixXcd rep = direct_sum_representation(id);
  CHECK((rep - Eigen::MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() <
        1e-10);

  const TMatrix x = random_tmatrix({2, 3}, 3, 4, 110);
  const Eigen::MatrixXcd rx = direct_sum_representation(x);
  CHECK(oracles::rank_dense(rx) == trace_rank(x));
  CHECK(oracles::nuclear_norm_dense(rx) ==
        Catch::Approx(real_schatten(x, 1.0)).margin(1e-8));

  // products map to dense products of representations
  const TMatrix y = random_tmatrix({2, 3}, 4, 2, 111);
  const Eigen::MatrixXcd lhs = direct_sum_representation(tmat_mul(x, y));
  const Eigen::MatrixXcd rhs = rx * direct_sum_representation(y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);

  CHECK_THROWS_AS(direct_sum_representation(TMatrix::zeros({513}, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("binary container round trips and the dump writes sigma CSV",
          "[tsvd]") {
  const TMatrix x = random_tmatrix({2, 3}, 3, 2, 120);
  const std::string path = "test_roundtrip.tmat";
  tmat::write_tmatrix(path, x);
  const TMatrix back = tmat::read_tmatrix(path);
  CHECK(back.scalar_order() == x.scalar_order());
  CHECK(max_abs_diff(back.body(), x.body()) == 0.0);
  std::remove(path.c_str());

  const auto f = tsvd(random_real_tmatrix({2, 2}, 3, 3, 121));
  tmat::dump_tsvd(f, "test_dump");
  std::ifstream csv("test_dump_sigma.csv");
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  CHECK(header == "slice,d,sigma");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 4 * 3);  // K = 4 slices, D = 3 values each
  csv.close();
  const TMatrix u_back = tmat::read_tmatrix("test_dump_u.tmat");
  CHECK(max_abs_diff(u_back.body(), f.u.body()) == 0.0);
  for (const char* p : {"test_dump_u.tmat", "test_dump_s.tmat",
                        "test_dump_v.tmat", "test_dump_sigma.csv"})
    std::remove(p);
}
