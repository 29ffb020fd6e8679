#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <string>

#include "tmat/tsvd.hpp"

namespace tmat {

// Debug container for t-matrices: magic "TMATBIN1", uint64 scalar order,
// uint64 body order, the extents, then (re, im) double pairs in row-major
// body order. Native endianness; meant for desk-scale inspection and round
// trips, not interchange.

inline void write_tmatrix(const std::string& path, const TMatrix& x) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_tmatrix: cannot open " + path);
  out.write("TMATBIN1", 8);
  auto put_u64 = [&out](std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_u64(x.scalar_order());
  put_u64(x.body().ndim());
  for (std::size_t e : x.body().shape()) put_u64(e);
  for (std::size_t i = 0; i < x.body().size(); ++i) {
    const double re = x.body()[i].real();
    const double im = x.body()[i].imag();
    out.write(reinterpret_cast<const char*>(&re), 8);
    out.write(reinterpret_cast<const char*>(&im), 8);
  }
  if (!out) throw std::runtime_error("write_tmatrix: write failed for " + path);
}

inline TMatrix read_tmatrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_tmatrix: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "TMATBIN1")
    throw std::runtime_error("read_tmatrix: bad magic in " + path);
  auto get_u64 = [&in, &path]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    if (!in) throw std::runtime_error("read_tmatrix: truncated file " + path);
    return v;
  };
  const std::uint64_t scalar_order = get_u64();
  const std::uint64_t ndim = get_u64();
  std::vector<std::size_t> shape(ndim);
  for (auto& e : shape) e = get_u64();
  NdArray body(std::move(shape));
  for (std::size_t i = 0; i < body.size(); ++i) {
    double re = 0.0, im = 0.0;
    in.read(reinterpret_cast<char*>(&re), 8);
    in.read(reinterpret_cast<char*>(&im), 8);
    if (!in) throw std::runtime_error("read_tmatrix: truncated file " + path);
    body[i] = cdouble{re, im};
  }
  return TMatrix(std::move(body), scalar_order);
}

/// Write the three factors as binary containers plus a CSV of per-slice
/// singular values (columns: slice, d, sigma; slices in canonical row-major
/// multi-index order).
inline void dump_tsvd(const TSVDFactors& f, const std::string& prefix) {
  write_tmatrix(prefix + "_u.tmat", f.u);
  write_tmatrix(prefix + "_s.tmat", f.s);
  write_tmatrix(prefix + "_v.tmat", f.v);

  std::ofstream csv(prefix + "_sigma.csv");
  if (!csv) throw std::runtime_error("dump_tsvd: cannot open " + prefix +
                                     "_sigma.csv");
  csv << "slice,d,sigma\n" << std::setprecision(17);
  const SpectralSlices ss(f.s);
  for (std::size_t k = 0; k < ss.count(); ++k) {
    const auto diag = ss.slice(k).diagonal();
    for (Eigen::Index d = 0; d < diag.size(); ++d)
      csv << k << ',' << d << ',' << diag[d].real() << '\n';
  }
  if (!csv) throw std::runtime_error("dump_tsvd: write failed for " + prefix +
                                     "_sigma.csv");
}

}  // namespace tmat
