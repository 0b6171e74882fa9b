#include "icls/kernels.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>


namespace icls::kernels {

namespace {

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

std::size_t chunk_count(std::size_t n) { return (n + kReduceChunk - 1) / kReduceChunk; }

double chunk_dot(std::span<const double> a, std::span<const double> b, std::size_t c) {
  const std::size_t lo = c * kReduceChunk;
  const std::size_t hi = std::min(a.size(), lo + kReduceChunk);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CsrMatrix::CsrMatrix(const Eigen::SparseMatrix<double>& m)
    : rows_(static_cast<std::size_t>(m.rows())), cols_(static_cast<std::size_t>(m.cols())) {
  Eigen::SparseMatrix<double, Eigen::RowMajor> r = m;
  r.makeCompressed();
  row_ptr_.assign(r.outerIndexPtr(), r.outerIndexPtr() + r.rows() + 1);
  col_idx_.assign(r.innerIndexPtr(), r.innerIndexPtr() + r.nonZeros());
  values_.assign(r.valuePtr(), r.valuePtr() + r.nonZeros());
}

namespace serial {

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  require_same(x.size(), y.size(), "xpby");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  require_same(a.cols, x.size(), "spmv");
  require_same(a.rows, y.size(), "spmv");
  for (std::size_t r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += a.values[k] * x[a.col_idx[k]];
    y[r] = s;
  }
}

}  // namespace serial

namespace parallel {

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  const auto chunks = static_cast<std::ptrdiff_t>(chunk_count(a.size()));
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c)
    partial[static_cast<std::size_t>(c)] = chunk_dot(a, b, static_cast<std::size_t>(c));
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  require_same(x.size(), y.size(), "xpby");
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  require_same(a.cols, x.size(), "spmv");
  require_same(a.rows, y.size(), "spmv");
  const auto rows = static_cast<std::ptrdiff_t>(a.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (int k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += a.values[k] * x[a.col_idx[k]];
    y[r] = s;
  }
}

}  // namespace parallel

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() >= kParallelThreshold) return parallel::dot(a, b);
  require_same(a.size(), b.size(), "dot");
  // same chunked summation order as parallel::dot
  double s = 0.0;
  const std::size_t chunks = chunk_count(a.size());
  for (std::size_t c = 0; c < chunks; ++c) s += chunk_dot(a, b, c);
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() >= kParallelThreshold) return parallel::axpy(alpha, x, y);
  serial::axpy(alpha, x, y);
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  if (x.size() >= kParallelThreshold) return parallel::xpby(x, beta, y);
  serial::xpby(x, beta, y);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  if (a.values.size() >= kParallelThreshold) return parallel::spmv(a, x, y);
  serial::spmv(a, x, y);
}

}  // namespace icls::kernels
