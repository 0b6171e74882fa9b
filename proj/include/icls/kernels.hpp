#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

/// Vector and sparse-matrix kernels used on the solver hot path.
///
/// Every kernel comes in two flavours: a plain serial loop (`serial::`) kept as
/// the reference implementation for tests and benchmarks, and an OpenMP
/// version (`parallel::`). Reductions in the OpenMP version sum fixed-size
/// chunks and combine the partial sums in chunk order, so the result does not
/// depend on the number of threads. The unqualified entry points dispatch to
/// `parallel::` and fall back to a single thread for short vectors.
namespace icls::kernels {

/// Chunk length for deterministic reductions.
inline constexpr std::size_t kReduceChunk = 4096;

/// Below this length the dispatching kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1 << 15;

/// Non-owning view of a CSR matrix.
struct CsrView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const int> row_ptr;
  std::span<const int> col_idx;
  std::span<const double> values;
};

/// Row-compressed matrix with owned storage.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  explicit CsrMatrix(const Eigen::SparseMatrix<double>& m);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  CsrView view() const { return {rows_, cols_, row_ptr_, col_idx_, values_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

namespace serial {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace serial

namespace parallel {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);
}  // namespace parallel

/// a . b
double dot(std::span<const double> a, std::span<const double> b);
/// y <- alpha x + y
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y <- x + beta y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// y <- A x
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);

}  // namespace icls::kernels
