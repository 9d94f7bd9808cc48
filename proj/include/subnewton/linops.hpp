#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace subnewton {

using Vector = std::vector<double>;

/// Row-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);
  /// Builds from nested rows; every row must have the same length.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {entries_.data() + i * cols_, cols_}; }

  const std::vector<double>& entries() const { return entries_; }
  std::vector<double>& entries() { return entries_; }

  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_{0} {}
  CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
            std::vector<std::size_t> col_indices, std::vector<double> values);

  static CsrMatrix from_dense(const DenseMatrix& a);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  DenseMatrix to_dense() const;
  CsrMatrix transposed() const;

  bool operator==(const CsrMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

/// Feature storage used by datasets: either dense or CSR.
using FeatureMatrix = std::variant<DenseMatrix, CsrMatrix>;

std::size_t rows(const FeatureMatrix& a);
std::size_t cols(const FeatureMatrix& a);
DenseMatrix to_dense(const FeatureMatrix& a);

Vector matvec(const DenseMatrix& a, std::span<const double> x);
Vector matvec(const CsrMatrix& a, std::span<const double> x);
Vector matvec(const FeatureMatrix& a, std::span<const double> x);

Vector matvec_t(const DenseMatrix& a, std::span<const double> x);
Vector matvec_t(const CsrMatrix& a, std::span<const double> x);
Vector matvec_t(const FeatureMatrix& a, std::span<const double> x);

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀa
DenseMatrix gram(const DenseMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
bool all_finite(std::span<const double> x);

/// Largest singular value via the symmetric eigensolver (small matrices).
double spectral_norm(const DenseMatrix& a);
double frobenius_norm(const DenseMatrix& a);

bool is_power_of_two(std::size_t n);
std::size_t next_power_of_two(std::size_t n);

/// In-place orthonormal Walsh-Hadamard transform (butterfly then 1/sqrt(len)).
void fwht_inplace(std::span<double> x);
Vector fwht(std::span<const double> x);

struct EigenDecomposition {
  Vector values;        // ascending
  DenseMatrix vectors;  // column i is the eigenvector for values[i]
};

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
EigenDecomposition sym_eig(const DenseMatrix& a);
/// Eigenvalues only, ascending.
Vector sym_eigvals(const DenseMatrix& a);

}  // namespace subnewton
