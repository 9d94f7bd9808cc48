#include "subnewton/linops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace subnewton {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  require(entries_.size() == rows_ * cols_, "DenseMatrix: entries.size() != rows*cols");
  require(all_finite(entries_), "DenseMatrix: non-finite entry");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
  DenseMatrix a(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) a(i, i) = diag[i];
  return a;
}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> e;
  e.reserve(r * c);
  for (const auto& row : rows) {
    require(row.size() == c, "DenseMatrix::from_rows: ragged rows");
    e.insert(e.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(e));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
  require(row_offsets_.size() == rows_ + 1, "CsrMatrix: row_offsets must have rows+1 entries");
  require(row_offsets_.front() == 0, "CsrMatrix: row_offsets[0] != 0");
  require(row_offsets_.back() == values_.size(), "CsrMatrix: row_offsets[rows] != nnz");
  require(col_indices_.size() == values_.size(), "CsrMatrix: col_indices/values size mismatch");
  for (std::size_t i = 0; i < rows_; ++i) {
    require(row_offsets_[i] <= row_offsets_[i + 1], "CsrMatrix: row_offsets decreasing");
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      require(col_indices_[k] < cols_, "CsrMatrix: column index out of range");
      if (k > row_offsets_[i])
        require(col_indices_[k - 1] < col_indices_[k],
                "CsrMatrix: column indices not strictly increasing");
    }
  }
  require(all_finite(values_), "CsrMatrix: non-finite value");
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& a) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) {
        cols.push_back(j);
        vals.push_back(a(i, j));
      }
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix a(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      a(i, col_indices_[k]) = values_[k];
  return a;
}

CsrMatrix CsrMatrix::transposed() const {
  std::vector<std::size_t> counts(cols_ + 1, 0);
  for (std::size_t c : col_indices_) ++counts[c + 1];
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<std::size_t> cols(values_.size());
  std::vector<double> vals(values_.size());
  std::vector<std::size_t> next(counts.begin(), counts.end() - 1);
  // Rows are visited in order, so the transposed column indices come out sorted.
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const std::size_t dst = next[col_indices_[k]]++;
      cols[dst] = i;
      vals[dst] = values_[k];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(counts), std::move(cols), std::move(vals));
}

std::size_t rows(const FeatureMatrix& a) {
  return std::visit([](const auto& m) { return m.rows(); }, a);
}

std::size_t cols(const FeatureMatrix& a) {
  return std::visit([](const auto& m) { return m.cols(); }, a);
}

DenseMatrix to_dense(const FeatureMatrix& a) {
  if (const auto* d = std::get_if<DenseMatrix>(&a)) return *d;
  return std::get<CsrMatrix>(a).to_dense();
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec(const CsrMatrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), "matvec: dimension mismatch");
  Vector y(a.rows(), 0.0);
  const auto& off = a.row_offsets();
  const auto& ci = a.col_indices();
  const auto& v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) s += v[k] * x[ci[k]];
    y[i] = s;
  }
  return y;
}

Vector matvec(const FeatureMatrix& a, std::span<const double> x) {
  return std::visit([&](const auto& m) { return matvec(m, x); }, a);
}

Vector matvec_t(const DenseMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_t: dimension mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(x[i], a.row(i), y);
  return y;
}

Vector matvec_t(const CsrMatrix& a, std::span<const double> x) {
  require(a.rows() == x.size(), "matvec_t: dimension mismatch");
  Vector y(a.cols(), 0.0);
  const auto& off = a.row_offsets();
  const auto& ci = a.col_indices();
  const auto& v = a.values();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) y[ci[k]] += v[k] * x[i];
  return y;
}

Vector matvec_t(const FeatureMatrix& a, std::span<const double> x) {
  return std::visit([&](const auto& m) { return matvec_t(m, x); }, a);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(a(i, k), b.row(k), c.row(i));
  return c;
}

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix g(a.cols(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto row = a.row(r);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      if (row[i] == 0.0) continue;
      for (std::size_t j = i; j < a.cols(); ++j) g(i, j) += row[i] * row[j];
    }
  }
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (double& v : x) v *= alpha;
}

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double spectral_norm(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  const Vector ev = sym_eigvals(gram(a));
  return std::sqrt(std::max(0.0, ev.back()));
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.entries()); }

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fwht_inplace(std::span<double> x) {
  const std::size_t len = x.size();
  if (!is_power_of_two(len))
    throw std::invalid_argument("fwht: length " + std::to_string(len) + " is not a power of two");
  for (std::size_t h = 1; h < len; h *= 2) {
    for (std::size_t i = 0; i < len; i += h * 2) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = x[j];
        const double b = x[j + h];
        x[j] = a + b;
        x[j + h] = a - b;
      }
    }
  }
  scale(1.0 / std::sqrt(static_cast<double>(len)), x);
}

Vector fwht(std::span<const double> x) {
  Vector y(x.begin(), x.end());
  fwht_inplace(y);
  return y;
}

EigenDecomposition sym_eig(const DenseMatrix& input) {
  const std::size_t n = input.rows();
  require(input.cols() == n, "sym_eig: matrix is not square");
  double scale_ref = 0.0;
  for (double v : input.entries()) scale_ref = std::max(scale_ref, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(input(i, j) - input(j, i)) > 1e-10 * std::max(scale_ref, 1e-300))
        throw std::invalid_argument("sym_eig: matrix is not symmetric");

  DenseMatrix a = input;
  // Symmetrize exactly so rotations act on a truly symmetric matrix.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (a(i, j) + a(j, i));
  DenseMatrix v = DenseMatrix::identity(n);

  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a(i, i) * a(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (off <= 1e-30 * diag || off == 0.0) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that would not change the diagonal in floating point.
        if (std::abs(apq) < 1e-300 ||
            (sweep > 3 && std::abs(apq) * 1e18 < std::abs(app) && std::abs(apq) * 1e18 < std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  EigenDecomposition out{Vector(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

Vector sym_eigvals(const DenseMatrix& a) { return sym_eig(a).values; }

}  // namespace subnewton
