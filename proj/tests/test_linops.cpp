#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "subnewton/linops.hpp"
#include "test_support.hpp"

using namespace subnewton;
using testsupport::max_abs_diff;

TEST_CASE("matvec on hand-computable matrices") {
  const Vector x{1, 2, 3};
  CHECK(matvec(DenseMatrix::identity(3), x) == x);
  const DenseMatrix a = DenseMatrix::from_rows({{1, 2}, {3, 4}});
  CHECK(matvec(a, Vector{1, 1}) == Vector{3, 7});
  CHECK(matvec_t(DenseMatrix::identity(3), x) == x);
  CHECK(matvec_t(a, Vector{1, 1}) == Vector{4, 6});
}

TEST_CASE("CSR and dense products agree") {
  Rng rng(11);
  DenseMatrix a = testsupport::random_matrix(20, 7, rng);
  for (double& v : a.entries())
    if (rng.uniform() < 0.6) v = 0.0;
  const CsrMatrix s = CsrMatrix::from_dense(a);
  CHECK(s.to_dense() == a);
  const Vector x = testsupport::random_vector(7, rng);
  CHECK(max_abs_diff(matvec(s, x), matvec(a, x)) <= 1e-14);
  const Vector z = testsupport::random_vector(20, rng);
  CHECK(max_abs_diff(matvec_t(s, z), matvec_t(a, z)) <= 1e-14);
  CHECK(s.transposed().to_dense() == a.transposed());
  const FeatureMatrix fm = s;
  CHECK(rows(fm) == 20);
  CHECK(cols(fm) == 7);
  CHECK(max_abs_diff(matvec(fm, x), matvec(a, x)) <= 1e-14);
}

TEST_CASE("transpose-product matches the explicit Gram matrix") {
  Rng rng(12);
  const DenseMatrix a = testsupport::random_matrix(10, 4, rng);
  const Vector x = testsupport::random_vector(4, rng);
  const Vector lhs = matvec_t(a, matvec(a, x));
  const Vector rhs = matvec(gram(a), x);
  CHECK(max_abs_diff(lhs, rhs) <= 1e-13);
  CHECK(max_abs_diff(gram(a).entries(), matmul(a.transposed(), a).entries()) <= 1e-13);
}

TEST_CASE("dimension mismatches are rejected") {
  const DenseMatrix a(3, 2);
  CHECK_THROWS_AS(matvec(a, Vector{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(matvec_t(a, Vector{1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 1}, {0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(CsrMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("orthonormal Walsh-Hadamard transform") {
  const Vector y = fwht(Vector{1, 1});
  CHECK(y[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::abs(y[1]) <= 1e-15);

  Rng rng(13);
  const Vector x = testsupport::random_vector(64, rng);
  CHECK(max_abs_diff(fwht(fwht(x)), x) <= 1e-12);

  const Vector x8 = testsupport::random_vector(8, rng);
  CHECK(std::abs(norm2(fwht(x8)) - norm2(x8)) <= 1e-12);

  // Against the Sylvester construction H_{2k} = [[H, H], [H, -H]] / sqrt(2).
  DenseMatrix h = DenseMatrix::identity(1);
  while (h.rows() < 16) {
    const std::size_t k = h.rows();
    DenseMatrix next(2 * k, 2 * k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) {
        const double v = h(i, j) / std::sqrt(2.0);
        next(i, j) = v;
        next(i, j + k) = v;
        next(i + k, j) = v;
        next(i + k, j + k) = -v;
      }
    h = next;
  }
  const Vector x16 = testsupport::random_vector(16, rng);
  CHECK(max_abs_diff(fwht(x16), matvec(h, x16)) <= 1e-13);

  Vector bad(6, 1.0);
  CHECK_THROWS_AS(fwht_inplace(bad), std::invalid_argument);
  CHECK(next_power_of_two(33) == 64);
  CHECK(next_power_of_two(32) == 32);
  CHECK(is_power_of_two(1));
  CHECK_FALSE(is_power_of_two(12));
}

TEST_CASE("symmetric eigendecomposition") {
  CHECK(sym_eigvals(DenseMatrix::identity(4)) == Vector{1, 1, 1, 1});
  const Vector ev = sym_eigvals(DenseMatrix::diagonal(Vector{3, 1, 2}));
  CHECK(max_abs_diff(ev, Vector{1, 2, 3}) <= 1e-14);

  Rng rng(14);
  DenseMatrix g = testsupport::random_matrix(12, 12, rng);
  DenseMatrix a(12, 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) a(i, j) = g(i, j) + g(j, i);
  const EigenDecomposition e = sym_eig(a);
  for (std::size_t k = 1; k < 12; ++k) CHECK(e.values[k - 1] <= e.values[k]);
  DenseMatrix rec(12, 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j)
      for (std::size_t k = 0; k < 12; ++k) rec(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
  CHECK(max_abs_diff(rec.entries(), a.entries()) <= 1e-9);
  // Residual ||A v - l v|| per pair.
  for (std::size_t k = 0; k < 12; ++k) {
    Vector v(12);
    for (std::size_t i = 0; i < 12; ++i) v[i] = e.vectors(i, k);
    Vector av = matvec(a, v);
    axpy(-e.values[k], v, av);
    CHECK(norm2(av) <= 1e-8);
  }
  DenseMatrix asym = DenseMatrix::from_rows({{1, 2}, {0, 1}});
  CHECK_THROWS_AS(sym_eig(asym), std::invalid_argument);
}

TEST_CASE("spectral and Frobenius norms") {
  const DenseMatrix a = DenseMatrix::diagonal(Vector{-3, 2, 1});
  CHECK(spectral_norm(a) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(14.0)).epsilon(1e-14));
  CHECK(all_finite(Vector{1, 2}));
  CHECK_FALSE(all_finite(Vector{1, std::nan("")}));
}
