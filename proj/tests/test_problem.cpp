#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "subnewton/problem.hpp"
#include "test_support.hpp"

using namespace subnewton;
using testsupport::max_abs_diff;
using testsupport::rel_err;

namespace {

Dataset single(double x, int y) {
  Dataset ds;
  ds.features = DenseMatrix::from_rows({{x}});
  ds.labels = {y};
  return ds;
}

Vector fd_gradient(const LogisticModel& m, const Vector& w, double h) {
  Vector g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    Vector wp = w, wm = w;
    wp[j] += h;
    wm[j] -= h;
    g[j] = (m.value(wp) - m.value(wm)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("value at zero is log 2 for any data and lambda") {
  for (bool sparse : {false, true}) {
    const LogisticModel m(testsupport::random_dataset(37, 6, 1, sparse), 0.3);
    CHECK(m.value(Vector(6, 0.0)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("single example value is the logistic loss") {
  const LogisticModel m(single(1.0, 1), 0.0);
  for (double t : {-30.0, -1.0, 0.0, 0.7, 5.0, 40.0})
    CHECK(m.value(Vector{t}) == doctest::Approx(std::log1p(std::exp(-t))).epsilon(1e-14));
  CHECK(std::isfinite(logistic_loss(-800.0)));
  CHECK(logistic_loss(-800.0) == doctest::Approx(800.0));
}

TEST_CASE("value matches a naive unfused sum") {
  const Dataset ds = testsupport::random_dataset(50, 5, 2);
  const double lambda = 0.05;
  const LogisticModel m(ds, lambda);
  Rng rng(3);
  const Vector w = testsupport::random_vector(5, rng);
  const DenseMatrix x = to_dense(ds.features);
  double s = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    double t = 0.0;
    for (std::size_t j = 0; j < 5; ++j) t += x(i, j) * w[j];
    s += std::log(1.0 + std::exp(-ds.labels[i] * t));
  }
  double ww = 0.0;
  for (double v : w) ww += v * v;
  CHECK(std::abs(m.value(w) - (s / 50 + 0.5 * lambda * ww)) <= 1e-12);
}

TEST_CASE("gradient at zero") {
  const Dataset ds = testsupport::random_dataset(20, 4, 4);
  const LogisticModel m(ds, 0.0);
  const Vector g = m.gradient(Vector(4, 0.0));
  Vector y(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = ds.labels[i];
  Vector expect = matvec_t(ds.features, y);
  scale(-1.0 / 40.0, expect);
  CHECK(max_abs_diff(g, expect) <= 1e-15);

  Dataset e1;
  e1.features = DenseMatrix::from_rows({{1, 0, 0}, {1, 0, 0}, {1, 0, 0}});
  e1.labels = {1, 1, 1};
  CHECK(LogisticModel(e1, 0.0).gradient(Vector(3, 0.0)) == Vector{-0.5, 0.0, 0.0});
}

TEST_CASE("gradient matches central finite differences") {
  for (bool sparse : {false, true}) {
    const LogisticModel m(testsupport::random_dataset(40, 8, 5, sparse), 0.01);
    Rng rng(6);
    const Vector w = testsupport::random_vector(8, rng);
    CHECK(rel_err(m.gradient(w), fd_gradient(m, w, 1e-6)) <= 1e-6);
  }
}

TEST_CASE("component gradients average to the full gradient") {
  const LogisticModel m(testsupport::random_dataset(30, 5, 7), 0.2);
  Rng rng(8);
  const Vector w = testsupport::random_vector(5, rng);
  Vector avg(5, 0.0);
  OracleCounter c;
  for (std::size_t i = 0; i < 30; ++i) axpy(1.0 / 30, m.component_gradient(i, w, &c), avg);
  CHECK(max_abs_diff(avg, m.gradient(w)) <= 1e-14);
  CHECK(c.component_grads == 30);
}

TEST_CASE("curvature weights") {
  const LogisticModel m(testsupport::random_dataset(25, 3, 9), 0.0);
  const auto idx = m.all_indices();
  for (double v : m.diag_weights(Vector(3, 0.0), idx)) CHECK(v == 0.25);

  double prev = logistic_curvature(0.0);
  for (double t = 1.0; t < 60.0; t += 1.0) {
    const double now = logistic_curvature(t);
    CHECK(now < prev);
    CHECK(logistic_curvature(-t) == doctest::Approx(now));
    prev = now;
  }
  CHECK(logistic_curvature(1e4) > 0.0);

  Rng rng(10);
  const Vector w = testsupport::random_vector(3, rng);
  const Vector t = m.margins(w);
  const Vector dw = m.diag_weights(w, idx);
  const double h = 1e-4;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double second = (logistic_loss(t[i] + h) - 2 * logistic_loss(t[i]) + logistic_loss(t[i] - h)) / (h * h);
    CHECK(std::abs(dw[i] - second) <= 1e-6);
  }
}

TEST_CASE("Hessian-vector products") {
  const LogisticModel m(testsupport::random_dataset(40, 8, 11), 0.03);
  Rng rng(12);
  const Vector w = testsupport::random_vector(8, rng);
  CHECK(m.hess_vec(w, Vector(8, 0.0)) == Vector(8, 0.0));

  Dataset zero;
  zero.features = DenseMatrix(5, 3);
  zero.labels = {1, -1, 1, 1, -1};
  const Vector v{1, -2, 3};
  const LogisticModel reg(zero, 1e3);
  CHECK(max_abs_diff(reg.hess_vec(Vector(3, 0.0), v), Vector{1e3, -2e3, 3e3}) <= 1e-12);

  const Vector dir = testsupport::random_vector(8, rng);
  const double h = 1e-5;
  Vector wp = w, wm = w;
  axpy(h, dir, wp);
  axpy(-h, dir, wm);
  Vector fd = m.gradient(wp);
  axpy(-1.0, m.gradient(wm), fd);
  scale(1.0 / (2 * h), fd);
  CHECK(rel_err(m.hess_vec(w, dir), fd) <= 1e-5);

  // Subset product against the dense definition.
  const std::vector<std::size_t> sub{1, 4, 9, 22, 39};
  const DenseMatrix x = to_dense(m.data().features);
  const Vector t = m.margins(w);
  Vector expect(8, 0.0);
  for (std::size_t i : sub) {
    const double c = logistic_curvature(t[i]) * dot(x.row(i), dir) / sub.size();
    axpy(c, x.row(i), expect);
  }
  axpy(m.lambda(), dir, expect);
  OracleCounter counter;
  CHECK(max_abs_diff(m.hess_vec(w, dir, sub, &counter), expect) <= 1e-14);
  CHECK(counter.component_hvs == sub.size());

  const SubsampledHessian sh = m.subsampled_hessian(w, sub);
  CHECK(max_abs_diff(matvec(sh.dense(), dir), expect) <= 1e-13);
}

TEST_CASE("square-root Hessian factors") {
  for (bool sparse : {false, true}) {
    const Dataset ds = testsupport::random_dataset(40, 6, 13, sparse);
    const LogisticModel m(ds, 0.1);
    Rng rng(14);
    CHECK(m.sqrt_hess_apply(Vector(6, 0.0), Vector(6, 0.0)) == Vector(40, 0.0));

    const Vector u = testsupport::random_vector(6, rng);
    Vector at_zero = matvec(ds.features, u);
    scale(1.0 / (2 * std::sqrt(40.0)), at_zero);
    CHECK(max_abs_diff(m.sqrt_hess_apply(Vector(6, 0.0), u), at_zero) <= 1e-14);

    const Vector w = testsupport::random_vector(6, rng);
    Vector comp = m.sqrt_hess_apply_t(w, m.sqrt_hess_apply(w, u));
    axpy(m.lambda(), u, comp);
    CHECK(max_abs_diff(comp, m.hess_vec(w, u)) <= 1e-12);

    const Vector d = m.diag_weights(w, m.all_indices());
    Vector rs(40);
    for (std::size_t i = 0; i < 40; ++i) rs[i] = std::sqrt(d[i]);
    const DenseMatrix x = to_dense(ds.features);
    for (std::size_t j = 0; j < 6; ++j) {
      const Vector col = m.scaled_column(j, rs);
      for (std::size_t i = 0; i < 40; ++i) CHECK(col[i] == doctest::Approx(rs[i] * x(i, j)));
    }
  }
}

TEST_CASE("oracle accounting and argument checks") {
  const LogisticModel m(testsupport::random_dataset(12, 3, 15), 0.1);
  OracleCounter c;
  m.value(Vector(3, 0.0), &c);
  m.gradient(Vector(3, 0.0), &c);
  CHECK(c.component_fn_evals == 12);
  CHECK(c.component_grads == 12);
  CHECK(c.units() == 24);
  CHECK(c.effective_gradient_evals(12) == 2.0);
  CHECK_THROWS_AS(m.value(Vector(2, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(LogisticModel(testsupport::random_dataset(5, 2, 1), -1.0), std::invalid_argument);
  CHECK(LogisticModel(testsupport::random_dataset(8, 2, 1)).lambda() == 0.125);
}

TEST_CASE("test loss is the unregularized mean loss") {
  const Dataset ds = testsupport::random_dataset(30, 4, 16);
  Rng rng(17);
  const Vector w = testsupport::random_vector(4, rng);
  CHECK(mean_logistic_loss(ds, w) == doctest::Approx(LogisticModel(ds, 0.0).value(w)).epsilon(1e-14));
}
