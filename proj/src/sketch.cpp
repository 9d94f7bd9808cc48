#include "subnewton/sketch.hpp"

#include <cmath>
#include <stdexcept>

#include "subnewton/rng.hpp"

namespace subnewton {

RosSketch new_sketch(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("new_sketch: n and m must be >= 1");
  RosSketch s;
  s.n = n;
  s.n_pad = next_power_of_two(n);
  s.m = m;
  s.seed = seed;
  Rng rng = Rng(seed).derive("ros");
  s.signs.resize(s.n_pad);
  for (double& v : s.signs) v = rng.rademacher();
  s.row_picks.resize(m);
  for (auto& r : s.row_picks) r = rng.uniform_index(s.n_pad);
  return s;
}

Vector apply(const RosSketch& s, std::span<const double> u) {
  if (u.size() != s.n) throw std::invalid_argument("sketch apply: dimension mismatch");
  Vector buf(s.n_pad, 0.0);
  for (std::size_t i = 0; i < s.n; ++i) buf[i] = s.signs[i] * u[i];
  fwht_inplace(buf);
  const double root = std::sqrt(static_cast<double>(s.n_pad));
  Vector out(s.m);
  for (std::size_t k = 0; k < s.m; ++k) out[k] = root * buf[s.row_picks[k]];
  return out;
}

DenseMatrix RosSketch::dense() const {
  DenseMatrix out(m, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector col = subnewton::apply(*this, e);
    for (std::size_t k = 0; k < m; ++k) out(k, j) = col[k];
    e[j] = 0.0;
  }
  return out;
}

DenseMatrix SketchedSqrt::hessian() const {
  DenseMatrix h = gram(b);
  const double inv_m = 1.0 / static_cast<double>(m());
  for (double& v : h.entries()) v *= inv_m;
  for (std::size_t i = 0; i < d(); ++i) h(i, i) += lambda;
  return h;
}

SketchedSqrt build_sketched_sqrt(const LogisticModel& model, std::span<const double> w,
                                 const RosSketch& s, std::uint64_t w_tag) {
  if (s.n != model.n()) throw std::invalid_argument("build_sketched_sqrt: sketch width != n");
  const Vector t = model.margins(w);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(model.n()));
  Vector row_scale(model.n());
  for (std::size_t i = 0; i < model.n(); ++i)
    row_scale[i] = std::sqrt(logistic_curvature(t[i])) * inv_sqrt_n;

  SketchedSqrt out{DenseMatrix(s.m, model.d()), model.lambda(), w_tag};
  for (std::size_t j = 0; j < model.d(); ++j) {
    const Vector col = subnewton::apply(s, model.scaled_column(j, row_scale));
    for (std::size_t k = 0; k < s.m; ++k) out.b(k, j) = col[k];
  }
  return out;
}

Vector sketched_hess_vec(const SketchedSqrt& b, std::span<const double> p, OracleCounter* counter) {
  if (p.size() != b.d()) throw std::invalid_argument("sketched_hess_vec: dimension mismatch");
  const Vector v1 = matvec(b.b, p);
  Vector v = matvec_t(b.b, v1);
  scale(1.0 / static_cast<double>(b.m()), v);
  axpy(b.lambda, p, v);
  if (counter) counter->component_hvs += 2 * b.m();
  return v;
}

DenseMatrix gaussian_sketch(std::size_t n, std::size_t m, std::uint64_t seed) {
  Rng rng = Rng(seed).derive("gaussian-sketch");
  DenseMatrix s(m, n);
  for (double& v : s.entries()) v = rng.normal();
  return s;
}

}  // namespace subnewton
