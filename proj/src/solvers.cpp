#include "subnewton/solvers.hpp"

#include <cmath>
#include <string>

#include "subnewton/rng.hpp"

namespace subnewton {

CgResult cg(const LinearOperator& apply_a, std::span<const double> b, std::size_t max_iters,
            double zeta) {
  if (!(zeta > 0.0 && zeta < 1.0)) throw std::invalid_argument("cg: zeta must lie in (0,1)");
  if (!all_finite(b)) throw NumericalError("cg: non-finite right-hand side");

  CgResult res;
  res.solution.assign(b.size(), 0.0);
  Vector r(b.begin(), b.end());
  Vector p = r;
  double rr = dot(r, r);
  const double b_norm = std::sqrt(rr);
  const double target = zeta * b_norm;
  res.residual_norms.push_back(b_norm);
  if (b_norm <= target) {
    res.converged = true;
    return res;
  }

  while (res.iters_used < max_iters) {
    const Vector q = apply_a(p);
    const double pq = dot(p, q);
    if (!std::isfinite(pq)) throw NumericalError("cg: non-finite operator output");
    if (pq <= 1e-16 * dot(p, p)) {
      res.breakdown = true;
      break;
    }
    const double alpha = rr / pq;
    axpy(alpha, p, res.solution);
    axpy(-alpha, q, r);
    ++res.iters_used;
    const double rr_new = dot(r, r);
    if (!std::isfinite(rr_new)) throw NumericalError("cg: non-finite residual");
    res.residual_norms.push_back(std::sqrt(rr_new));
    if (std::sqrt(rr_new) <= target) {
      res.converged = true;
      break;
    }
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
  }
  return res;
}

Vector sgi(const LogisticModel& model, std::span<const double> w, std::span<const double> g,
           std::size_t m_sgi, double alpha, std::uint64_t seed, OracleCounter* counter) {
  if (!(alpha > 0.0)) throw std::invalid_argument("sgi: alpha must be > 0");
  if (g.size() != model.d() || w.size() != model.d())
    throw std::invalid_argument("sgi: dimension mismatch");

  Rng rng = Rng(seed).derive("sgi");
  Vector p(g.begin(), g.end());
  scale(-1.0, p);
  const double lambda = model.lambda();
  for (std::size_t t = 0; t < m_sgi; ++t) {
    const std::size_t i = rng.uniform_index(model.n());
    const double weight = logistic_curvature(model.row_dot(i, w));
    const double xp = model.row_dot(i, p);
    // p <- (1 - alpha lambda) p - alpha d_i (x_i . p) x_i - alpha g
    scale(1.0 - alpha * lambda, p);
    model.row_axpy(i, -alpha * weight * xp, p);
    axpy(-alpha, g, p);
    if (counter) counter->component_hvs += 1;
    if (!all_finite(p))
      throw NumericalError("sgi: non-finite iterate at inner step " + std::to_string(t));
  }
  return p;
}

}  // namespace subnewton
