#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "subnewton/linops.hpp"
#include "subnewton/problem.hpp"

namespace subnewton {

/// Raised when an iteration produces NaN or Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LinearOperator = std::function<Vector(std::span<const double>)>;

struct CgResult {
  Vector solution;
  std::size_t iters_used = 0;
  std::vector<double> residual_norms;  // entry 0 is ||b||
  bool converged = false;
  bool breakdown = false;  // curvature guard fired
};

/// Conjugate gradient on A x = b from x = 0. Stops at the first iterate with
/// ||r|| <= zeta ||b|| or after max_iters operator applications.
CgResult cg(const LinearOperator& apply_a, std::span<const double> b, std::size_t max_iters,
            double zeta);

/// Stochastic gradient iteration on the quadratic model at w:
///   p <- p - alpha (H_i p + g),  p0 = -g,
/// with i drawn uniformly (with replacement) each step. Charges m_sgi
/// component Hessian-vector products.
Vector sgi(const LogisticModel& model, std::span<const double> w, std::span<const double> g,
           std::size_t m_sgi, double alpha, std::uint64_t seed, OracleCounter* counter = nullptr);

}  // namespace subnewton
