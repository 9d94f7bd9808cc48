#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "subnewton/linops.hpp"
#include "subnewton/problem.hpp"

namespace subnewton {

struct SsnCg {
  std::size_t T = 1;
  std::size_t max_cg = 10;
  double zeta = 1e-2;
};

struct NewtonSketch {
  std::size_t m_ns = 1;
  std::size_t max_cg = 10;
  double zeta = 1e-2;
};

struct SsnSgi {
  std::size_t m_sgi = 1;
  double alpha_inner = 1.0;
};

struct Svrg {
  double alpha = 1.0;
  std::size_t m_svrg = 1;
};

using MethodVariant = std::variant<SsnCg, NewtonSketch, SsnSgi, Svrg>;

/// "ssn-cg", "newton-sketch", "ssn-sgi" or "svrg".
std::string method_name(const MethodVariant& v);

struct LineSearchConfig {
  double c1 = 1e-4;
  double rho = 0.5;
  std::size_t max_backtracks = 50;
};

struct MethodConfig {
  MethodVariant variant = SsnCg{};
  std::size_t max_outer = 100;
  double grad_tol = 1e-10;
  std::uint64_t seed = 0;
  LineSearchConfig line_search;
  /// Take alpha = 1 without a line search (local-convergence experiments).
  bool unit_step = false;
  /// Stop once cumulative effective gradient evaluations reach this.
  double max_ege = std::numeric_limits<double>::infinity();
  /// Stop once F(w) - F* <= target_error (disabled when <= 0).
  double target_error = 0.0;

  /// Throws std::invalid_argument on zero counts, zeta outside (0,1) or alpha <= 0.
  void validate() const;
};

class LineSearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmijoResult {
  double alpha = 0.0;
  double f_new = 0.0;
  std::size_t trials = 0;  // function evaluations, each n units
};

/// Largest alpha in {1, rho, rho^2, ...} with F(w + alpha p) <= F(w) + c1 alpha <g, p>.
/// Throws LineSearchError if <g, p> >= 0 or max_backtracks is exceeded.
ArmijoResult armijo(const LogisticModel& model, std::span<const double> w, std::span<const double> p,
                    std::span<const double> g, double f_w, const LineSearchConfig& cfg,
                    OracleCounter* counter = nullptr);

enum class RunStatus {
  GradTolReached,
  TargetReached,
  MaxIterations,
  BudgetExhausted,
  Diverged,
  LineSearchFailed,
};

std::string to_string(RunStatus s);
/// Failed runs are excluded from grid selection.
bool is_failure(RunStatus s);

struct TraceRow {
  std::size_t iter = 0;
  std::uint64_t cum_units = 0;  // component-level oracle calls
  double cum_ege = 0.0;         // cum_units / n
  double objective = 0.0;       // F(w)
  double train_error = 0.0;     // F(w) - F*
  double test_loss = 0.0;       // NaN when no test set
  double step_len = 0.0;
  std::size_t inner_iters = 0;  // CG iterations, SGI steps or SVRG inner steps
  std::size_t ls_evals = 0;     // line-search function evaluations
  double wall_ms = 0.0;         // cumulative
};

struct RunTrace {
  std::string method;
  std::size_t n = 0;
  double f_star = 0.0;
  std::vector<TraceRow> rows;  // rows[0] is the starting point
  RunStatus status = RunStatus::MaxIterations;
  std::string message;
  std::optional<std::size_t> failed_iter;
  Vector w_final;
};

/// Values used only for reporting; never charged to the oracle counter.
struct Reporting {
  double f_star = 0.0;
  const Dataset* test = nullptr;
};

RunTrace run_ssn_cg(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                    const Reporting& rep = {});
RunTrace run_newton_sketch(const LogisticModel& model, std::span<const double> w0,
                           const MethodConfig& cfg, const Reporting& rep = {});
RunTrace run_ssn_sgi(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                     const Reporting& rep = {});
RunTrace run_svrg(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                  const Reporting& rep = {});
/// Dispatches on cfg.variant.
RunTrace run_method(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                    const Reporting& rep = {});

/// Closed-form oracle units charged for one outer iteration (or SVRG cycle).
std::uint64_t predicted_units(const MethodVariant& v, std::size_t n, std::size_t inner_iters,
                              std::size_t ls_evals);

struct ReferenceSolution {
  Vector w_star;
  double f_star = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  std::vector<Vector> iterates;  // w0, w1, ...
};

/// Newton-CG with the full Hessian, CG to zeta = 1e-14 and Armijo steps,
/// until ||grad F|| <= tol. Throws std::runtime_error after max_iters.
ReferenceSolution run_reference_newton(const LogisticModel& model, std::span<const double> w0,
                                       double tol = 1e-12, std::size_t max_iters = 200);

}  // namespace subnewton
