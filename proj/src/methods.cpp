#include "subnewton/methods.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "subnewton/rng.hpp"
#include "subnewton/sketch.hpp"
#include "subnewton/solvers.hpp"

namespace subnewton {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Direction {
  Vector p;
  std::size_t inner_iters = 0;
};

using DirectionFn =
    std::function<Direction(std::size_t k, std::span<const double> w, std::span<const double> g,
                            OracleCounter& counter)>;

TraceRow make_row(const LogisticModel& model, const Reporting& rep, std::span<const double> w,
                  double f, std::size_t iter, const OracleCounter& counter, double wall_ms) {
  TraceRow row;
  row.iter = iter;
  row.cum_units = counter.units();
  row.cum_ege = counter.effective_gradient_evals(model.n());
  row.objective = f;
  row.train_error = f - rep.f_star;
  row.test_loss = rep.test ? mean_logistic_loss(*rep.test, w)
                           : std::numeric_limits<double>::quiet_NaN();
  row.wall_ms = wall_ms;
  return row;
}

bool should_stop_after_row(const MethodConfig& cfg, const TraceRow& row, RunTrace& trace) {
  if (cfg.target_error > 0.0 && row.train_error <= cfg.target_error) {
    trace.status = RunStatus::TargetReached;
    return true;
  }
  if (row.cum_ege >= cfg.max_ege) {
    trace.status = RunStatus::BudgetExhausted;
    return true;
  }
  return false;
}

// Shared outer loop of the Newton-type methods: full gradient, direction,
// Armijo (or unit) step.
RunTrace newton_type_loop(const std::string& name, const LogisticModel& model,
                          std::span<const double> w0, const MethodConfig& cfg,
                          const Reporting& rep, const DirectionFn& direction) {
  cfg.validate();
  if (w0.size() != model.d()) throw std::invalid_argument(name + ": w0 has wrong length");
  const auto start = Clock::now();
  RunTrace trace;
  trace.method = name;
  trace.n = model.n();
  trace.f_star = rep.f_star;
  OracleCounter counter;
  Vector w(w0.begin(), w0.end());
  double f = model.value(w);
  trace.rows.push_back(make_row(model, rep, w, f, 0, counter, elapsed_ms(start)));
  trace.status = RunStatus::MaxIterations;

  for (std::size_t k = 0; k < cfg.max_outer; ++k) {
    try {
      const Vector g = model.gradient(w, &counter);
      if (!all_finite(g)) throw NumericalError("non-finite gradient");
      if (norm2(g) <= cfg.grad_tol) {
        trace.status = RunStatus::GradTolReached;
        break;
      }
      Direction dir = direction(k, w, g, counter);
      if (!all_finite(dir.p)) throw NumericalError("non-finite search direction");

      double alpha = 1.0;
      std::size_t ls_evals = 0;
      double f_new;
      if (cfg.unit_step) {
        Vector trial = w;
        axpy(1.0, dir.p, trial);
        f_new = model.value(trial);
      } else {
        const ArmijoResult ls = armijo(model, w, dir.p, g, f, cfg.line_search, &counter);
        alpha = ls.alpha;
        ls_evals = ls.trials;
        f_new = ls.f_new;
      }
      axpy(alpha, dir.p, w);
      f = f_new;
      if (!all_finite(w) || !std::isfinite(f)) throw NumericalError("non-finite iterate");

      TraceRow row = make_row(model, rep, w, f, k + 1, counter, elapsed_ms(start));
      row.step_len = alpha;
      row.inner_iters = dir.inner_iters;
      row.ls_evals = ls_evals;
      trace.rows.push_back(row);
      if (should_stop_after_row(cfg, row, trace)) break;
    } catch (const NumericalError& e) {
      trace.status = RunStatus::Diverged;
      trace.message = e.what();
      trace.failed_iter = k + 1;
      break;
    } catch (const LineSearchError& e) {
      trace.status = RunStatus::LineSearchFailed;
      trace.message = e.what();
      trace.failed_iter = k + 1;
      break;
    }
  }
  trace.w_final = std::move(w);
  return trace;
}

}  // namespace

std::string method_name(const MethodVariant& v) {
  return std::visit(Overloaded{
                        [](const SsnCg&) { return std::string("ssn-cg"); },
                        [](const NewtonSketch&) { return std::string("newton-sketch"); },
                        [](const SsnSgi&) { return std::string("ssn-sgi"); },
                        [](const Svrg&) { return std::string("svrg"); },
                    },
                    v);
}

void MethodConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("MethodConfig: " + msg); };
  auto check_zeta = [&](double z) {
    if (!(z > 0.0 && z < 1.0)) fail("zeta must lie in (0,1)");
  };
  std::visit(Overloaded{
                 [&](const SsnCg& c) {
                   if (c.T < 1 || c.max_cg < 1) fail("ssn-cg counts must be >= 1");
                   check_zeta(c.zeta);
                 },
                 [&](const NewtonSketch& c) {
                   if (c.m_ns < 1 || c.max_cg < 1) fail("newton-sketch counts must be >= 1");
                   check_zeta(c.zeta);
                 },
                 [&](const SsnSgi& c) {
                   if (!(c.alpha_inner > 0.0)) fail("ssn-sgi alpha must be > 0");
                 },
                 [&](const Svrg& c) {
                   if (c.m_svrg < 1) fail("svrg m must be >= 1");
                   if (!(c.alpha > 0.0)) fail("svrg alpha must be > 0");
                 },
             },
             variant);
  if (max_outer < 1) fail("max_outer must be >= 1");
  if (!(line_search.c1 > 0.0 && line_search.c1 < 1.0)) fail("c1 must lie in (0,1)");
  if (!(line_search.rho > 0.0 && line_search.rho < 1.0)) fail("rho must lie in (0,1)");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::GradTolReached: return "grad_tol";
    case RunStatus::TargetReached: return "target";
    case RunStatus::MaxIterations: return "max_iter";
    case RunStatus::BudgetExhausted: return "budget";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

bool is_failure(RunStatus s) {
  return s == RunStatus::Diverged || s == RunStatus::LineSearchFailed;
}

ArmijoResult armijo(const LogisticModel& model, std::span<const double> w, std::span<const double> p,
                    std::span<const double> g, double f_w, const LineSearchConfig& cfg,
                    OracleCounter* counter) {
  const double slope = dot(g, p);
  if (!(slope < 0.0)) throw LineSearchError("armijo: not a descent direction");
  ArmijoResult res;
  double alpha = 1.0;
  Vector trial(w.size());
  for (std::size_t b = 0; b <= cfg.max_backtracks; ++b) {
    for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] + alpha * p[i];
    const double f = model.value(trial, counter);
    ++res.trials;
    if (f <= f_w + cfg.c1 * alpha * slope) {
      res.alpha = alpha;
      res.f_new = f;
      return res;
    }
    alpha *= cfg.rho;
  }
  throw LineSearchError("armijo: exceeded " + std::to_string(cfg.max_backtracks) + " backtracks");
}

RunTrace run_ssn_cg(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                    const Reporting& rep) {
  const auto* params = std::get_if<SsnCg>(&cfg.variant);
  if (!params) throw std::invalid_argument("run_ssn_cg: config is not ssn-cg");
  if (params->T > model.n()) throw std::invalid_argument("run_ssn_cg: T > n");
  const Rng root(cfg.seed);
  auto direction = [&](std::size_t k, std::span<const double> w, std::span<const double> g,
                       OracleCounter& counter) {
    Rng rng = root.derive("ssn-cg/subset", k);
    std::vector<std::size_t> subset = rng.sample_without_replacement(model.n(), params->T);
    std::sort(subset.begin(), subset.end());
    const SubsampledHessian h = model.subsampled_hessian(w, std::move(subset));
    Vector rhs(g.begin(), g.end());
    scale(-1.0, rhs);
    CgResult res = cg([&](std::span<const double> v) { return h.apply(v, &counter); }, rhs,
                      params->max_cg, params->zeta);
    return Direction{std::move(res.solution), res.iters_used};
  };
  return newton_type_loop("ssn-cg", model, w0, cfg, rep, direction);
}

RunTrace run_newton_sketch(const LogisticModel& model, std::span<const double> w0,
                           const MethodConfig& cfg, const Reporting& rep) {
  const auto* params = std::get_if<NewtonSketch>(&cfg.variant);
  if (!params) throw std::invalid_argument("run_newton_sketch: config is not newton-sketch");
  auto direction = [&](std::size_t k, std::span<const double> w, std::span<const double> g,
                       OracleCounter& counter) {
    const RosSketch s = new_sketch(model.n(), params->m_ns, derive_seed(cfg.seed, "newton-sketch", k));
    const SketchedSqrt b = build_sketched_sqrt(model, w, s, k);
    Vector rhs(g.begin(), g.end());
    scale(-1.0, rhs);
    CgResult res = cg([&](std::span<const double> v) { return sketched_hess_vec(b, v, &counter); },
                      rhs, params->max_cg, params->zeta);
    return Direction{std::move(res.solution), res.iters_used};
  };
  return newton_type_loop("newton-sketch", model, w0, cfg, rep, direction);
}

RunTrace run_ssn_sgi(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                     const Reporting& rep) {
  const auto* params = std::get_if<SsnSgi>(&cfg.variant);
  if (!params) throw std::invalid_argument("run_ssn_sgi: config is not ssn-sgi");
  auto direction = [&](std::size_t k, std::span<const double> w, std::span<const double> g,
                       OracleCounter& counter) {
    Vector p = sgi(model, w, g, params->m_sgi, params->alpha_inner,
                   derive_seed(cfg.seed, "ssn-sgi", k), &counter);
    return Direction{std::move(p), params->m_sgi};
  };
  return newton_type_loop("ssn-sgi", model, w0, cfg, rep, direction);
}

RunTrace run_svrg(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                  const Reporting& rep) {
  const auto* params = std::get_if<Svrg>(&cfg.variant);
  if (!params) throw std::invalid_argument("run_svrg: config is not svrg");
  cfg.validate();
  if (w0.size() != model.d()) throw std::invalid_argument("svrg: w0 has wrong length");
  const auto start = Clock::now();
  RunTrace trace;
  trace.method = "svrg";
  trace.n = model.n();
  trace.f_star = rep.f_star;
  OracleCounter counter;
  Vector w(w0.begin(), w0.end());
  trace.rows.push_back(make_row(model, rep, w, model.value(w), 0, counter, elapsed_ms(start)));
  trace.status = RunStatus::MaxIterations;

  const Rng root(cfg.seed);
  const double lambda = model.lambda();
  const double alpha = params->alpha;
  Vector snapshot = w;
  for (std::size_t k = 0; k < cfg.max_outer; ++k) {
    const Vector g_bar = model.gradient(snapshot, &counter);
    if (!all_finite(g_bar)) {
      trace.status = RunStatus::Diverged;
      trace.message = "non-finite full gradient";
      trace.failed_iter = k + 1;
      break;
    }
    if (norm2(g_bar) <= cfg.grad_tol) {
      trace.status = RunStatus::GradTolReached;
      break;
    }
    Rng rng = root.derive("svrg/inner", k);
    for (std::size_t t = 0; t < params->m_svrg; ++t) {
      const std::size_t i = rng.uniform_index(model.n());
      const double y = model.data().labels[i];
      // grad F_i(w) - grad F_i(snapshot) = lambda (w - snapshot) + (c_i(w) - c_i(snapshot)) x_i
      const double c_w = -sigmoid(-y * model.row_dot(i, w)) * y;
      const double c_s = -sigmoid(-y * model.row_dot(i, snapshot)) * y;
      counter.component_grads += 2;
      for (std::size_t j = 0; j < w.size(); ++j)
        w[j] -= alpha * (lambda * (w[j] - snapshot[j]) + g_bar[j]);
      model.row_axpy(i, -alpha * (c_w - c_s), w);
    }
    snapshot = w;  // Option I
    const double f = all_finite(w) ? model.value(w) : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(f)) {
      trace.status = RunStatus::Diverged;
      trace.message = "non-finite iterate";
      trace.failed_iter = k + 1;
      break;
    }
    TraceRow row = make_row(model, rep, w, f, k + 1, counter, elapsed_ms(start));
    row.step_len = alpha;
    row.inner_iters = params->m_svrg;
    trace.rows.push_back(row);
    if (should_stop_after_row(cfg, row, trace)) break;
  }
  trace.w_final = std::move(w);
  return trace;
}

RunTrace run_method(const LogisticModel& model, std::span<const double> w0, const MethodConfig& cfg,
                    const Reporting& rep) {
  return std::visit(Overloaded{
                        [&](const SsnCg&) { return run_ssn_cg(model, w0, cfg, rep); },
                        [&](const NewtonSketch&) { return run_newton_sketch(model, w0, cfg, rep); },
                        [&](const SsnSgi&) { return run_ssn_sgi(model, w0, cfg, rep); },
                        [&](const Svrg&) { return run_svrg(model, w0, cfg, rep); },
                    },
                    cfg.variant);
}

std::uint64_t predicted_units(const MethodVariant& v, std::size_t n, std::size_t inner_iters,
                              std::size_t ls_evals) {
  const std::uint64_t base = n + static_cast<std::uint64_t>(ls_evals) * n;
  return std::visit(Overloaded{
                        [&](const SsnCg& c) { return base + c.T * inner_iters; },
                        [&](const NewtonSketch& c) { return base + 2 * c.m_ns * inner_iters; },
                        [&](const SsnSgi&) { return base + inner_iters; },
                        [&](const Svrg& c) { return std::uint64_t{n} + 2 * c.m_svrg; },
                    },
                    v);
}

ReferenceSolution run_reference_newton(const LogisticModel& model, std::span<const double> w0,
                                       double tol, std::size_t max_iters) {
  if (!(model.lambda() > 0.0))
    throw std::invalid_argument("run_reference_newton: lambda must be > 0");
  ReferenceSolution out;
  Vector w(w0.begin(), w0.end());
  double f = model.value(w);
  out.iterates.push_back(w);
  const LineSearchConfig ls_cfg;
  const std::size_t cg_cap = 5 * model.d() + 50;
  for (std::size_t k = 0;; ++k) {
    const Vector g = model.gradient(w);
    out.grad_norm = norm2(g);
    if (out.grad_norm <= tol) break;
    if (k >= max_iters) {
      char msg[160];
      std::snprintf(msg, sizeof msg,
                    "run_reference_newton: no convergence after %zu iterations (||g|| = %.3e)",
                    max_iters, out.grad_norm);
      throw std::runtime_error(msg);
    }
    const SubsampledHessian h = model.full_hessian(w);
    Vector rhs = g;
    scale(-1.0, rhs);
    const CgResult res = cg([&](std::span<const double> v) { return h.apply(v); }, rhs, cg_cap, 1e-14);
    // Inside the quadratic region F differences sink below rounding: Armijo
    // would accept vanishing steps, so take the full Newton step instead.
    if (out.grad_norm <= 1e-6) {
      axpy(1.0, res.solution, w);
      f = model.value(w);
    } else {
      const ArmijoResult ls = armijo(model, w, res.solution, g, f, ls_cfg);
      axpy(ls.alpha, res.solution, w);
      f = ls.f_new;
    }
    out.iterates.push_back(w);
    ++out.iterations;
  }
  out.w_star = std::move(w);
  out.f_star = f;
  return out;
}

}  // namespace subnewton
