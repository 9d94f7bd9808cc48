// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "subnewton/analysis.hpp"
#include "subnewton/data.hpp"
#include "subnewton/harness.hpp"
#include "subnewton/methods.hpp"
#include "subnewton/sketch.hpp"
#include "subnewton/solvers.hpp"
#include "test_support.hpp"

using namespace subnewton;
using testsupport::rel_err;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
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

LinearOperator diag_op(const Vector& diag) {
  return [diag](std::span<const double> v) {
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag[i] * v[i];
    return out;
  };
}

Outcome c1_oracles() {
  Rng rng(101);
  double worst_g = 0.0, worst_h = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = 20 + rng.uniform_index(81);
    const std::size_t d = 2 + rng.uniform_index(9);
    const LogisticModel m(testsupport::random_dataset(n, d, 200 + inst, inst % 2 == 1), 1.0 / n);
    const Vector w = testsupport::random_vector(d, rng);
    worst_g = std::max(worst_g, rel_err(m.gradient(w), fd_gradient(m, w, 1e-6)));

    const Vector v = testsupport::random_vector(d, rng);
    const double h = 1e-5;
    Vector wp = w, wm = w;
    axpy(h, v, wp);
    axpy(-h, v, wm);
    Vector fd = m.gradient(wp);
    axpy(-1.0, m.gradient(wm), fd);
    scale(1.0 / (2 * h), fd);
    worst_h = std::max(worst_h, rel_err(m.hess_vec(w, v), fd));
  }
  return {worst_g <= 1e-6 && worst_h <= 1e-5,
          fmt("10 instances, max gradient rel err %.2e (<= 1e-6), max Hv rel err %.2e (<= 1e-5)",
              worst_g, worst_h)};
}

Outcome c2_cg_bound() {
  Rng rng(102);
  double worst = -std::numeric_limits<double>::infinity();
  for (int inst = 0; inst < 20; ++inst) {
    const double cond = 10.0 * std::pow(10.0, rng.uniform());
    Vector eigs(40);
    for (double& v : eigs) v = std::exp(rng.uniform() * std::log(cond));
    Vector sorted = eigs;
    std::sort(sorted.begin(), sorted.end());
    const Vector b = testsupport::random_vector(40, rng);
    Vector xstar(40);
    for (std::size_t i = 0; i < 40; ++i) xstar[i] = b[i] / eigs[i];
    auto a_err = [&](const Vector& x) {
      double s = 0.0;
      for (std::size_t i = 0; i < 40; ++i) s += eigs[i] * (x[i] - xstar[i]) * (x[i] - xstar[i]);
      return s;
    };
    const double e0 = a_err(Vector(40, 0.0));
    for (std::size_t r = 1; r <= 40; ++r) {
      const Vector x = cg(diag_op(eigs), b, r, 1e-16).solution;
      worst = std::max(worst, a_err(x) / e0 - cg_error_bound(sorted, r));
    }
  }
  return {worst <= 1e-10,
          fmt("20 diagonal systems (d=40, cond 10-100), max(ratio - bound) = %.2e (<= 1e-10)", worst)};
}

Outcome c3_cg_clusters() {
  Vector diag(40);
  const double levels[] = {0.5, 2.0, 7.0, 20.0, 90.0};
  for (std::size_t i = 0; i < 40; ++i) diag[i] = levels[i % 5];
  Rng rng(103);
  Vector b = testsupport::random_vector(40, rng);
  scale(1.0 / norm2(b), b);
  const CgResult r = cg(diag_op(diag), b, 40, 1e-10);
  const double res = r.residual_norms.back();
  return {r.converged && res <= 1e-10 && r.iters_used <= 7,
          fmt("5 distinct eigenvalues, d=40: residual %.2e after %zu iterations (<= 7)", res,
              r.iters_used)};
}

double isotropy_distance(const DenseMatrix& sum, std::size_t count, std::size_t m) {
  DenseMatrix mean = sum;
  scale(1.0 / static_cast<double>(count * m), mean.entries());
  return spectral_norm(testsupport::subtract(mean, DenseMatrix::identity(sum.rows())));
}

Outcome c4_isotropy() {
  const std::size_t n = 32, m = 16;
  DenseMatrix sum(n, n);
  double d100 = 0.0;
  for (std::size_t r = 0; r < 1000; ++r) {
    const DenseMatrix g = gram(new_sketch(n, m, derive_seed(104, "isotropy", r)).dense());
    for (std::size_t k = 0; k < g.entries().size(); ++k) sum.entries()[k] += g.entries()[k];
    if (r + 1 == 100) d100 = isotropy_distance(sum, 100, m);
  }
  const double d1000 = isotropy_distance(sum, 1000, m);
  const double ratio = d100 / d1000;
  return {ratio >= 2.5,
          fmt("||mean S^T S/m - I||: %.4f at 100 reps, %.4f at 1000 reps, ratio %.2f (>= 2.5)", d100,
              d1000, ratio)};
}

Outcome c5_unbiased() {
  const LogisticModel model(testsupport::random_dataset(64, 8, 105), 1.0 / 64);
  Rng rng(106);
  const Vector w = testsupport::random_vector(8, rng);
  const DenseMatrix truth = model.full_hessian(w).dense();
  auto error_at = [&](std::size_t m) {
    DenseMatrix mean(8, 8);
    for (std::size_t r = 0; r < 200; ++r) {
      const DenseMatrix h =
          build_sketched_sqrt(model, w, new_sketch(64, m, derive_seed(107, "unbiased", 1000 * m + r))).hessian();
      for (std::size_t k = 0; k < 64; ++k) mean.entries()[k] += h.entries()[k] / 200.0;
    }
    return spectral_norm(testsupport::subtract(mean, truth));
  };
  const double e16 = error_at(16), e64 = error_at(64);
  const double ratio = e64 / e16;
  return {ratio >= 0.35 && ratio <= 0.65,
          fmt("200-sketch mean error %.3e at m=16, %.3e at m=64, ratio %.3f (0.5 +- 30%%)", e16, e64,
              ratio)};
}

Outcome c6_contraction() {
  const LogisticModel model(synth_gen(2000, 20, 100.0, 6));
  const ReferenceSolution ref = run_reference_newton(model, Vector(20, 0.0));
  const ProblemConstants c = estimate_constants(model, ref.w_star, model.n(), 61);
  const std::size_t t = std::min(model.n(), std::max<std::size_t>(1, theorem1_sample_size(c)));
  const ContractionStudy s = contraction_study(model, ref.w_star, t, c.kappa_hat, 1e-3, 50, 5, 62);
  const auto [rmin, rmax] = std::minmax_element(s.cg_iters_used.begin(), s.cg_iters_used.end());
  return {s.median_factor <= 0.6,
          fmt("kappa_hat %.1f, T=%zu (64 s^2/mu^2 = %zu), CG iters %zu-%zu, median contraction %.2e (<= 0.6)",
              c.kappa_hat, t, theorem1_sample_size(c), *rmin, *rmax, s.median_factor)};
}

Outcome c7_degenerate() {
  // With max_cg = d the CG solve is exact only while rounding allows finite
  // termination; a Hessian condition number near 10 keeps that true.
  const LogisticModel model(synth_gen(400, 10, 10.0, 7));
  const Vector w0(10, 0.0);
  const ReferenceSolution ref = run_reference_newton(model, w0);
  MethodConfig cfg;
  cfg.variant = SsnCg{model.n(), model.d(), 1e-12};
  cfg.grad_tol = 0.0;
  cfg.seed = 71;
  double worst = 0.0;
  std::size_t compared = 0;
  for (std::size_t k = 1; k <= ref.iterations; ++k) {
    cfg.max_outer = k;
    const RunTrace t = run_ssn_cg(model, w0, cfg);
    if (t.rows.size() != k + 1) break;  // Armijo cannot certify steps at machine precision
    worst = std::max(worst, testsupport::max_abs_diff(t.w_final, ref.iterates[k]));
    ++compared;
  }
  return {compared >= std::min<std::size_t>(ref.iterations, 5) && worst <= 1e-8,
          fmt("%zu of %zu Newton iterates compared, max deviation %.2e (<= 1e-8)", compared,
              ref.iterations, worst)};
}

Outcome c8_costs() {
  const LogisticModel model(testsupport::random_dataset(1000, 8, 108), 1.0 / 1000);
  const std::vector<MethodVariant> variants{SsnCg{100, 10, 1e-2}, NewtonSketch{50, 6, 1e-2},
                                            SsnSgi{1000, 0.05}, Svrg{0.05, 500}};
  std::string detail;
  bool ok = true;
  for (const auto& v : variants) {
    MethodConfig cfg;
    cfg.variant = v;
    cfg.max_outer = 8;
    cfg.grad_tol = 0.0;
    cfg.seed = 81;
    const RunTrace t = run_method(model, Vector(8, 0.0), cfg);
    std::uint64_t predicted = 0;
    std::size_t ls = 0;
    for (std::size_t k = 1; k < t.rows.size(); ++k) {
      predicted += predicted_units(v, model.n(), t.rows[k].inner_iters, t.rows[k].ls_evals);
      ls += t.rows[k].ls_evals;
    }
    const auto& last = t.rows.back();
    const bool same = last.cum_units == predicted &&
                      last.cum_ege == static_cast<double>(predicted) / static_cast<double>(model.n());
    ok = ok && same && t.rows.size() > 1 && !is_failure(t.status);
    detail += fmt("%s %llu/%llu units (%zu LS evals); ", method_name(v).c_str(),
                  static_cast<unsigned long long>(last.cum_units),
                  static_cast<unsigned long long>(predicted), ls);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

struct GridOutcome {
  std::vector<std::pair<MethodKind, std::optional<double>>> ege_tight;  // best cell, EGE to 1e-8
  std::vector<std::pair<MethodKind, std::optional<double>>> ege_1e6;    // best cell, EGE to 1e-6
  RunTrace best_svrg;
};

GridOutcome tuned_grid(double kappa) {
  const LogisticModel model(synth_gen(2000, 50, kappa, 9));
  const ReferenceSolution ref = run_reference_newton(model, Vector(50, 0.0));
  ExperimentSpec spec;
  spec.methods = {MethodKind::SsnCg, MethodKind::NewtonSketch, MethodKind::SsnSgi, MethodKind::Svrg};
  spec.seed = 91;
  spec.max_ege = 400;
  spec.max_outer = 400;
  spec.target_error = 1e-9;
  const GridReport r = run_grid(spec, model, nullptr, ref.f_star);
  GridOutcome out;
  for (MethodKind k : spec.methods) {
    const auto idx = best_cell(r.cells, k);
    if (!idx) {
      out.ege_tight.emplace_back(k, std::nullopt);
      out.ege_1e6.emplace_back(k, std::nullopt);
      continue;
    }
    const GridCell& c = r.cells[*idx];
    out.ege_tight.emplace_back(k, c.ege_to_tight);
    out.ege_1e6.emplace_back(k, ege_to_reach(c.trace, 1e-6));
    if (k == MethodKind::Svrg) out.best_svrg = c.trace;
  }
  return out;
}

std::string show(const std::optional<double>& v) { return v ? fmt("%.0f", *v) : std::string("n/a"); }

GridOutcome* well_conditioned = nullptr;

Outcome c9_ordering() {
  const GridOutcome ill = tuned_grid(1e4);
  static GridOutcome well = tuned_grid(10.0);
  well_conditioned = &well;
  auto get = [](const auto& list, MethodKind k) {
    for (const auto& [kind, v] : list)
      if (kind == k) return v;
    return std::optional<double>{};
  };
  const auto cg_e = get(ill.ege_tight, MethodKind::SsnCg);
  const auto ns_e = get(ill.ege_tight, MethodKind::NewtonSketch);
  const auto svrg_e = get(ill.ege_tight, MethodKind::Svrg);
  const double svrg_cost = svrg_e.value_or(std::numeric_limits<double>::infinity());
  const bool ill_ok = cg_e && ns_e && *cg_e < svrg_cost && *ns_e < svrg_cost;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool all_reached = true;
  std::string well_txt;
  for (const auto& [k, v] : well.ege_1e6) {
    all_reached = all_reached && v.has_value();
    if (v) lo = std::min(lo, *v), hi = std::max(hi, *v);
    well_txt += to_string(k) + " " + show(v) + ", ";
  }
  well_txt.resize(well_txt.size() - 2);
  const bool well_ok = all_reached && hi <= 2.0 * lo;
  return {ill_ok && well_ok,
          fmt("kappa=1e4 EGE to 1e-8: ssn-cg %s, newton-sketch %s, svrg %s (cap 400); "
              "kappa=10 EGE to 1e-6: %s, spread %.2fx (<= 2)",
              show(cg_e).c_str(), show(ns_e).c_str(), show(svrg_e).c_str(), well_txt.c_str(),
              hi / lo)};
}

Outcome c10_spectrum() {
  const LogisticModel model(synth_gen(512, 16, 100.0, 10));
  const ReferenceSolution ref = run_reference_newton(model, Vector(16, 0.0));
  const SpectrumReport r = spectrum_report(model, ref.w_star, 256, 256, 10, 110);
  const double range = r.true_eigs.back() - r.true_eigs.front();
  double sub_dev = 0.0, sk_dev = 0.0, sub_w = 0.0, sk_w = 0.0;
  for (std::size_t i = 0; i < r.d; ++i) {
    sub_dev += std::abs(r.sub_mean[i] - r.true_eigs[i]) / r.d;
    sk_dev += std::abs(r.sketch_mean[i] - r.true_eigs[i]) / r.d;
    sub_w += (r.sub_max[i] - r.sub_min[i]) / r.d;
    sk_w += (r.sketch_max[i] - r.sketch_min[i]) / r.d;
  }
  const bool ok = sub_dev <= 0.15 * range && sk_dev <= 0.15 * range && sk_w <= sub_w;
  return {ok, fmt("mean |dev|/range: subsampled %.3f, sketched %.3f (<= 0.15); mean band width "
                  "sketched %.3e vs subsampled %.3e",
                  sub_dev / range, sk_dev / range, sk_w, sub_w)};
}

Outcome c11_svrg_linear() {
  if (!well_conditioned) return {false, "criterion 9 grid unavailable"};
  const RunTrace& t = well_conditioned->best_svrg;
  std::vector<double> xs, ys;
  for (const auto& row : t.rows) {
    if (!(row.train_error > 0.0)) break;
    xs.push_back(static_cast<double>(row.iter));
    ys.push_back(std::log(row.train_error));
    if (row.train_error <= 1e-8) break;
  }
  if (xs.size() < 3 || std::exp(ys.back()) > 1e-8)
    return {false, fmt("best SVRG trace did not reach 1e-8 (%zu cycles)", xs.size())};
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double r2 = sxy * sxy / (sxx * syy);
  return {slope < 0.0 && r2 >= 0.9,
          fmt("%zu cycles to 1e-8, slope %.3f per cycle, R^2 %.4f (>= 0.9)", xs.size(), slope, r2)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle correctness", 5, c1_oracles},
      {"CG spectral bound", 5, c2_cg_bound},
      {"CG clustered-spectrum termination", 1, c3_cg_clusters},
      {"sketch isotropy", 10, c4_isotropy},
      {"sketched-Hessian unbiasedness", 10, c5_unbiased},
      {"local contraction with unit steps", 60, c6_contraction},
      {"full-sample SSN-CG equals Newton-CG", 5, c7_degenerate},
      {"cost-model exactness", 5, c8_costs},
      {"tuned-grid EGE ordering", 600, c9_ordering},
      {"spectrum report", 30, c10_spectrum},
      {"SVRG linear convergence", 60, c11_svrg_linear},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= criteria[i].limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s [%2zu] %s: %s (%.2f s, limit %.0f s%s)\n", pass ? "PASS" : "FAIL", i + 1,
                criteria[i].name, o.detail.c_str(), secs, criteria[i].limit_s,
                in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
