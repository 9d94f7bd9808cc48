#include "subnewton/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "subnewton/rng.hpp"
#include "subnewton/sketch.hpp"
#include "subnewton/solvers.hpp"

namespace subnewton {

namespace {

constexpr double kExactSigmaWork = 2e8;  // n d^2 ceiling for the exact second-moment matrix

DenseMatrix densify(const SubsampledHessian& h, std::size_t d) {
  DenseMatrix out(d, d);
  Vector e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = 1.0;
    const Vector col = h.apply(e);
    for (std::size_t i = 0; i < d; ++i) out(i, j) = col[i];
    e[j] = 0.0;
  }
  // Columns from separate products agree only to rounding; symmetrize.
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
  return out;
}

struct Aggregate {
  Vector mean, min, max;
  explicit Aggregate(std::size_t d)
      : mean(d, 0.0),
        min(d, std::numeric_limits<double>::infinity()),
        max(d, -std::numeric_limits<double>::infinity()) {}
  void add(const Vector& eigs) {
    for (std::size_t i = 0; i < eigs.size(); ++i) {
      mean[i] += eigs[i];
      min[i] = std::min(min[i], eigs[i]);
      max[i] = std::max(max[i], eigs[i]);
    }
  }
  void finish(std::size_t reps) {
    for (double& v : mean) v /= static_cast<double>(reps);
    // Guard the mean against rounding outside [min, max] when all replicates agree.
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] = std::clamp(mean[i], min[i], max[i]);
  }
};

// Largest eigenvalue of a symmetric PSD operator by power iteration.
double power_iteration(const LinearOperator& op, std::size_t d, Rng& rng, std::size_t iters = 300) {
  Vector v(d);
  for (double& x : v) x = rng.normal();
  scale(1.0 / norm2(v), v);
  double lambda = 0.0;
  for (std::size_t k = 0; k < iters; ++k) {
    Vector av = op(v);
    lambda = dot(v, av);
    const double nrm = norm2(av);
    if (nrm == 0.0) return 0.0;
    scale(1.0 / nrm, av);
    v = std::move(av);
  }
  return lambda;
}

}  // namespace

SpectrumReport spectrum_report(const LogisticModel& model, std::span<const double> w, std::size_t T,
                               std::size_t m, std::size_t reps, std::uint64_t seed) {
  const std::size_t d = model.d();
  if (d > kDenseGuard)
    throw std::invalid_argument("spectrum_report: d = " + std::to_string(d) +
                                " exceeds the densification guard");
  if (T < 1 || T > model.n()) throw std::invalid_argument("spectrum_report: T must lie in [1, n]");
  if (m < 1 || reps < 1) throw std::invalid_argument("spectrum_report: m and reps must be >= 1");

  SpectrumReport r;
  r.d = d;
  r.replications = reps;
  r.sample_size = T;
  r.sketch_rows = m;
  r.w_used.assign(w.begin(), w.end());
  r.true_eigs = sym_eigvals(densify(model.full_hessian(w), d));

  Aggregate sub(d), sk(d);
  const Rng root(seed);
  for (std::size_t rep = 0; rep < reps; ++rep) {
    Rng sub_rng = root.derive("spectrum/subsample", rep);
    auto subset = sub_rng.sample_without_replacement(model.n(), T);
    std::sort(subset.begin(), subset.end());
    sub.add(sym_eigvals(model.subsampled_hessian(w, std::move(subset)).dense()));

    const RosSketch s = new_sketch(model.n(), m, root.derive("spectrum/sketch", rep).key());
    sk.add(sym_eigvals(build_sketched_sqrt(model, w, s, rep).hessian()));
  }
  sub.finish(reps);
  sk.finish(reps);
  r.sub_mean = std::move(sub.mean);
  r.sub_min = std::move(sub.min);
  r.sub_max = std::move(sub.max);
  r.sketch_mean = std::move(sk.mean);
  r.sketch_min = std::move(sk.min);
  r.sketch_max = std::move(sk.max);
  return r;
}

void write_spectrum_csv(std::ostream& out, const SpectrumReport& r) {
  out << "index,true,sub_mean,sub_min,sub_max,sketch_mean,sketch_min,sketch_max\n";
  char buf[512];
  for (std::size_t i = 0; i < r.d; ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", i + 1,
                  r.true_eigs[i], r.sub_mean[i], r.sub_min[i], r.sub_max[i], r.sketch_mean[i],
                  r.sketch_min[i], r.sketch_max[i]);
    out << buf;
  }
}

double cg_error_bound(std::span<const double> eigs, std::size_t r) {
  const std::size_t d = eigs.size();
  if (r < 1 || r > d) throw std::out_of_range("cg_error_bound: r must lie in [1, d]");
  const double lo = eigs[0];
  const double hi = eigs[d - r];
  const double q = (hi - lo) / (hi + lo);
  return q * q;
}

std::size_t theorem1_sample_size(const ProblemConstants& c) {
  const double t = std::ceil(64.0 * c.sigma_hat * c.sigma_hat / (c.mu_hat * c.mu_hat));
  if (!(t < 1.8e19)) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(t);
}

std::size_t theorem1_cg_iters(std::span<const double> eigs_sub, double kappa) {
  const std::size_t d = eigs_sub.size();
  if (d == 0) throw std::invalid_argument("theorem1_cg_iters: empty spectrum");
  const double threshold = 1.0 / (8.0 * std::pow(kappa, 1.5));
  const double lo = eigs_sub[0];
  for (std::size_t r = 1; r <= d; ++r) {
    const double hi = eigs_sub[d - r];
    if ((hi - lo) / (hi + lo) <= threshold) return r;
  }
  return d;
}

double work_ssn_cg(double n, double r_bar, const ProblemConstants& c, double d, double eps) {
  const double ratio = c.sigma_hat * c.sigma_hat / (c.mu_hat * c.mu_hat);
  return (n + r_bar * ratio) * d * std::log(1.0 / eps);
}

double work_newton_sketch(double n, double kappa, double d, double eps) {
  return (n + std::pow(kappa, 4) * d * d) * d * std::log(1.0 / eps);
}

double sketch_dimension(double kappa, double n, double d) { return kappa * kappa * std::min(n, d); }

ProblemConstants estimate_constants(const LogisticModel& model, std::span<const double> w,
                                    std::size_t probe_count, std::uint64_t seed,
                                    bool allow_sampling) {
  const std::size_t n = model.n();
  const std::size_t d = model.d();
  const double lambda = model.lambda();
  const Rng root(seed);
  const bool dense_ok = d <= kDenseGuard;
  const bool sigma_exact =
      dense_ok && static_cast<double>(n) * static_cast<double>(d) * static_cast<double>(d) <= kExactSigmaWork;
  if (!sigma_exact && !allow_sampling)
    throw std::invalid_argument("estimate_constants: problem exceeds the exact-path guard");

  ProblemConstants c;
  const SubsampledHessian full = model.full_hessian(w);
  const Vector& weights = full.weights();

  if (dense_ok) {
    c.mu_hat = sym_eigvals(full.dense()).front();
  } else {
    Rng rng = root.derive("constants/mu");
    const double top = power_iteration([&](std::span<const double> v) { return full.apply(v); }, d, rng);
    const double gap = power_iteration(
        [&](std::span<const double> v) {
          Vector out = full.apply(v);
          for (std::size_t i = 0; i < d; ++i) out[i] = top * v[i] - out[i];
          return out;
        },
        d, rng);
    c.mu_hat = top - gap;
  }

  // Component Hessians are d_i x_i x_i^T + lambda I: top eigenvalue d_i ||x_i||^2 + lambda.
  Rng probe_rng = root.derive("constants/L");
  const auto probes = probe_rng.sample_without_replacement(n, std::min(probe_count, n));
  double l_hat = lambda;
  for (std::size_t i : probes) l_hat = std::max(l_hat, weights[i] * model.row_norm_sq(i) + lambda);
  c.L_hat = std::max(l_hat, c.mu_hat);

  // Second moment of (component Hessian - Hessian): the lambda I terms cancel, leaving
  // (1/s) sum_i d_i^2 ||x_i||^2 x_i x_i^T - H0^2 with H0 the unregularized mean.
  std::vector<std::size_t> rows;
  if (sigma_exact) {
    rows = model.all_indices();
  } else {
    rows = root.derive("constants/sigma").sample_without_replacement(n, std::min(probe_count, n));
    std::sort(rows.begin(), rows.end());
    c.sigma_is_estimate = rows.size() < n;
  }
  const double inv_s = 1.0 / static_cast<double>(rows.size());
  double top_moment = 0.0;
  if (sigma_exact) {
    DenseMatrix moment(d, d), h0(d, d);
    Vector x(d);
    for (std::size_t i : rows) {
      std::fill(x.begin(), x.end(), 0.0);
      model.row_axpy(i, 1.0, x);
      const double wi = weights[i];
      const double wi2 = wi * wi * model.row_norm_sq(i);
      for (std::size_t a = 0; a < d; ++a) {
        if (x[a] == 0.0) continue;
        for (std::size_t b = a; b < d; ++b) {
          moment(a, b) += wi2 * x[a] * x[b];
          h0(a, b) += wi * x[a] * x[b];
        }
      }
    }
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        moment(a, b) *= inv_s;
        h0(a, b) *= inv_s;
        moment(b, a) = moment(a, b);
        h0(b, a) = h0(a, b);
      }
    const DenseMatrix h0_sq = matmul(h0, h0);
    for (std::size_t k = 0; k < moment.entries().size(); ++k) moment.entries()[k] -= h0_sq.entries()[k];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a + 1; b < d; ++b) moment(a, b) = moment(b, a) = 0.5 * (moment(a, b) + moment(b, a));
    top_moment = sym_eigvals(moment).back();
  } else {
    Vector sample_w(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) sample_w[k] = weights[rows[k]];
    auto h0_apply = [&](std::span<const double> v) {
      Vector out(d, 0.0);
      for (std::size_t k = 0; k < rows.size(); ++k)
        model.row_axpy(rows[k], sample_w[k] * model.row_dot(rows[k], v) * inv_s, out);
      return out;
    };
    Rng rng = root.derive("constants/sigma-power");
    top_moment = power_iteration(
        [&](std::span<const double> v) {
          Vector out(d, 0.0);
          for (std::size_t k = 0; k < rows.size(); ++k) {
            const std::size_t i = rows[k];
            const double c2 = sample_w[k] * sample_w[k] * model.row_norm_sq(i);
            model.row_axpy(i, c2 * model.row_dot(i, v) * inv_s, out);
          }
          const Vector hv = h0_apply(h0_apply(v));
          axpy(-1.0, hv, out);
          return out;
        },
        d, rng);
  }
  c.sigma_hat = std::sqrt(std::max(0.0, top_moment));
  c.kappa_hat = c.L_hat / c.mu_hat;
  return c;
}

ContractionStudy contraction_study(const LogisticModel& model, std::span<const double> w_star,
                                   std::size_t T, double kappa, double start_radius,
                                   std::size_t runs, std::size_t iters, std::uint64_t seed) {
  if (T < 1 || T > model.n()) throw std::invalid_argument("contraction_study: T must lie in [1, n]");
  if (iters < 1 || runs < 1) throw std::invalid_argument("contraction_study: runs, iters >= 1");
  const std::size_t d = model.d();
  const Rng root(seed);
  ContractionStudy out;
  for (std::size_t run = 0; run < runs; ++run) {
    Rng rng = root.derive("contraction/run", run);
    Vector u(d);
    for (double& v : u) v = rng.normal();
    scale(start_radius / norm2(u), u);
    Vector w(w_star.begin(), w_star.end());
    axpy(1.0, u, w);

    std::vector<double> errs;
    auto error = [&] {
      Vector diff = w;
      axpy(-1.0, w_star, diff);
      return norm2(diff);
    };
    errs.push_back(error());
    for (std::size_t k = 0; k < iters; ++k) {
      const Vector g = model.gradient(w);
      auto subset = rng.sample_without_replacement(model.n(), T);
      std::sort(subset.begin(), subset.end());
      const SubsampledHessian h = model.subsampled_hessian(w, std::move(subset));
      const std::size_t r = theorem1_cg_iters(sym_eigvals(h.dense()), kappa);
      out.cg_iters_used.push_back(r);
      Vector rhs = g;
      scale(-1.0, rhs);
      const CgResult res = cg([&](std::span<const double> v) { return h.apply(v); }, rhs, r, 1e-16);
      axpy(1.0, res.solution, w);
      errs.push_back(error());
    }
    out.run_factors.push_back(std::pow(errs.back() / errs.front(), 1.0 / static_cast<double>(iters)));
    out.errors.push_back(std::move(errs));
  }
  std::vector<double> sorted = out.run_factors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  out.median_factor = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return out;
}

}  // namespace subnewton
