#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "subnewton/linops.hpp"
#include "subnewton/problem.hpp"

namespace subnewton {

/// Largest d handled by the dense (eigendecomposition) paths.
inline constexpr std::size_t kDenseGuard = 2000;

/// Per-index eigenvalue statistics of the true, subsampled and sketched Hessians.
struct SpectrumReport {
  std::size_t d = 0;
  Vector true_eigs;
  Vector sub_mean, sub_min, sub_max;
  Vector sketch_mean, sketch_min, sketch_max;
  std::size_t replications = 0;
  std::size_t sample_size = 0;  // T
  std::size_t sketch_rows = 0;  // m
  Vector w_used;
};

SpectrumReport spectrum_report(const LogisticModel& model, std::span<const double> w, std::size_t T,
                               std::size_t m, std::size_t reps = 10, std::uint64_t seed = 0);

/// CSV with columns index,true,sub_mean,sub_min,sub_max,sketch_mean,sketch_min,sketch_max.
void write_spectrum_csv(std::ostream& out, const SpectrumReport& r);

/// Squared CG contraction factor after r steps:
/// ((l_{d-r+1} - l_1) / (l_{d-r+1} + l_1))^2, with eigenvalues ascending and 1-based.
double cg_error_bound(std::span<const double> eigs, std::size_t r);

struct ProblemConstants {
  double mu_hat = 0.0;
  double L_hat = 0.0;
  double sigma_hat = 0.0;
  double kappa_hat = 1.0;
  bool sigma_is_estimate = false;  // computed from a row sample rather than all n
};

/// ceil(64 sigma^2 / mu^2); 0 means any T >= 1 satisfies the sample condition.
std::size_t theorem1_sample_size(const ProblemConstants& c);

/// Smallest r in [1, d] with (l_{d-r+1} - l_1)/(l_{d-r+1} + l_1) <= 1/(8 kappa^{3/2}).
std::size_t theorem1_cg_iters(std::span<const double> eigs_sub, double kappa);

/// Order-of-magnitude work calculators (all hidden constants set to 1).
double work_ssn_cg(double n, double r_bar, const ProblemConstants& c, double d, double eps);
double work_newton_sketch(double n, double kappa, double d, double eps);
/// kappa^2 min(n, d).
double sketch_dimension(double kappa, double n, double d);

/// mu_hat = lambda_min(Hessian at w); L_hat = max over probe_count sampled
/// components of lambda_max(component Hessian); sigma_hat^2 = spectral norm of
/// the second moment of (component Hessian - Hessian). Exact when d and n d^2 are
/// desk-scale; otherwise power iteration on a row sample when allow_sampling.
ProblemConstants estimate_constants(const LogisticModel& model, std::span<const double> w,
                                    std::size_t probe_count, std::uint64_t seed,
                                    bool allow_sampling = true);

/// Local-convergence study of subsampled Newton-CG with unit steps: T-sample
/// Hessians, CG run for theorem1_cg_iters(eigs, kappa) steps each iteration.
struct ContractionStudy {
  std::vector<std::vector<double>> errors;  // per run: ||w_k - w*||, k = 0..iters
  std::vector<double> run_factors;          // per run: (e_iters / e_0)^(1/iters)
  std::vector<std::size_t> cg_iters_used;   // all runs and iterations
  double median_factor = 0.0;
};

ContractionStudy contraction_study(const LogisticModel& model, std::span<const double> w_star,
                                   std::size_t T, double kappa, double start_radius,
                                   std::size_t runs, std::size_t iters, std::uint64_t seed);

}  // namespace subnewton
