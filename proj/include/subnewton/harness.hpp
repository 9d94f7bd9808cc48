#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subnewton/data.hpp"
#include "subnewton/methods.hpp"

namespace subnewton {

enum class MethodKind { SsnCg, NewtonSketch, SsnSgi, Svrg };

MethodKind parse_method_kind(const std::string& name);
std::string to_string(MethodKind k);

/// The nine per-iteration budgets {n/100, n/50, n/10, n/5, n/2, n, 2n, 5n, 10n},
/// rounded to the nearest integer, minimum 1. Requires n >= 100.
std::vector<std::size_t> budget_grid(std::size_t n);

/// Step lengths 2^-12, ..., 2^0.
std::vector<double> default_alpha_grid();

/// Sample-size fractions tried for T (SSN-CG) and for m_ns relative to b/2 (Newton-Sketch).
inline const std::vector<std::size_t> kFractionDenominators{1, 2, 5, 10, 25, 50};

/// All configurations of `kind` that spend exactly budget b per outer iteration:
///   svrg: m_svrg = floor(b/2) for each alpha;  ssn-sgi: m_sgi = b for each alpha;
///   ssn-cg: T * max_cg = b with T = b/k (integer, T <= n);
///   newton-sketch: 2 m_ns max_cg = b with m_ns = (b/2)/k (integer).
/// Empty when b < 2 or no integer pair exists.
std::vector<MethodVariant> resolve_hypers(MethodKind kind, std::size_t b, std::size_t n,
                                          const std::vector<double>& alphas = default_alpha_grid(),
                                          double zeta = 1e-2);

/// Where an experiment's data comes from.
struct DataSource {
  std::string path;  // libsvm file; empty means synthetic
  std::size_t synth_n = 2000;
  std::size_t synth_d = 50;
  double synth_kappa = 100.0;
  std::uint64_t synth_seed = 1;
};

struct ExperimentSpec {
  DataSource data;
  std::vector<MethodKind> methods;
  std::vector<std::size_t> budgets;  // empty: budget_grid(n_train)
  std::vector<double> alphas = default_alpha_grid();
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::string out_dir;
  double test_frac = 0.1;
  std::optional<double> lambda;  // default 1/n_train
  std::size_t max_outer = 200;
  double max_ege = 200.0;
  double target_error = 1e-10;  // runs stop once reached
  double zeta = 1e-2;
  std::size_t threads = 0;  // 0: hardware concurrency

  /// Throws std::invalid_argument if no method is listed or a budget is zero.
  void validate() const;
};

ExperimentSpec spec_from_json(const std::string& json_text);
std::string spec_to_json(const ExperimentSpec& spec);

/// EGE thresholds summarized per cell.
inline constexpr double kLooseThreshold = 1e-4;
inline constexpr double kTightThreshold = 1e-8;

/// First cum_ege at which train_error <= threshold.
std::optional<double> ege_to_reach(const RunTrace& t, double threshold);

struct GridCell {
  MethodKind kind;
  std::size_t budget = 0;
  MethodVariant variant;
  std::uint64_t seed = 0;
  double best_error = 0.0;
  double final_error = 0.0;
  std::optional<double> ege_to_loose;  // 1e-4
  std::optional<double> ege_to_tight;  // 1e-8
  RunStatus status = RunStatus::MaxIterations;
  std::size_t iterations = 0;
  RunTrace trace;  // replicate 0
};

struct GridReport {
  std::string dataset;
  std::size_t n = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  double f_star = 0.0;
  std::vector<std::size_t> budgets;
  std::vector<std::size_t> fraction_ladder = kFractionDenominators;
  std::vector<GridCell> cells;  // ordered by (method, budget, hyper-parameter index)
  std::vector<std::pair<MethodKind, std::size_t>> best;  // method -> index into cells
  std::vector<std::pair<MethodKind, std::size_t>> skipped;  // (method, budget) with no valid pair
};

/// Index of the best non-failed cell of `kind`: smallest EGE to 1e-8, else smallest final error.
std::optional<std::size_t> best_cell(const std::vector<GridCell>& cells, MethodKind kind);

/// Runs every (method, budget, hyper-parameter) cell with derived seeds on a
/// worker pool. Results are ordered by cell key, never by completion time.
GridReport run_grid(const ExperimentSpec& spec, const LogisticModel& model, const Dataset* test,
                    double f_star);

/// Loads or generates the data, splits it, computes F*, runs the grid and, when
/// spec.out_dir is set, writes the report, per-cell traces and plots.
GridReport run_experiment(const ExperimentSpec& spec);

void write_grid_report(const std::filesystem::path& dir, const GridReport& report);
std::string grid_summary_json(const GridReport& report);

/// Columns iter,cum_ege,train_error,test_loss,step_len,inner_iters,wall_ms.
void write_trace_csv(std::ostream& out, const RunTrace& t);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& t);
/// Reads rows written by write_trace_csv; fields not in the CSV are left default.
RunTrace read_trace_csv(std::istream& in, std::string method = {});
RunTrace read_trace_csv(const std::filesystem::path& path);

/// Lower clip for log-scale axes.
inline constexpr double kLogFloor = 1e-16;

/// Writes error_vs_iter.svg, error_vs_ege.svg, test_loss_vs_ege.svg and
/// traces.csv (a `method` column followed by the trace columns) into out_dir.
std::vector<std::filesystem::path> emit_plots(const std::vector<RunTrace>& traces,
                                              const std::filesystem::path& out_dir,
                                              const std::string& title = {});

}  // namespace subnewton
