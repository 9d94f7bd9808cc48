// Command-line front end: dataset generation, reference solutions, single runs,
// budget grids, spectrum reports and plotting.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "subnewton/analysis.hpp"
#include "subnewton/data.hpp"
#include "subnewton/harness.hpp"
#include "subnewton/methods.hpp"
#include "subnewton/rng.hpp"

namespace fs = std::filesystem;
using namespace subnewton;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

template <class T>
void override_if(const CLI::Option* opt, const T& value, T& target) {
  if (opt->count() > 0) target = value;
}

// Options shared by `run` and `grid`; unset flags fall back to the config file.
struct CommonOpts {
  std::string config, data, out;
  std::uint64_t seed = 0;
  double lambda = 0.0, test_frac = 0.1, max_ege = 200.0, target = 1e-10, zeta = 1e-2;
  std::size_t max_outer = 200, threads = 0;
  CLI::Option *o_data, *o_out, *o_seed, *o_lambda, *o_test, *o_ege, *o_target, *o_zeta, *o_outer,
      *o_threads;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON experiment file")->check(CLI::ExistingFile);
    o_data = app->add_option("--data", data, "libsvm dataset");
    o_out = app->add_option("--out", out, "output directory");
    o_seed = app->add_option("--seed", seed, "master seed");
    o_lambda = app->add_option("--lambda", lambda, "l2 weight (default 1/n_train)");
    o_test = app->add_option("--test-frac", test_frac, "held-out fraction")->check(CLI::Range(0.0, 0.9));
    o_ege = app->add_option("--max-ege", max_ege, "budget in effective gradient evaluations");
    o_target = app->add_option("--target-error", target, "stop once F - F* reaches this");
    o_zeta = app->add_option("--zeta", zeta, "CG relative residual tolerance");
    o_outer = app->add_option("--max-outer", max_outer, "outer iteration cap");
    o_threads = app->add_option("--threads", threads, "grid workers (0: all cores)");
  }

  ExperimentSpec spec() const {
    ExperimentSpec s = config.empty() ? ExperimentSpec{} : spec_from_json(slurp(config));
    override_if(o_data, data, s.data.path);
    override_if(o_out, out, s.out_dir);
    override_if(o_seed, seed, s.seed);
    if (o_lambda->count()) s.lambda = lambda;
    override_if(o_test, test_frac, s.test_frac);
    override_if(o_ege, max_ege, s.max_ege);
    override_if(o_target, target, s.target_error);
    override_if(o_zeta, zeta, s.zeta);
    override_if(o_outer, max_outer, s.max_outer);
    override_if(o_threads, threads, s.threads);
    return s;
  }
};

struct Prepared {
  Dataset full;
  SplitDataset parts;
  LogisticModel model;
  double f_star;
};

Prepared prepare(const ExperimentSpec& s) {
  Dataset full = s.data.path.empty()
                     ? synth_gen(s.data.synth_n, s.data.synth_d, s.data.synth_kappa, s.data.synth_seed)
                     : read_libsvm(fs::path(s.data.path));
  SplitDataset parts = split(full, s.test_frac, derive_seed(s.seed, "split"));
  const double lambda = s.lambda.value_or(1.0 / static_cast<double>(parts.train.num_examples()));
  LogisticModel model(parts.train, lambda);
  const double f_star = run_reference_newton(model, Vector(model.d(), 0.0)).f_star;
  return {std::move(full), std::move(parts), std::move(model), f_star};
}

int cmd_gen(std::size_t n, std::size_t d, double kappa, std::uint64_t seed, const std::string& out) {
  const Dataset ds = synth_gen(n, d, kappa, seed);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  write_libsvm(fs::path(out), ds);
  std::printf("wrote %s (n=%zu, d=%zu)\n", out.c_str(), ds.num_examples(), ds.num_features());
  return 0;
}

int cmd_fstar(const std::string& data, std::optional<double> lambda, const std::string& out) {
  const Dataset ds = read_libsvm(fs::path(data));
  const double lam = lambda.value_or(1.0 / static_cast<double>(ds.num_examples()));
  const LogisticModel model(ds, lam);
  const ReferenceSolution ref = run_reference_newton(model, Vector(model.d(), 0.0));
  json j{{"dataset", ds.name},         {"n", model.n()},
         {"d", model.d()},             {"lambda", lam},
         {"f_star", ref.f_star},       {"grad_norm", ref.grad_norm},
         {"iterations", ref.iterations}, {"w_star", ref.w_star}};
  write_text(out, j.dump(2) + "\n");
  std::printf("F* = %.17g (||g|| = %.3g, %zu Newton iterations)\n", ref.f_star, ref.grad_norm,
              ref.iterations);
  return 0;
}

struct RunOpts {
  std::string method = "ssn-cg";
  std::size_t T = 0, max_cg = 10, m_ns = 0, m_sgi = 0, m_svrg = 0;
  double alpha = 1.0, alpha_inner = 1.0;
};

MethodVariant make_variant(const RunOpts& r, std::size_t n, double zeta) {
  switch (parse_method_kind(r.method)) {
    case MethodKind::SsnCg: return SsnCg{r.T ? r.T : std::max<std::size_t>(1, n / 10), r.max_cg, zeta};
    case MethodKind::NewtonSketch:
      return NewtonSketch{r.m_ns ? r.m_ns : std::max<std::size_t>(1, n / 10), r.max_cg, zeta};
    case MethodKind::SsnSgi: return SsnSgi{r.m_sgi ? r.m_sgi : n, r.alpha_inner};
    case MethodKind::Svrg: return Svrg{r.alpha, r.m_svrg ? r.m_svrg : n};
  }
  throw std::logic_error("unreachable");
}

int cmd_run(const CommonOpts& common, const RunOpts& ropts) {
  ExperimentSpec s = common.spec();
  if (s.out_dir.empty()) throw std::invalid_argument("run: --out is required");
  if (s.data.path.empty() && common.config.empty())
    throw std::invalid_argument("run: --data or --config is required");
  const Prepared p = prepare(s);

  MethodConfig cfg;
  cfg.variant = make_variant(ropts, p.model.n(), s.zeta);
  cfg.seed = s.seed;
  cfg.max_outer = s.max_outer;
  cfg.max_ege = s.max_ege;
  cfg.target_error = s.target_error;
  cfg.grad_tol = 0.0;
  cfg.validate();
  const RunTrace t = run_method(p.model, Vector(p.model.d(), 0.0), cfg, {p.f_star, &p.parts.test});

  fs::create_directories(s.out_dir);
  write_trace_csv(fs::path(s.out_dir) / "trace.csv", t);
  json j{{"method", t.method},
         {"dataset", p.full.name},
         {"n_train", p.model.n()},
         {"d", p.model.d()},
         {"lambda", p.model.lambda()},
         {"f_star", p.f_star},
         {"seed", s.seed},
         {"status", to_string(t.status)},
         {"message", t.message},
         {"iterations", t.rows.size() - 1},
         {"final_error", t.rows.back().train_error},
         {"final_ege", t.rows.back().cum_ege},
         {"ege_to_1e-4", ege_to_reach(t, kLooseThreshold).value_or(-1.0)},
         {"ege_to_1e-8", ege_to_reach(t, kTightThreshold).value_or(-1.0)}};
  write_text(fs::path(s.out_dir) / "run.json", j.dump(2) + "\n");
  std::printf("%s: %s after %zu iterations, %.3f EGE, F - F* = %.3e\n", t.method.c_str(),
              to_string(t.status).c_str(), t.rows.size() - 1, t.rows.back().cum_ege,
              t.rows.back().train_error);
  return is_failure(t.status) ? 2 : 0;
}

int cmd_grid(const CommonOpts& common, const std::vector<std::string>& methods,
             const std::vector<std::size_t>& budgets, std::optional<std::size_t> reps) {
  ExperimentSpec s = common.spec();
  if (!methods.empty()) {
    s.methods.clear();
    for (const auto& m : methods) s.methods.push_back(parse_method_kind(m));
  }
  if (!budgets.empty()) s.budgets = budgets;
  if (reps) s.replications = *reps;
  if (s.out_dir.empty()) throw std::invalid_argument("grid: --out is required");
  if (s.data.path.empty() && common.config.empty())
    throw std::invalid_argument("grid: --data or --config is required");
  const GridReport r = run_experiment(s);
  std::printf("%zu cells over %zu budgets; F* = %.17g\n", r.cells.size(), r.budgets.size(), r.f_star);
  for (const auto& [kind, idx] : r.best) {
    const GridCell& c = r.cells[idx];
    std::printf("  best %-14s b=%-7zu EGE to 1e-8: %s  final error %.3e\n", to_string(kind).c_str(),
                c.budget, c.ege_to_tight ? std::to_string(*c.ege_to_tight).c_str() : "not reached",
                c.final_error);
  }
  return 0;
}

int cmd_spectrum(const std::string& data, double t_frac, std::size_t m, std::size_t reps,
                 std::uint64_t seed, std::optional<double> lambda, const std::string& out) {
  const Dataset ds = read_libsvm(fs::path(data));
  const double lam = lambda.value_or(1.0 / static_cast<double>(ds.num_examples()));
  const LogisticModel model(ds, lam);
  const ReferenceSolution ref = run_reference_newton(model, Vector(model.d(), 0.0));
  const auto T = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(t_frac * static_cast<double>(model.n()))), 1, model.n());
  const SpectrumReport r = spectrum_report(model, ref.w_star, T, m, reps, seed);
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  write_spectrum_csv(f, r);
  std::printf("wrote %s (d=%zu, T=%zu, m=%zu, reps=%zu)\n", out.c_str(), r.d, T, m, reps);
  return 0;
}

int cmd_plot(const std::string& traces_dir, const std::string& out) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(traces_dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunTrace> traces;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string header;
    std::getline(in, header);
    if (header.rfind("iter,cum_ege,train_error", 0) != 0) continue;  // not a trace file
    traces.push_back(read_trace_csv(f));
  }
  if (traces.empty()) throw std::runtime_error("plot: no trace CSV files in " + traces_dir);
  for (const auto& p : emit_plots(traces, out, fs::path(traces_dir).filename().string()))
    std::printf("wrote %s\n", p.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Subsampled Newton, Newton-Sketch and SVRG for l2-regularized logistic regression"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic libsvm dataset");
  std::size_t gn = 2000, gd = 50;
  double gk = 100.0;
  std::uint64_t gseed = 1;
  std::string gout;
  gen->add_option("--n", gn, "examples")->check(CLI::PositiveNumber);
  gen->add_option("--d", gd, "features")->check(CLI::PositiveNumber);
  gen->add_option("--kappa", gk, "target Hessian condition number")->check(CLI::Range(1.0, 1e12));
  gen->add_option("--seed", gseed, "seed");
  gen->add_option("--out", gout, "output path")->required();

  auto* fstar = app.add_subcommand("fstar", "solve to high accuracy and report F*");
  std::string fdata, fout;
  double flambda = 0.0;
  fstar->add_option("--data", fdata, "libsvm dataset")->required()->check(CLI::ExistingFile);
  auto* fl = fstar->add_option("--lambda", flambda, "l2 weight (default 1/n)");
  fstar->add_option("--out", fout, "output JSON")->required();

  auto* run = app.add_subcommand("run", "run one method and write its trace");
  CommonOpts run_common;
  run_common.attach(run);
  RunOpts ropts;
  run->add_option("--method", ropts.method, "ssn-cg | newton-sketch | ssn-sgi | svrg")
      ->check(CLI::IsMember({"ssn-cg", "newton-sketch", "ssn-sgi", "svrg"}));
  run->add_option("--T", ropts.T, "SSN-CG Hessian sample size (default n/10)");
  run->add_option("--max-cg", ropts.max_cg, "CG iteration cap");
  run->add_option("--m-ns", ropts.m_ns, "Newton-Sketch rows (default n/10)");
  run->add_option("--m-sgi", ropts.m_sgi, "SGI inner steps (default n)");
  run->add_option("--alpha-inner", ropts.alpha_inner, "SGI step length");
  run->add_option("--m-svrg", ropts.m_svrg, "SVRG inner steps (default n)");
  run->add_option("--alpha", ropts.alpha, "SVRG step length");

  auto* grid = app.add_subcommand("grid", "budget-grid hyper-parameter study");
  CommonOpts grid_common;
  grid_common.attach(grid);
  std::vector<std::string> gmethods;
  std::vector<std::size_t> gbudgets;
  std::size_t greps = 1;
  grid->add_option("--methods", gmethods, "comma separated methods")->delimiter(',');
  grid->add_option("--budgets", gbudgets, "per-iteration budgets (default: nine-level grid)")
      ->delimiter(',');
  auto* greps_opt = grid->add_option("--replications", greps, "seeds per cell");

  auto* spec = app.add_subcommand("spectrum", "eigenvalue bands of subsampled and sketched Hessians at w*");
  std::string sdata, sout;
  double stfrac = 0.5, slambda = 0.0;
  std::size_t sm = 0, sreps = 10;
  std::uint64_t sseed = 0;
  spec->add_option("--data", sdata, "libsvm dataset")->required()->check(CLI::ExistingFile);
  spec->add_option("--t-frac", stfrac, "subsample fraction of n")->check(CLI::Range(0.0, 1.0));
  spec->add_option("--m", sm, "sketch rows")->required()->check(CLI::PositiveNumber);
  spec->add_option("--reps", sreps, "replications")->check(CLI::PositiveNumber);
  spec->add_option("--seed", sseed, "seed");
  auto* sl = spec->add_option("--lambda", slambda, "l2 weight (default 1/n)");
  spec->add_option("--out", sout, "output CSV")->required();

  auto* plot = app.add_subcommand("plot", "SVG charts from a directory of trace CSVs");
  std::string ptraces, pout;
  plot->add_option("--traces", ptraces, "directory of trace CSVs")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", pout, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(gn, gd, gk, gseed, gout);
    if (*fstar) return cmd_fstar(fdata, fl->count() ? std::optional(flambda) : std::nullopt, fout);
    if (*run) return cmd_run(run_common, ropts);
    if (*grid)
      return cmd_grid(grid_common, gmethods, gbudgets,
                      greps_opt->count() ? std::optional(greps) : std::nullopt);
    if (*spec)
      return cmd_spectrum(sdata, stfrac, sm, sreps, sseed,
                          sl->count() ? std::optional(slambda) : std::nullopt, sout);
    if (*plot) return cmd_plot(ptraces, pout);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
