#include "subnewton/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "subnewton/rng.hpp"
#include "subnewton/svg.hpp"

namespace subnewton {

using nlohmann::json;

MethodKind parse_method_kind(const std::string& name) {
  if (name == "ssn-cg") return MethodKind::SsnCg;
  if (name == "newton-sketch") return MethodKind::NewtonSketch;
  if (name == "ssn-sgi") return MethodKind::SsnSgi;
  if (name == "svrg") return MethodKind::Svrg;
  throw std::invalid_argument("unknown method '" + name +
                              "' (expected ssn-cg, newton-sketch, ssn-sgi or svrg)");
}

std::string to_string(MethodKind k) {
  switch (k) {
    case MethodKind::SsnCg: return "ssn-cg";
    case MethodKind::NewtonSketch: return "newton-sketch";
    case MethodKind::SsnSgi: return "ssn-sgi";
    case MethodKind::Svrg: return "svrg";
  }
  return "unknown";
}

std::vector<std::size_t> budget_grid(std::size_t n) {
  if (n < 100) throw std::invalid_argument("budget_grid: n must be >= 100");
  const double nn = static_cast<double>(n);
  const double factors[] = {0.01, 0.02, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  std::vector<std::size_t> out;
  for (double f : factors)
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(nn * f))));
  return out;
}

std::vector<double> default_alpha_grid() {
  std::vector<double> a;
  for (int e = -12; e <= 0; ++e) a.push_back(std::ldexp(1.0, e));
  return a;
}

std::vector<MethodVariant> resolve_hypers(MethodKind kind, std::size_t b, std::size_t n,
                                          const std::vector<double>& alphas, double zeta) {
  std::vector<MethodVariant> out;
  if (b < 2) return out;
  switch (kind) {
    case MethodKind::Svrg:
      for (double a : alphas) out.push_back(Svrg{a, b / 2});
      break;
    case MethodKind::SsnSgi:
      for (double a : alphas) out.push_back(SsnSgi{b, a});
      break;
    case MethodKind::SsnCg:
      for (std::size_t k : kFractionDenominators) {
        if (b % k != 0) continue;
        const std::size_t t = b / k;
        if (t > n) continue;
        out.push_back(SsnCg{t, k, zeta});
      }
      break;
    case MethodKind::NewtonSketch:
      if (b % 2 != 0) break;
      for (std::size_t k : kFractionDenominators) {
        const std::size_t half = b / 2;
        if (half % k != 0) continue;
        out.push_back(NewtonSketch{half / k, k, zeta});
      }
      break;
  }
  return out;
}

void ExperimentSpec::validate() const {
  if (methods.empty()) throw std::invalid_argument("ExperimentSpec: no methods");
  for (std::size_t b : budgets)
    if (b == 0) throw std::invalid_argument("ExperimentSpec: budgets must be positive");
  if (replications < 1) throw std::invalid_argument("ExperimentSpec: replications must be >= 1");
  if (alphas.empty()) throw std::invalid_argument("ExperimentSpec: empty alpha grid");
}

ExperimentSpec spec_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentSpec s;
  if (j.contains("data")) {
    const json& d = j.at("data");
    if (d.contains("path")) s.data.path = d.at("path").get<std::string>();
    if (d.contains("synth")) {
      const json& g = d.at("synth");
      s.data.synth_n = g.value("n", s.data.synth_n);
      s.data.synth_d = g.value("d", s.data.synth_d);
      s.data.synth_kappa = g.value("kappa", s.data.synth_kappa);
      s.data.synth_seed = g.value("seed", s.data.synth_seed);
    }
  }
  if (j.contains("methods"))
    for (const auto& m : j.at("methods")) s.methods.push_back(parse_method_kind(m.get<std::string>()));
  s.budgets = j.value("budgets", s.budgets);
  s.alphas = j.value("alphas", s.alphas);
  s.replications = j.value("replications", s.replications);
  s.seed = j.value("seed", s.seed);
  s.out_dir = j.value("out_dir", s.out_dir);
  s.test_frac = j.value("test_frac", s.test_frac);
  if (j.contains("lambda") && !j.at("lambda").is_null()) s.lambda = j.at("lambda").get<double>();
  s.max_outer = j.value("max_outer", s.max_outer);
  s.max_ege = j.value("max_ege", s.max_ege);
  s.target_error = j.value("target_error", s.target_error);
  s.zeta = j.value("zeta", s.zeta);
  s.threads = j.value("threads", s.threads);
  return s;
}

std::string spec_to_json(const ExperimentSpec& s) {
  json j;
  if (!s.data.path.empty()) {
    j["data"]["path"] = s.data.path;
  } else {
    j["data"]["synth"] = {{"n", s.data.synth_n},
                          {"d", s.data.synth_d},
                          {"kappa", s.data.synth_kappa},
                          {"seed", s.data.synth_seed}};
  }
  json methods = json::array();
  for (MethodKind k : s.methods) methods.push_back(to_string(k));
  j["methods"] = methods;
  j["budgets"] = s.budgets;
  j["alphas"] = s.alphas;
  j["replications"] = s.replications;
  j["seed"] = s.seed;
  j["out_dir"] = s.out_dir;
  j["test_frac"] = s.test_frac;
  j["lambda"] = s.lambda ? json(*s.lambda) : json(nullptr);
  j["max_outer"] = s.max_outer;
  j["max_ege"] = s.max_ege;
  j["target_error"] = s.target_error;
  j["zeta"] = s.zeta;
  j["threads"] = s.threads;
  return j.dump(2);
}

std::optional<double> ege_to_reach(const RunTrace& t, double threshold) {
  for (const auto& row : t.rows)
    if (row.train_error <= threshold) return row.cum_ege;
  return std::nullopt;
}

std::optional<std::size_t> best_cell(const std::vector<GridCell>& cells, MethodKind kind) {
  std::optional<std::size_t> best;
  auto better = [&](const GridCell& a, const GridCell& b) {
    if (a.ege_to_tight && b.ege_to_tight) return *a.ege_to_tight < *b.ege_to_tight;
    if (a.ege_to_tight || b.ege_to_tight) return a.ege_to_tight.has_value();
    return a.final_error < b.final_error;
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const GridCell& c = cells[i];
    if (c.kind != kind || is_failure(c.status) || !std::isfinite(c.final_error)) continue;
    if (!best || better(c, cells[*best])) best = i;
  }
  return best;
}

namespace {

struct CellKey {
  MethodKind kind;
  std::size_t budget;
  std::size_t hyper_index;
  MethodVariant variant;
};

std::string variant_label(const MethodVariant& v) {
  char buf[128];
  if (const auto* c = std::get_if<SsnCg>(&v))
    std::snprintf(buf, sizeof buf, "T=%zu,max_cg=%zu", c->T, c->max_cg);
  else if (const auto* c = std::get_if<NewtonSketch>(&v))
    std::snprintf(buf, sizeof buf, "m_ns=%zu,max_cg=%zu", c->m_ns, c->max_cg);
  else if (const auto* c = std::get_if<SsnSgi>(&v))
    std::snprintf(buf, sizeof buf, "m_sgi=%zu,alpha=%g", c->m_sgi, c->alpha_inner);
  else {
    const auto& s = std::get<Svrg>(v);
    std::snprintf(buf, sizeof buf, "m_svrg=%zu,alpha=%g", s.m_svrg, s.alpha);
  }
  return buf;
}

json variant_json(const MethodVariant& v) {
  json j;
  j["method"] = method_name(v);
  if (const auto* c = std::get_if<SsnCg>(&v)) {
    j["T"] = c->T;
    j["max_cg"] = c->max_cg;
    j["zeta"] = c->zeta;
  } else if (const auto* c = std::get_if<NewtonSketch>(&v)) {
    j["m_ns"] = c->m_ns;
    j["max_cg"] = c->max_cg;
    j["zeta"] = c->zeta;
  } else if (const auto* c = std::get_if<SsnSgi>(&v)) {
    j["m_sgi"] = c->m_sgi;
    j["alpha"] = c->alpha_inner;
  } else {
    const auto& s = std::get<Svrg>(v);
    j["m_svrg"] = s.m_svrg;
    j["alpha"] = s.alpha;
  }
  return j;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string cell_file_name(const GridCell& c, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04zu_", index);
  std::string label = variant_label(c.variant);
  for (char& ch : label)
    if (ch == ',' || ch == '=') ch = '_';
  return buf + to_string(c.kind) + "_b" + std::to_string(c.budget) + "_" + label + ".csv";
}

GridCell run_cell(const ExperimentSpec& spec, const CellKey& key, const LogisticModel& model,
                  const Dataset* test, double f_star) {
  GridCell cell{key.kind, key.budget, key.variant};
  cell.seed = derive_seed(spec.seed, to_string(key.kind) + "/b" + std::to_string(key.budget),
                          key.hyper_index);
  MethodConfig cfg;
  cfg.variant = key.variant;
  cfg.max_outer = spec.max_outer;
  cfg.max_ege = spec.max_ege;
  cfg.target_error = spec.target_error;
  cfg.grad_tol = 0.0;
  const Reporting rep{f_star, test};
  const Vector w0(model.d(), 0.0);

  std::vector<double> tight, loose;
  double best = -std::numeric_limits<double>::infinity();
  double final_err = -std::numeric_limits<double>::infinity();
  bool all_tight = true, all_loose = true;
  for (std::size_t r = 0; r < spec.replications; ++r) {
    cfg.seed = r == 0 ? cell.seed : derive_seed(cell.seed, "replication", r);
    RunTrace t = run_method(model, w0, cfg, rep);
    double run_best = std::numeric_limits<double>::infinity();
    for (const auto& row : t.rows) run_best = std::min(run_best, row.train_error);
    // Replications are summarized pessimistically: worst best/final error,
    // mean EGE only when every replicate reached the threshold.
    best = std::max(best, run_best);
    final_err = std::max(final_err, t.rows.back().train_error);
    if (auto e = ege_to_reach(t, kTightThreshold)) tight.push_back(*e); else all_tight = false;
    if (auto e = ege_to_reach(t, kLooseThreshold)) loose.push_back(*e); else all_loose = false;
    if (r == 0 || is_failure(t.status)) cell.status = t.status;
    if (r == 0) {
      cell.iterations = t.rows.size() - 1;
      cell.trace = std::move(t);
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  cell.best_error = best;
  cell.final_error = is_failure(cell.status) ? std::numeric_limits<double>::infinity() : final_err;
  if (all_tight) cell.ege_to_tight = mean(tight);
  if (all_loose) cell.ege_to_loose = mean(loose);
  cell.trace.method = to_string(key.kind);
  return cell;
}

}  // namespace

GridReport run_grid(const ExperimentSpec& spec, const LogisticModel& model, const Dataset* test,
                    double f_star) {
  spec.validate();
  GridReport report;
  report.dataset = model.data().name;
  report.n = model.n();
  report.d = model.d();
  report.lambda = model.lambda();
  report.f_star = f_star;
  report.budgets = spec.budgets.empty() ? budget_grid(model.n()) : spec.budgets;

  std::vector<CellKey> keys;
  for (MethodKind kind : spec.methods) {
    for (std::size_t b : report.budgets) {
      const auto variants = resolve_hypers(kind, b, model.n(), spec.alphas, spec.zeta);
      if (variants.empty()) report.skipped.emplace_back(kind, b);
      for (std::size_t h = 0; h < variants.size(); ++h) keys.push_back({kind, b, h, variants[h]});
    }
  }

  std::vector<std::optional<GridCell>> results(keys.size());
  std::vector<std::string> errors(keys.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      try {
        results[i] = run_cell(spec, keys[i], model, test, f_star);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::size_t threads = spec.threads ? spec.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(keys.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (results[i]) {
      report.cells.push_back(std::move(*results[i]));
    } else {
      GridCell failed{keys[i].kind, keys[i].budget, keys[i].variant};
      failed.status = RunStatus::Diverged;
      failed.final_error = failed.best_error = std::numeric_limits<double>::infinity();
      failed.trace.method = to_string(keys[i].kind);
      failed.trace.message = errors[i];
      report.cells.push_back(std::move(failed));
    }
  }
  for (MethodKind kind : spec.methods)
    if (auto b = best_cell(report.cells, kind)) report.best.emplace_back(kind, *b);
  return report;
}

std::string grid_summary_json(const GridReport& r) {
  json j;
  j["dataset"] = r.dataset;
  j["n"] = r.n;
  j["d"] = r.d;
  j["lambda"] = r.lambda;
  j["f_star"] = r.f_star;
  j["budgets"] = r.budgets;
  j["fraction_ladder"] = r.fraction_ladder;
  j["thresholds"] = {kLooseThreshold, kTightThreshold};
  json cells = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const GridCell& c = r.cells[i];
    json cj = variant_json(c.variant);
    cj["index"] = i;
    cj["budget"] = c.budget;
    cj["seed"] = c.seed;
    cj["status"] = to_string(c.status);
    cj["iterations"] = c.iterations;
    cj["best_error"] = std::isfinite(c.best_error) ? json(c.best_error) : json(nullptr);
    cj["final_error"] = std::isfinite(c.final_error) ? json(c.final_error) : json(nullptr);
    cj["ege_to_1e-4"] = optional_json(c.ege_to_loose);
    cj["ege_to_1e-8"] = optional_json(c.ege_to_tight);
    if (!c.trace.message.empty()) cj["message"] = c.trace.message;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  json best = json::object();
  for (const auto& [kind, idx] : r.best) {
    const GridCell& c = r.cells[idx];
    json bj = variant_json(c.variant);
    bj["cell"] = idx;
    bj["budget"] = c.budget;
    bj["ege_to_1e-8"] = optional_json(c.ege_to_tight);
    bj["final_error"] = c.final_error;
    best[to_string(kind)] = bj;
  }
  j["best"] = best;
  json skipped = json::array();
  for (const auto& [kind, b] : r.skipped) skipped.push_back({{"method", to_string(kind)}, {"budget", b}});
  j["skipped"] = skipped;
  return j.dump(2);
}

void write_grid_report(const std::filesystem::path& dir, const GridReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "cells");
  {
    std::ofstream out(dir / "grid_report.json");
    out << grid_summary_json(report) << '\n';
  }
  {
    std::ofstream out(dir / "summary.csv");
    out << "method,budget,params,status,iterations,final_error,ege_to_1e-4,ege_to_1e-8,best\n";
    for (std::size_t i = 0; i < report.cells.size(); ++i) {
      const GridCell& c = report.cells[i];
      const bool is_best = std::any_of(report.best.begin(), report.best.end(),
                                       [&](const auto& b) { return b.second == i; });
      char buf[512];
      std::snprintf(buf, sizeof buf, "%s,%zu,\"%s\",%s,%zu,%.6g,%s,%s,%d\n",
                    to_string(c.kind).c_str(), c.budget, variant_label(c.variant).c_str(),
                    to_string(c.status).c_str(), c.iterations, c.final_error,
                    c.ege_to_loose ? std::to_string(*c.ege_to_loose).c_str() : "",
                    c.ege_to_tight ? std::to_string(*c.ege_to_tight).c_str() : "", is_best ? 1 : 0);
      out << buf;
    }
  }
  for (std::size_t i = 0; i < report.cells.size(); ++i)
    write_trace_csv(dir / "cells" / cell_file_name(report.cells[i], i), report.cells[i].trace);

  std::vector<RunTrace> best_traces;
  for (const auto& [kind, idx] : report.best) {
    RunTrace t = report.cells[idx].trace;
    t.method = to_string(kind);
    best_traces.push_back(std::move(t));
  }
  if (!best_traces.empty()) emit_plots(best_traces, dir / "plots", report.dataset);
}

GridReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  Dataset full = spec.data.path.empty()
                     ? synth_gen(spec.data.synth_n, spec.data.synth_d, spec.data.synth_kappa,
                                 spec.data.synth_seed)
                     : read_libsvm(std::filesystem::path(spec.data.path));
  SplitDataset parts = split(full, spec.test_frac, derive_seed(spec.seed, "split"));
  const double lambda = spec.lambda.value_or(1.0 / static_cast<double>(parts.train.num_examples()));
  const LogisticModel model(std::move(parts.train), lambda);
  const ReferenceSolution ref = run_reference_newton(model, Vector(model.d(), 0.0));
  GridReport report = run_grid(spec, model, &parts.test, ref.f_star);
  report.dataset = full.name;
  if (!spec.out_dir.empty()) {
    write_grid_report(spec.out_dir, report);
    std::ofstream(std::filesystem::path(spec.out_dir) / "spec.json") << spec_to_json(spec) << '\n';
  }
  return report;
}

void write_trace_csv(std::ostream& out, const RunTrace& t) {
  out << "iter,cum_ege,train_error,test_loss,step_len,inner_iters,wall_ms\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%zu,%.6f\n", r.iter, r.cum_ege,
                  r.train_error, r.test_loss, r.step_len, r.inner_iters, r.wall_ms);
    out << buf;
  }
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_csv(out, t);
}

RunTrace read_trace_csv(std::istream& in, std::string method) {
  RunTrace t;
  t.method = std::move(method);
  std::string line;
  if (!std::getline(in, line) || line.rfind("iter,cum_ege,train_error", 0) != 0)
    throw std::runtime_error("read_trace_csv: missing header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 7)
      throw std::runtime_error("read_trace_csv: line " + std::to_string(line_no) + " has " +
                               std::to_string(f.size()) + " fields");
    TraceRow r;
    try {
      r.iter = std::stoull(f[0]);
      r.cum_ege = std::stod(f[1]);
      r.train_error = std::stod(f[2]);
      r.test_loss = std::stod(f[3]);
      r.step_len = std::stod(f[4]);
      r.inner_iters = std::stoull(f[5]);
      r.wall_ms = std::stod(f[6]);
    } catch (const std::exception&) {
      throw std::runtime_error("read_trace_csv: bad number on line " + std::to_string(line_no));
    }
    t.rows.push_back(r);
  }
  return t;
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_trace_csv(in, path.stem().string());
}

std::vector<std::filesystem::path> emit_plots(const std::vector<RunTrace>& traces,
                                              const std::filesystem::path& out_dir,
                                              const std::string& title) {
  if (traces.empty()) throw std::invalid_argument("emit_plots: no traces");
  std::filesystem::create_directories(out_dir);

  std::vector<svg::Series> by_iter, by_ege, test_by_ege;
  for (const auto& t : traces) {
    svg::Series a{t.method, {}, {}}, b{t.method, {}, {}}, c{t.method, {}, {}};
    for (const auto& r : t.rows) {
      const double err = std::max(r.train_error, kLogFloor);
      a.x.push_back(static_cast<double>(r.iter));
      a.y.push_back(err);
      b.x.push_back(r.cum_ege);
      b.y.push_back(err);
      c.x.push_back(r.cum_ege);
      c.y.push_back(r.test_loss);
    }
    by_iter.push_back(std::move(a));
    by_ege.push_back(std::move(b));
    test_by_ege.push_back(std::move(c));
  }
  const std::string prefix = title.empty() ? "" : title + ": ";
  const std::vector<std::pair<std::string, std::string>> files{
      {"error_vs_iter.svg", svg::line_chart(by_iter, prefix + "training error vs iterations",
                                            "iterations", "F(w) - F*", true, kLogFloor)},
      {"error_vs_ege.svg",
       svg::line_chart(by_ege, prefix + "training error vs effective gradient evaluations",
                       "effective gradient evaluations", "F(w) - F*", true, kLogFloor)},
      {"test_loss_vs_ege.svg",
       svg::line_chart(test_by_ege, prefix + "test loss vs effective gradient evaluations",
                       "effective gradient evaluations", "test loss", true, kLogFloor)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, body] : files) {
    std::ofstream(out_dir / name) << body;
    written.push_back(out_dir / name);
  }
  {
    std::ofstream out(out_dir / "traces.csv");
    out << "method,iter,cum_ege,train_error,test_loss,step_len,inner_iters,wall_ms\n";
    char buf[320];
    for (const auto& t : traces)
      for (const auto& r : t.rows) {
        std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%zu,%.6f\n",
                      t.method.c_str(), r.iter, r.cum_ege, r.train_error, r.test_loss, r.step_len,
                      r.inner_iters, r.wall_ms);
        out << buf;
      }
    written.push_back(out_dir / "traces.csv");
  }
  return written;
}

}  // namespace subnewton
