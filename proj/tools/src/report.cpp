#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <spdlog/spdlog.h>

namespace maxent::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kCheckpointStride = 10;
constexpr int kAcceleratedCap = 40;

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_json(const RealVector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json mat_json(const RealMatrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    RealVector r = m.row(i).transpose();
    rows.push_back(vec_json(r));
  }
  return rows;
}

json optional_int(const std::optional<int>& v) {
  return v ? json(*v) : json(nullptr);
}

// NaN and infinity have no JSON spelling.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool is_accelerated(Method m) {
  return m == Method::AMQIS || m == Method::LBFGSGD;
}

fs::path instance_dir(const ExperimentConfig& cfg, const InstanceSpec& spec) {
  return fs::path(cfg.output_dir) / instance_dir_name(spec);
}

std::string md_cell(const std::optional<int>& steps) {
  return steps ? std::to_string(*steps) : std::string("not-reached");
}

// Component orthogonal to the all-ones direction.
RealVector centred(const RealVector& v) {
  return (v.array() - v.mean()).matrix();
}

SolverTrace centred_trace(const SolverTrace& trace) {
  SolverTrace out = trace;
  for (auto& rec : out.records) rec.lambda = centred(rec.lambda);
  return out;
}

struct CheckList {
  json items = json::array();
  bool all_pass = true;

  void at_most(const std::string& name, double value, double limit) {
    add(name, value, "<=", limit, value <= limit);
  }
  void at_least(const std::string& name, double value, double limit) {
    add(name, value, ">=", limit, value >= limit);
  }
  void flag(const std::string& name, bool ok) {
    items.push_back({{"name", name}, {"pass", ok}});
    all_pass = all_pass && ok;
  }

 private:
  void add(const std::string& name, double value, const char* rel,
           double limit, bool ok) {
    ok = ok && std::isfinite(value);
    items.push_back({{"name", name},
                     {"value", number(value)},
                     {"relation", rel},
                     {"limit", limit},
                     {"pass", ok}});
    all_pass = all_pass && ok;
  }
};

void bound_checks(CheckList& checks, const std::string& where,
                  const BoundMargins& b) {
  const BoundTolerances tol;
  if (!b.hypotheses_met) {
    checks.flag(where + ": hypotheses-unmet", false);
    return;
  }
  checks.at_least(where + ": lambda_min(P - L)", b.min_eig_p_minus_l, -tol.p_minus_l);
  checks.at_least(where + ": min Lambda entry", b.min_lambda_entry, -tol.lambda_entry);
  checks.at_least(where + ": min column sum of Delta - Lambda / Z",
                  b.min_column_sum / b.z, -tol.column_sum);
  checks.at_least(where + ": lambda_min(Delta - Lambda) / Z",
                  b.min_eig_delta_minus_lambda / b.z, -tol.delta_minus_lambda);
  checks.at_most(where + ": ||Lambda - Z(L+Q)||_F / Z", b.identity_residual,
                 tol.identity);
  checks.flag(where + ": rank Q = 1", b.rank_q == 1);
}

json bounds_json(const BoundMargins& b) {
  return {{"hypotheses_met", b.hypotheses_met},
          {"min_eig_p_minus_l", number(b.min_eig_p_minus_l)},
          {"min_lambda_entry", number(b.min_lambda_entry)},
          {"min_column_sum", number(b.min_column_sum)},
          {"min_eig_delta_minus_lambda", number(b.min_eig_delta_minus_lambda)},
          {"identity_residual", number(b.identity_residual)},
          {"rank_q", b.rank_q},
          {"z", number(b.z)}};
}

double relative(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

const SolverConfig* find_method(const ExperimentConfig& cfg, Method m) {
  for (const auto& s : cfg.methods) {
    if (s.method == m) return &s;
  }
  return nullptr;
}

json diagnose_instance(const ExperimentConfig& cfg, const InstanceSpec& spec,
                       bool& pass) {
  const ProblemInstance inst = build_instance(cfg, spec);
  const ObservableFamily& obs = inst.observables;
  const Index m = static_cast<Index>(obs.size());
  const bool flat = obs.complete();

  SolverConfig qis_cfg;
  qis_cfg.method = Method::QIS;
  qis_cfg.max_iters = 400000;
  if (const auto* c = find_method(cfg, Method::QIS)) qis_cfg = *c;
  SolverConfig gd_cfg;
  gd_cfg.method = Method::GD;
  gd_cfg.max_iters = 400000;
  if (const auto* c = find_method(cfg, Method::GD)) gd_cfg = *c;
  const double eta = gd_cfg.eta.value_or(static_cast<double>(m));

  const RealVector& lambda_star = inst.ground_truth->lambda;
  const GibbsSnapshot snap = snapshot(lambda_star, obs);
  const HessianBundle bundle = hessian(snap, obs);
  const DiagnosticsReport rep = build_diagnostics(snap, obs, eta);
  const BoundMargins at_zero =
      verify_bounds(hessian(snapshot(RealVector::Zero(m), obs), obs), obs);

  CheckList checks;
  bound_checks(checks, "lambda = 0", at_zero);
  bound_checks(checks, "lambda*", rep.bounds);

  // Quantum belief propagation with H = lambda* . F and V = F_1.
  checks.at_most("QBP anticommutator form vs finite difference", rep.qbp.anticommutator, 1e-6);
  checks.at_most("QBP sandwich form vs finite difference", rep.qbp.sandwich, 1e-6);
  checks.at_most("QBP closed forms agree", rep.qbp.forms_agreement, 1e-9);
  checks.at_least("QBP min eigenvalue of Psi(V)", rep.qbp_min_eig_psi, -1e-12);
  checks.at_most("QBP |tr Psi(V) - tr V|", rep.qbp_trace_error, 1e-10);

  // Jacobians.
  const RealMatrix fd_qis = fd_jacobian_qis(obs, inst.alpha, lambda_star);
  const RealMatrix fd_gd = fd_jacobian_gd(obs, inst.alpha, lambda_star, eta);
  const double fd_r_qis = spectral_radius(fd_qis);
  const double fd_r_gd = spectral_radius(fd_gd);
  checks.at_most("max |J_QIS - FD|", (rep.jacobian_qis - fd_qis).cwiseAbs().maxCoeff(), 1e-5);
  checks.at_most("max |J_GD - FD|", (rep.jacobian_gd - fd_gd).cwiseAbs().maxCoeff(), 1e-5);
  checks.at_most("r(J_QIS) closed form vs FD, relative",
                 relative(fd_r_qis, rep.spectral_radius_qis), 1e-4);
  checks.at_most("r(J_GD) closed form vs FD, relative",
                 relative(fd_r_gd, rep.spectral_radius_gd), 1e-4);
  checks.at_most("r(J_QIS) symmetric vs direct",
                 std::abs(rep.spectral_radius_qis - rep.spectral_radius_qis_direct), 1e-10);
  checks.at_least("min eigenvalue of I - P^-1/2 L P^-1/2", rep.qis_eig_min, -1e-10);
  checks.at_most("max eigenvalue of I - P^-1/2 L P^-1/2", rep.qis_eig_max, 1.0 + 1e-10);

  // A completed family is invariant under lambda -> lambda + c 1, so L has a
  // null vector and both Jacobians keep eigenvalue 1 along it. Rates are then
  // measured on the complement.
  const RealVector p_sqrt = bundle.P.diagonal().cwiseSqrt();
  RealMatrix sym = jacobian_qis_symmetric(bundle);
  RealMatrix gd = rep.jacobian_gd;
  double min_eig_l = rep.min_eig_l;
  if (flat) {
    const RealVector v = p_sqrt.normalized();
    sym -= v * v.transpose();
    const RealVector ones = RealVector::Ones(m) / std::sqrt(static_cast<double>(m));
    gd -= ones * ones.transpose();
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(bundle.L);
    min_eig_l = es.eigenvalues()[1];
  }
  const double r_qis = spectral_radius(sym, MatrixSymmetry::Symmetric);
  const double r_gd = spectral_radius(gd, MatrixSymmetry::Symmetric);
  checks.at_least(flat ? "lambda_min(L) off the flat direction" : "lambda_min(L)",
                  min_eig_l, std::numeric_limits<double>::min());

  // Empirical Ostrowski rates.
  const SolverTrace qis = run(inst, qis_cfg);
  const SolverTrace gdt = run(inst, gd_cfg);
  json rates;
  rates["qis_status"] = std::string(to_string(qis.status));
  rates["gd_status"] = std::string(to_string(gdt.status));
  rates["qis_iterations"] = qis.iterations();
  rates["gd_iterations"] = gdt.iterations();
  rates["spectral_radius_qis"] = r_qis;
  rates["spectral_radius_gd"] = r_gd;
  try {
    const double e_qis = flat ? empirical_rate(centred_trace(qis), centred(lambda_star))
                              : empirical_rate(qis, lambda_star);
    const double e_gd = flat ? empirical_rate(centred_trace(gdt), centred(lambda_star))
                             : empirical_rate(gdt, lambda_star);
    rates["empirical_qis"] = e_qis;
    rates["empirical_gd"] = e_gd;
    checks.flag("QIS converged", qis.status == Status::Converged);
    checks.flag("GD converged", gdt.status == Status::Converged);
    checks.at_most("QIS empirical rate vs r(J_QIS), relative", relative(e_qis, r_qis), 0.15);
    checks.at_least("GD empirical rate - QIS empirical rate", e_gd - e_qis, 0.0);
    rates["gd_rate_relative_error"] = relative(e_gd, r_gd);
  } catch (const InsufficientDataError& e) {
    rates["error"] = e.what();
    checks.flag("empirical rates available", false);
  }

  pass = pass && checks.all_pass;
  json out;
  out["label"] = inst.label;
  out["seed"] = spec.seed;
  out["complete"] = flat;
  out["observables"] = m;
  out["beta_effective"] = inst.beta;
  out["all_pass"] = checks.all_pass;
  out["checks"] = checks.items;
  out["bounds_lambda_zero"] = bounds_json(at_zero);
  out["bounds_lambda_star"] = bounds_json(rep.bounds);
  out["qbp"] = {{"anticommutator", rep.qbp.anticommutator},
                {"sandwich", rep.qbp.sandwich},
                {"forms_agreement", rep.qbp.forms_agreement},
                {"min_eig_psi", rep.qbp_min_eig_psi},
                {"trace_error", rep.qbp_trace_error}};
  out["jacobian"] = {{"spectral_radius_qis", rep.spectral_radius_qis},
                     {"spectral_radius_qis_direct", rep.spectral_radius_qis_direct},
                     {"spectral_radius_qis_fd", fd_r_qis},
                     {"spectral_radius_gd", rep.spectral_radius_gd},
                     {"spectral_radius_gd_fd", fd_r_gd},
                     {"eta", eta},
                     {"jacobian_qis", mat_json(rep.jacobian_qis)},
                     {"jacobian_gd", mat_json(rep.jacobian_gd)}};
  out["min_eig_l"] = min_eig_l;
  out["rates"] = rates;
  return out;
}

}  // namespace

void write_trace_csv(const fs::path& path, const SolverTrace& trace) {
  auto out = open_out(path);
  out << "iter,gap,residual,wall_ns\n";
  for (const auto& rec : trace.records) {
    out << rec.iteration << ',' << g17(rec.gap) << ',' << g17(rec.residual)
        << ',' << rec.wall_ns << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

json lambda_checkpoints(const SolverTrace& trace) {
  json points = json::array();
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    const bool last = i + 1 == trace.records.size();
    if (rec.iteration % kCheckpointStride == 0 || last) {
      points.push_back({{"iter", rec.iteration}, {"lambda", vec_json(rec.lambda)}});
    }
  }
  return {{"method", std::string(to_string(trace.method))},
          {"status", std::string(to_string(trace.status))},
          {"checkpoints", points}};
}

json instance_summary(const ExperimentConfig& cfg, const ExperimentResult& result,
                      std::size_t i) {
  const InstanceSpec& spec = result.specs[i];
  const ProblemInstance& inst = result.instances[i];
  json runs = json::array();
  for (const auto& r : result.runs) {
    if (r.instance_index != i) continue;
    json row;
    row["method"] = r.tag;
    row["config"] = to_json(cfg.methods[r.method_index]);
    row["trace"] = r.tag + ".csv";
    row["status"] = std::string(to_string(r.trace.status));
    if (!r.trace.failure.empty()) row["failure"] = r.trace.failure;
    row["iterations"] = r.trace.iterations();
    row["steps_to_precision"] = optional_int(r.steps);
    row["final_gap"] = number(r.trace.final_gap());
    row["final_residual"] = number(r.trace.records.back().residual);
    row["mu_hat"] = r.mu_hat ? vec_json(*r.mu_hat) : json(nullptr);
    row["mu_error"] = r.mu_error ? number(*r.mu_error) : json(nullptr);
    runs.push_back(row);
  }
  json out;
  out["label"] = inst.label;
  out["family"] = std::string(to_string(spec.kind));
  out["n_qubits"] = spec.n_qubits;
  out["seed"] = spec.seed;
  out["beta"] = cfg.beta;
  out["beta_effective"] = inst.beta;
  out["complete"] = inst.observables.complete();
  out["observables"] = inst.observables.size();
  out["precision"] = cfg.precision;
  if (inst.ground_truth) {
    out["mu_star"] = vec_json(inst.ground_truth->mu);
    out["dual_optimum"] = inst.ground_truth->dual_optimum;
  }
  out["runs"] = runs;
  return out;
}

bool write_solve_outputs(const ExperimentConfig& cfg,
                         const ExperimentResult& result) {
  bool ok = true;
  json all = json::array();
  for (std::size_t i = 0; i < result.specs.size(); ++i) {
    const fs::path dir = instance_dir(cfg, result.specs[i]);
    for (const auto& r : result.runs) {
      if (r.instance_index != i) continue;
      write_trace_csv(dir / (r.tag + ".csv"), r.trace);
      write_json(dir / (r.tag + ".lambda.json"), lambda_checkpoints(r.trace));
      ok = ok && r.trace.status == Status::Converged;
    }
    json summary = instance_summary(cfg, result, i);
    write_json(dir / "summary.json", summary);
    all.push_back(std::move(summary));
  }
  write_json(fs::path(cfg.output_dir) / "config.json", to_json(cfg));
  write_json(fs::path(cfg.output_dir) / "summary.json", all);
  return ok;
}

std::vector<BenchmarkRow> bench_rows(const ExperimentConfig& cfg,
                                     const ExperimentResult& result) {
  const std::size_t k = cfg.methods.size();
  std::vector<BenchmarkRow> rows(result.specs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    BenchmarkRow& row = rows[i];
    row.label = result.instances[i].label;
    if (cfg.seeds.size() > 1) {
      row.label += "-seed" + std::to_string(result.specs[i].seed);
    }
    row.steps.resize(k);
    row.wall_seconds.resize(k);
    row.final_gap.resize(k);
    std::optional<int> qis;
    std::optional<int> gd;
    bool have_qis = false;
    bool have_gd = false;
    for (const auto& r : result.runs) {
      if (r.instance_index != i) continue;
      const std::size_t j = r.method_index;
      const SolverConfig& mc = cfg.methods[j];
      row.steps[j] = r.steps;
      row.wall_seconds[j] = r.wall_seconds;
      row.final_gap[j] = r.trace.final_gap();
      if (!r.steps) row.flags.push_back(r.tag + " not-reached");
      if (is_accelerated(mc.method) && r.steps && *r.steps > kAcceleratedCap) {
        row.flags.push_back(r.tag + " over " + std::to_string(kAcceleratedCap));
      }
      if (mc.method == Method::QIS && !have_qis) {
        qis = r.steps;
        have_qis = true;
      }
      if (mc.method == Method::GD && !have_gd) {
        gd = r.steps;
        have_gd = true;
      }
    }
    if (have_qis && have_gd && (!qis || (gd && *qis >= *gd))) {
      row.flags.push_back("QIS not ahead of GD");
    }
  }
  return rows;
}

bool write_bench_table(const ExperimentConfig& cfg, const ExperimentResult& result,
                       const std::vector<BenchmarkRow>& rows) {
  const fs::path dir(cfg.output_dir);
  bool clean = true;
  {
    auto csv = open_out(dir / "bench_table.csv");
    csv << "instance";
    for (const auto& t : result.tags) csv << ',' << t << "_steps";
    for (const auto& t : result.tags) csv << ',' << t << "_seconds";
    for (const auto& t : result.tags) csv << ',' << t << "_final_gap";
    csv << ",flags\n";
    for (const auto& row : rows) {
      csv << row.label;
      for (const auto& s : row.steps) csv << ',' << (s ? std::to_string(*s) : "");
      for (double w : row.wall_seconds) csv << ',' << g17(w);
      for (double g : row.final_gap) csv << ',' << g17(g);
      csv << ',';
      for (std::size_t f = 0; f < row.flags.size(); ++f) {
        csv << (f ? ";" : "") << row.flags[f];
      }
      csv << '\n';
      clean = clean && row.flags.empty();
    }
  }
  auto md = open_out(dir / "bench_table.md");
  char prec[32];
  std::snprintf(prec, sizeof(prec), "%g", cfg.precision);
  md << "Steps to reach a dual gap of " << prec << "\n\n| instance |";
  for (const auto& t : result.tags) md << ' ' << t << " |";
  md << " flags |\n|---|";
  for (std::size_t j = 0; j < result.tags.size(); ++j) md << "---:|";
  md << "---|\n";
  double total = 0.0;
  for (const auto& row : rows) {
    md << "| " << row.label << " |";
    for (const auto& s : row.steps) md << ' ' << md_cell(s) << " |";
    md << ' ';
    for (std::size_t f = 0; f < row.flags.size(); ++f) {
      md << (f ? "; " : "") << row.flags[f];
    }
    md << " |\n";
    for (double w : row.wall_seconds) total += w;
  }
  char line[96];
  std::snprintf(line, sizeof(line), "\nSolver time summed over cells: %.1f s\n", total);
  md << line;
  return clean;
}

BenchOutcome run_bench(ExperimentConfig cfg, int jobs) {
  // Step counts need every method to run at least down to the precision.
  for (auto& m : cfg.methods) m.tol = std::min(m.tol, cfg.precision);
  BenchOutcome out;
  out.result = run_experiment(cfg, jobs);
  write_solve_outputs(cfg, out.result);
  out.rows = bench_rows(cfg, out.result);
  out.clean = write_bench_table(cfg, out.result, out.rows);
  out.config = std::move(cfg);
  return out;
}

DiagnoseOutcome run_diagnose(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const auto specs = expand_instances(cfg);
  std::vector<json> parts(specs.size());
  std::vector<char> passes(specs.size(), 1);
  parallel_for(specs.size(), jobs, [&](std::size_t i) {
    bool pass = true;
    parts[i] = diagnose_instance(cfg, specs[i], pass);
    passes[i] = pass;
    spdlog::info("diagnose {}: {}", instance_dir_name(specs[i]),
                 pass ? "pass" : "FAIL");
  });

  DiagnoseOutcome outcome;
  outcome.report["config"] = to_json(cfg);
  outcome.report["instances"] = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    outcome.report["instances"].push_back(parts[i]);
    outcome.all_pass = outcome.all_pass && passes[i];
  }
  outcome.report["all_pass"] = outcome.all_pass;
  write_json(fs::path(cfg.output_dir) / "diagnostics.json", outcome.report);
  return outcome;
}

}  // namespace maxent::cli
