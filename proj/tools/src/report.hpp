#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "runner.hpp"

namespace maxent::cli {

/// CSV with header iter,gap,residual,wall_ns; doubles printed with %.17g.
void write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace);

/// lambda at every 10th iterate and at the final one.
nlohmann::json lambda_checkpoints(const SolverTrace& trace);

/// Per-instance summary: every number in it follows from the trace files and
/// the instance definition.
nlohmann::json instance_summary(const ExperimentConfig& cfg,
                                const ExperimentResult& result,
                                std::size_t instance_index);

/// Writes traces, sidecars and summaries under cfg.output_dir. Returns true
/// when every run converged.
bool write_solve_outputs(const ExperimentConfig& cfg,
                         const ExperimentResult& result);

struct BenchmarkRow {
  std::string label;
  std::vector<std::optional<int>> steps;  // per method; empty = not reached
  std::vector<double> wall_seconds;
  std::vector<double> final_gap;
  std::vector<std::string> flags;
};

/// One row per instance. Flags: a method that misses the precision, QIS not
/// strictly ahead of GD, an accelerated method over 40 steps.
std::vector<BenchmarkRow> bench_rows(const ExperimentConfig& cfg,
                                     const ExperimentResult& result);

/// bench_table.csv and bench_table.md. Returns true when no row is flagged.
bool write_bench_table(const ExperimentConfig& cfg,
                       const ExperimentResult& result,
                       const std::vector<BenchmarkRow>& rows);

struct BenchOutcome {
  ExperimentConfig config;  // with every tol lowered to the precision
  ExperimentResult result;
  std::vector<BenchmarkRow> rows;
  bool clean = true;
};

/// Runs the experiment with each tol capped at cfg.precision, then writes the
/// traces, the summaries and the table under cfg.output_dir.
BenchOutcome run_bench(ExperimentConfig cfg, int jobs);

struct DiagnoseOutcome {
  nlohmann::json report;
  bool all_pass = true;
};

/// Bound suite at lambda = 0 and lambda*, QBP identities, closed-form versus
/// finite-difference Jacobians, and empirical QIS/GD rates against the
/// spectral radii. Writes diagnostics.json under cfg.output_dir.
DiagnoseOutcome run_diagnose(const ExperimentConfig& cfg, int jobs);

}  // namespace maxent::cli
