#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "config.hpp"
#include "report.hpp"
#include "runner.hpp"

namespace {

using namespace maxent;
using namespace maxent::cli;

constexpr int kExitOk = 0;
constexpr int kExitFlagged = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<double> precision;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config, "Experiment JSON; defaults apply when omitted");
  cmd->add_option("--out", opt.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", opt.seed, "Single seed (overrides the config)");
  cmd->add_option("--jobs", opt.jobs, "Cells run in parallel")->check(CLI::PositiveNumber);
  cmd->add_option("--precision", opt.precision, "Gap threshold for step counts");
}

ExperimentConfig resolve(const CommonOptions& opt, ExperimentConfig fallback) {
  ExperimentConfig cfg = opt.config.empty() ? std::move(fallback) : load_config(opt.config);
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  if (opt.seed) cfg.seeds = {*opt.seed};
  if (opt.precision) cfg.precision = *opt.precision;
  cfg.validate();
  return cfg;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("maxent");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  const char* env = std::getenv("MAXENT_LOG");
  const std::string level = env ? env : "info";
  if (level == "off") {
    spdlog::set_level(spdlog::level::off);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("MAXENT_LOG={} not recognised, using info", level);
  }
}

int cmd_solve(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve(opt, default_solve_config());
  const ExperimentResult result = run_experiment(cfg, opt.jobs);
  const bool ok = write_solve_outputs(cfg, result);
  for (const auto& r : result.runs) {
    const auto& inst = result.instances[r.instance_index];
    std::cout << inst.label << " seed " << result.specs[r.instance_index].seed
              << ' ' << r.tag << ": " << to_string(r.trace.status) << ", "
              << r.trace.iterations() << " iterations, steps to "
              << cfg.precision << " = "
              << (r.steps ? std::to_string(*r.steps) : std::string("not reached"))
              << ", final gap " << r.trace.final_gap();
    if (r.mu_error) std::cout << ", |mu - mu*|_inf " << *r.mu_error;
    std::cout << '\n';
  }
  return ok ? kExitOk : kExitFlagged;
}

int cmd_bench(const CommonOptions& opt) {
  const BenchOutcome bench = run_bench(resolve(opt, default_bench_config()), opt.jobs);
  std::ifstream table(std::filesystem::path(bench.config.output_dir) / "bench_table.md");
  std::cout << table.rdbuf();
  return bench.clean ? kExitOk : kExitFlagged;
}

int cmd_diagnose(const CommonOptions& opt) {
  const ExperimentConfig cfg = resolve(opt, default_diagnose_config());
  const DiagnoseOutcome outcome = run_diagnose(cfg, opt.jobs);
  for (const auto& inst : outcome.report["instances"]) {
    std::cout << inst["label"].get<std::string>() << " seed "
              << inst["seed"].get<std::uint64_t>() << ": "
              << (inst["all_pass"].get<bool>() ? "all checks pass" : "FAILED")
              << '\n';
    for (const auto& c : inst["checks"]) {
      if (!c["pass"].get<bool>()) std::cout << "  failed: " << c["name"].get<std::string>() << '\n';
    }
  }
  return outcome.all_pass ? kExitOk : kExitFlagged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-entropy Hamiltonian inference: solvers, diagnostics and benchmarks"};
  app.require_subcommand(1);
  CommonOptions solve_opt, diagnose_opt, bench_opt;
  auto* solve = app.add_subcommand("solve", "Solve every configured instance with every method");
  auto* diagnose = app.add_subcommand("diagnose", "Check the convergence theory at the solved point");
  auto* bench = app.add_subcommand("bench", "Step-count table over the benchmark families");
  add_common(solve, solve_opt);
  add_common(diagnose, diagnose_opt);
  add_common(bench, bench_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  configure_logging();
  try {
    if (solve->parsed()) return cmd_solve(solve_opt);
    if (diagnose->parsed()) return cmd_diagnose(diagnose_opt);
    return cmd_bench(bench_opt);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }
}
