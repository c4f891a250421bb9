#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"

namespace maxent::cli {

/// Runs f(0..count-1) on up to `jobs` threads. The first exception is
/// rethrown once every worker has stopped.
template <class F>
void parallel_for(std::size_t count, int jobs, F&& f) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            f(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

struct InstanceSpec {
  FamilyKind kind = FamilyKind::Local1D;
  int n_qubits = 3;
  std::uint64_t seed = 100;
};

/// Instances in config order: family-major, then n, then seed.
std::vector<InstanceSpec> expand_instances(const ExperimentConfig& cfg);

/// Directory-safe name, e.g. "6-qubit-Ising-seed100".
std::string instance_dir_name(const InstanceSpec& spec);

/// Builds the family, scales its weights and generates the synthetic target.
ProblemInstance build_instance(const ExperimentConfig& cfg,
                               const InstanceSpec& spec);

/// Physical beta after the optional division by the qubit count.
double effective_beta(const ExperimentConfig& cfg, const HamiltonianFamily& fam);

struct RunResult {
  std::size_t instance_index = 0;
  std::size_t method_index = 0;
  std::string tag;
  SolverTrace trace;
  double wall_seconds = 0.0;
  std::optional<int> steps;
  std::optional<RealVector> mu_hat;
  std::optional<double> mu_error;  // inf-norm against ground truth
};

struct ExperimentResult {
  std::vector<InstanceSpec> specs;
  std::vector<ProblemInstance> instances;
  std::vector<std::string> tags;   // one per method, deduplicated
  std::vector<RunResult> runs;     // instance-major, method-minor
};

/// Runs every (instance, method) cell on up to `jobs` threads. Results are
/// ordered independently of scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs);

}  // namespace maxent::cli
