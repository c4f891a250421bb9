#include "runner.hpp"

#include <algorithm>
#include <chrono>

#include <spdlog/spdlog.h>

namespace maxent::cli {

std::vector<InstanceSpec> expand_instances(const ExperimentConfig& cfg) {
  std::vector<InstanceSpec> out;
  for (auto kind : cfg.families) {
    for (int n : cfg.n_qubits) {
      for (auto seed : cfg.seeds) out.push_back({kind, n, seed});
    }
  }
  return out;
}

std::string instance_dir_name(const InstanceSpec& spec) {
  return std::to_string(spec.n_qubits) + "-qubit-" +
         std::string(to_string(spec.kind)) + "-seed" + std::to_string(spec.seed);
}

double effective_beta(const ExperimentConfig& cfg, const HamiltonianFamily& fam) {
  return cfg.normalize_by_qubits ? qubit_normalized_beta(fam, cfg.beta)
                                 : cfg.beta;
}

ProblemInstance build_instance(const ExperimentConfig& cfg,
                               const InstanceSpec& spec) {
  HamiltonianFamily fam =
      build_family(spec.kind, spec.n_qubits, spec.seed, cfg.max_qubits);
  for (auto& term : fam.terms) term.weight *= cfg.weight_scale;
  return make_instance(fam, std::nullopt, effective_beta(cfg, fam), cfg.complete);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  ExperimentResult result;
  result.specs = expand_instances(cfg);

  for (const auto& m : cfg.methods) {
    std::string tag = method_tag(m);
    const std::string base = tag;
    for (int k = 2; std::find(result.tags.begin(), result.tags.end(), tag) !=
                    result.tags.end();
         ++k) {
      tag = base + "-" + std::to_string(k);
    }
    result.tags.push_back(tag);
  }

  result.instances.resize(result.specs.size());
  parallel_for(result.specs.size(), jobs, [&](std::size_t i) {
    result.instances[i] = build_instance(cfg, result.specs[i]);
    spdlog::debug("built {} ({} observables)", result.instances[i].label,
                  result.instances[i].observables.size());
  });

  const std::size_t n_methods = cfg.methods.size();
  result.runs.resize(result.specs.size() * n_methods);
  parallel_for(result.runs.size(), jobs, [&](std::size_t cell) {
    RunResult& r = result.runs[cell];
    r.instance_index = cell / n_methods;
    r.method_index = cell % n_methods;
    r.tag = result.tags[r.method_index];
    const ProblemInstance& inst = result.instances[r.instance_index];
    const auto t0 = std::chrono::steady_clock::now();
    r.trace = run(inst, cfg.methods[r.method_index]);
    r.wall_seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    r.steps = r.trace.steps_to(cfg.precision);
    r.mu_hat = mu_from_lambda(r.trace.final_lambda(), inst.base_terms,
                              inst.beta, inst.observables.complete());
    if (inst.ground_truth) {
      r.mu_error = (*r.mu_hat - inst.ground_truth->mu).cwiseAbs().maxCoeff();
    }
    spdlog::info("{} {}: {} after {} iterations, gap {:.3e}, {:.2f}s",
                 inst.label, r.tag, to_string(r.trace.status),
                 r.trace.iterations(), r.trace.final_gap(), r.wall_seconds);
  });
  return result;
}

}  // namespace maxent::cli
