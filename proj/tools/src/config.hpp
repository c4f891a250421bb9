#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "maxent/maxent.hpp"

namespace maxent::cli {

/// One experiment: the cartesian product families x n_qubits x seeds, each
/// instance solved by every entry of `methods`.
struct ExperimentConfig {
  std::vector<FamilyKind> families{FamilyKind::Local1D};
  std::vector<int> n_qubits{3};
  double beta = 1.0;
  /// Divide the Hamiltonian by the qubit count before applying beta.
  bool normalize_by_qubits = true;
  std::vector<std::uint64_t> seeds{100};
  bool complete = false;
  /// Multiplies the drawn weights; 0 gives the maximally mixed target.
  double weight_scale = 1.0;
  std::vector<SolverConfig> methods;
  std::string output_dir = "maxent-out";
  double precision = 1e-7;
  int max_qubits = kDefaultMaxQubits;

  /// Throws ConfigError on an empty or out-of-range field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys and wrong types throw ConfigError. "family" and
/// "n_qubits" accept a scalar or an array.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SolverConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);
std::string serialize(const ExperimentConfig& cfg);

/// Ising n=6, QIS and GD to 1e-12.
ExperimentConfig default_solve_config();
/// Local1D n=3, QIS and GD to 1e-12 with a 400000-iteration cap.
ExperimentConfig default_diagnose_config();
/// The nine (family, n) cells with QIS and GD to the step-count precision and
/// both accelerators with BB mixing, history 10 and a 40-iteration cap.
ExperimentConfig default_bench_config();

/// Label used for trace files: "QIS", "AM-QIS+BB", ...
std::string method_tag(const SolverConfig& cfg);

}  // namespace maxent::cli
