#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace maxent::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    std::string_view where) {
  if (!obj.is_object()) {
    throw ConfigError(std::string(where) + " must be a JSON object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (!known.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <class T>
T get_as(const json& obj, const char* key, std::string_view where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + "." + key + ": " + e.what());
  }
}

template <class T>
std::vector<T> scalar_or_array(const json& v, std::string_view key) {
  try {
    if (v.is_array()) return v.get<std::vector<T>>();
    return {v.get<T>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

SolverConfig parse_method_config(const json& obj) {
  static const std::set<std::string> known = {
      "method", "eta", "history", "use_bb", "max_iters", "tol", "rcond",
      "record_wall_time"};
  reject_unknown(obj, known, "methods[]");
  SolverConfig cfg;
  if (!obj.contains("method")) throw ConfigError("methods[] needs a 'method'");
  cfg.method = parse_method(get_as<std::string>(obj, "method", "methods[]"));
  if (obj.contains("eta") && !obj.at("eta").is_null()) {
    cfg.eta = get_as<double>(obj, "eta", "methods[]");
  }
  if (obj.contains("history")) cfg.history = get_as<int>(obj, "history", "methods[]");
  if (obj.contains("use_bb")) cfg.use_bb = get_as<bool>(obj, "use_bb", "methods[]");
  if (obj.contains("max_iters")) cfg.max_iters = get_as<int>(obj, "max_iters", "methods[]");
  if (obj.contains("tol")) cfg.tol = get_as<double>(obj, "tol", "methods[]");
  if (obj.contains("rcond")) cfg.rcond = get_as<double>(obj, "rcond", "methods[]");
  // Traces stay byte-identical across reruns unless timing is asked for.
  cfg.record_wall_time = obj.contains("record_wall_time") &&
                         get_as<bool>(obj, "record_wall_time", "methods[]");
  cfg.validate();
  return cfg;
}

SolverConfig method(Method m, int max_iters, double tol, bool bb = false) {
  SolverConfig c;
  c.method = m;
  c.max_iters = max_iters;
  c.tol = tol;
  c.use_bb = bb;
  c.record_wall_time = false;
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (families.empty()) throw ConfigError("family list is empty");
  for (auto k : families) {
    if (k == FamilyKind::Custom) {
      throw ConfigError("Custom families cannot be built from a config");
    }
  }
  if (n_qubits.empty()) throw ConfigError("n_qubits list is empty");
  for (int n : n_qubits) {
    if (n < 2 || n > max_qubits) {
      throw ConfigError("n_qubits " + std::to_string(n) + " outside [2, " +
                        std::to_string(max_qubits) + "]");
    }
  }
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (methods.empty()) throw ConfigError("at least one method is required");
  for (const auto& m : methods) m.validate();
  if (!(beta > 0.0)) throw ConfigError("beta must be positive");
  if (!(precision > 0.0)) throw ConfigError("precision must be positive");
  if (!std::isfinite(weight_scale)) throw ConfigError("weight_scale must be finite");
  if (output_dir.empty()) throw ConfigError("output_dir is empty");
}

ExperimentConfig parse_config(const json& doc) {
  static const std::set<std::string> known = {
      "family", "n_qubits", "beta", "normalize_by_qubits", "seeds", "complete",
      "weight_scale", "methods", "output_dir", "precision", "max_qubits"};
  reject_unknown(doc, known, "config");
  ExperimentConfig cfg;
  if (doc.contains("family")) {
    cfg.families.clear();
    for (const auto& name : scalar_or_array<std::string>(doc.at("family"), "family")) {
      cfg.families.push_back(parse_family_kind(name));
    }
  }
  if (doc.contains("n_qubits")) {
    cfg.n_qubits = scalar_or_array<int>(doc.at("n_qubits"), "n_qubits");
  }
  if (doc.contains("beta")) cfg.beta = get_as<double>(doc, "beta", "config");
  if (doc.contains("normalize_by_qubits")) {
    cfg.normalize_by_qubits = get_as<bool>(doc, "normalize_by_qubits", "config");
  }
  if (doc.contains("seeds")) {
    cfg.seeds = scalar_or_array<std::uint64_t>(doc.at("seeds"), "seeds");
  }
  if (doc.contains("complete")) cfg.complete = get_as<bool>(doc, "complete", "config");
  if (doc.contains("weight_scale")) {
    cfg.weight_scale = get_as<double>(doc, "weight_scale", "config");
  }
  if (doc.contains("methods")) {
    const json& list = doc.at("methods");
    if (!list.is_array()) throw ConfigError("methods must be an array");
    for (const auto& m : list) cfg.methods.push_back(parse_method_config(m));
  }
  if (doc.contains("output_dir")) {
    cfg.output_dir = get_as<std::string>(doc, "output_dir", "config");
  }
  if (doc.contains("precision")) {
    cfg.precision = get_as<double>(doc, "precision", "config");
  }
  if (doc.contains("max_qubits")) {
    cfg.max_qubits = get_as<int>(doc, "max_qubits", "config");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

nlohmann::json to_json(const SolverConfig& cfg) {
  json j;
  j["method"] = std::string(to_string(cfg.method));
  j["eta"] = cfg.eta ? json(*cfg.eta) : json(nullptr);
  j["history"] = cfg.history;
  j["use_bb"] = cfg.use_bb;
  j["max_iters"] = cfg.max_iters;
  j["tol"] = cfg.tol;
  j["rcond"] = cfg.rcond;
  j["record_wall_time"] = cfg.record_wall_time;
  return j;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  json j;
  json families = json::array();
  for (auto k : cfg.families) families.push_back(std::string(to_string(k)));
  j["family"] = families;
  j["n_qubits"] = cfg.n_qubits;
  j["beta"] = cfg.beta;
  j["normalize_by_qubits"] = cfg.normalize_by_qubits;
  j["seeds"] = cfg.seeds;
  j["complete"] = cfg.complete;
  j["weight_scale"] = cfg.weight_scale;
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(to_json(m));
  j["methods"] = methods;
  j["output_dir"] = cfg.output_dir;
  j["precision"] = cfg.precision;
  j["max_qubits"] = cfg.max_qubits;
  return j;
}

std::string serialize(const ExperimentConfig& cfg) {
  return to_json(cfg).dump(2);
}

ExperimentConfig default_solve_config() {
  ExperimentConfig cfg;
  cfg.families = {FamilyKind::Ising};
  cfg.n_qubits = {6};
  cfg.methods = {method(Method::QIS, 10000, 1e-12),
                 method(Method::GD, 10000, 1e-12)};
  cfg.output_dir = "maxent-solve";
  return cfg;
}

ExperimentConfig default_diagnose_config() {
  ExperimentConfig cfg;
  cfg.families = {FamilyKind::Local1D};
  cfg.n_qubits = {3};
  cfg.methods = {method(Method::QIS, 400000, 1e-12),
                 method(Method::GD, 400000, 1e-12)};
  cfg.output_dir = "maxent-diagnose";
  return cfg;
}

ExperimentConfig default_bench_config() {
  ExperimentConfig cfg;
  cfg.families = {FamilyKind::Ising, FamilyKind::Transversal1D,
                  FamilyKind::Local1D};
  cfg.n_qubits = {6, 7, 8};
  // Plain methods stop at the step-count precision; solving them on to 1e-12
  // multiplies the bench cost without changing the table. The cap sits above
  // 10^4 so slow cells report a count instead of not-reached.
  cfg.methods = {method(Method::QIS, 20000, cfg.precision),
                 method(Method::GD, 20000, cfg.precision),
                 method(Method::AMQIS, 40, 1e-12, true),
                 method(Method::LBFGSGD, 40, 1e-12, true)};
  cfg.output_dir = "maxent-bench";
  return cfg;
}

std::string method_tag(const SolverConfig& cfg) {
  std::string tag(to_string(cfg.method));
  if (cfg.use_bb) tag += "+BB";
  return tag;
}

}  // namespace maxent::cli
