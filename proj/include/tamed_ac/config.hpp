#pragma once

// Experiment configuration: a nested JSON document with named presets.
// Every field has a default, unknown keys are rejected, and validation errors
// carry the dotted path of the offending field.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tamed_ac/drift.hpp"
#include "tamed_ac/error.hpp"
#include "tamed_ac/spectral.hpp"

namespace tamed_ac {

struct ModelConfig {
  double epsilon = 0.01;
  int q = 2;
  double leading = 1.0;
  std::vector<double> lower{0.0, 1.0};  // ascending coefficients of f_0
};

struct DiscretizationConfig {
  std::size_t n_modes = 64;
  double horizon = 1.0;
  std::vector<int> tau_levels{8, 9, 10, 11, 12};  // tau = T / 2^level
  int fine_level = 14;                             // reference M = 2^fine_level
};

struct TamingConfig {
  double alpha = 1.0;
  double beta = 5.0;
  double theta = 0.5;
  std::vector<double> table_alphas{1.0, 1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0};
};

struct SamplingConfig {
  std::uint64_t n_samples = 1000;
  std::uint64_t seed = 20250101;
  bool coupled = true;
  bool skip_blowups = false;
};

struct ObservableConfig {
  std::string norm = "l2";
};

struct InterfaceConfig {
  std::vector<double> epsilons{0.01};
  int tau_level = 10;  // absolute step 2^-tau_level
  std::vector<double> times{0.0, 0.125, 0.25, 0.5, 1.0};
};

struct MomentsConfig {
  std::uint64_t n_samples = 100;
  int tau_level = 10;
  std::vector<double> horizons{1.0, 2.0};
};

struct OutputConfig {
  std::string directory = "out";
};

struct ExperimentConfig {
  std::string preset = "paper7-beta5";
  ModelConfig model;
  DiscretizationConfig discretization;
  TamingConfig taming;
  SamplingConfig sampling;
  ObservableConfig observable;
  InterfaceConfig interface;
  MomentsConfig moments;
  OutputConfig output;

  DriftSpec drift() const { return DriftSpec{model.q, model.leading, model.lower}; }

  void validate() const;
};

// ---------------------------------------------------------------------------
// Presets

inline std::vector<std::string> preset_names() {
  return {"paper7-beta5", "paper7-beta5-ci", "paper7-beta100", "interface-eps2", "interface-eps3"};
}

inline ExperimentConfig preset(const std::string& name) {
  ExperimentConfig c;
  c.preset = name;
  if (name == "paper7-beta5") return c;
  if (name == "paper7-beta5-ci") {
    c.sampling.n_samples = 200;
    c.discretization.tau_levels = {8, 9, 10, 11};
    c.discretization.fine_level = 12;
    return c;
  }
  if (name == "paper7-beta100") {
    c.taming.beta = 100.0;
    c.discretization.tau_levels = {5, 6, 7, 8, 9};
    return c;
  }
  if (name == "interface-eps2") {
    c.interface.epsilons = {0.01};
    return c;
  }
  if (name == "interface-eps3") {
    c.interface.epsilons = {0.001};
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Validation

inline void ExperimentConfig::validate() const {
  auto require = [](bool ok, const char* path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
  };
  require(model.epsilon > 0.0 && model.epsilon <= 1.0, "model.epsilon", "must lie in (0, 1]");
  try {
    drift().validate();
  } catch (const Error& e) {
    throw ConfigError("model", e.what());
  }
  require(discretization.n_modes >= 1, "discretization.n_modes", "must be at least 1");
  require(discretization.horizon > 0.0 && std::isfinite(discretization.horizon), "discretization.horizon",
          "must be positive");
  require(discretization.fine_level >= 0 && discretization.fine_level <= 24, "discretization.fine_level",
          "must lie in [0, 24]");
  require(!discretization.tau_levels.empty(), "discretization.tau_levels", "must not be empty");
  for (std::size_t i = 0; i < discretization.tau_levels.size(); ++i) {
    const int l = discretization.tau_levels[i];
    const std::string path = "discretization.tau_levels[" + std::to_string(i) + "]";
    if (l < 0 || l > discretization.fine_level) throw ConfigError(path, "level must lie in [0, fine_level]");
    if (i > 0 && l <= discretization.tau_levels[i - 1]) throw ConfigError(path, "levels must be strictly increasing");
  }
  for (const char* key : {"alpha", "beta", "theta"}) {
    const double v = std::string(key) == "alpha" ? taming.alpha : std::string(key) == "beta" ? taming.beta : taming.theta;
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("taming.") + key, "must be positive");
  }
  require(taming.theta * taming.alpha < 1.0, "taming.theta", "theta * alpha must be below 1");
  for (std::size_t i = 0; i < taming.table_alphas.size(); ++i) {
    const double a = taming.table_alphas[i];
    if (!(a > 0.0) || !(taming.theta * a < 1.0)) {
      throw ConfigError("taming.table_alphas[" + std::to_string(i) + "]", "must be positive with theta * alpha < 1");
    }
  }
  require(sampling.n_samples >= 2, "sampling.n_samples", "must be at least 2");
  try {
    (void)parse_norm(observable.norm);
  } catch (const Error& e) {
    throw ConfigError("observable.norm", e.what());
  }
  require(!interface.epsilons.empty(), "interface.epsilons", "must not be empty");
  for (std::size_t i = 0; i < interface.epsilons.size(); ++i) {
    const double e = interface.epsilons[i];
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("interface.epsilons[" + std::to_string(i) + "]", "must lie in (0, 1]");
  }
  require(interface.tau_level >= 0 && interface.tau_level <= 24, "interface.tau_level", "must lie in [0, 24]");
  const double itau = std::ldexp(1.0, -interface.tau_level);
  for (std::size_t i = 0; i < interface.times.size(); ++i) {
    const double t = interface.times[i];
    const double m = t / itau;
    if (!(t >= 0.0) || t > discretization.horizon || m != std::round(m)) {
      throw ConfigError("interface.times[" + std::to_string(i) + "]", "must be a step-grid time within the horizon");
    }
  }
  require(moments.n_samples >= 2, "moments.n_samples", "must be at least 2");
  require(moments.tau_level >= 0 && moments.tau_level <= 24, "moments.tau_level", "must lie in [0, 24]");
  require(!moments.horizons.empty(), "moments.horizons", "must not be empty");
  for (std::size_t i = 0; i < moments.horizons.size(); ++i) {
    const double m = moments.horizons[i] * std::ldexp(1.0, moments.tau_level);
    const auto steps = static_cast<std::uint64_t>(m);
    if (!(m >= 1.0) || m != std::round(m) || (steps & (steps - 1)) != 0 || m > std::ldexp(1.0, 30)) {
      throw ConfigError("moments.horizons[" + std::to_string(i) + "]",
                        "horizon / tau must be a power of two");
    }
  }
  require(!output.directory.empty(), "output.directory", "must not be empty");
}

// ---------------------------------------------------------------------------
// JSON mapping

using nlohmann::json;
using nlohmann::ordered_json;

inline ordered_json to_json(const ExperimentConfig& c) {
  return ordered_json{
      {"preset", c.preset},
      {"model", {{"epsilon", c.model.epsilon}, {"q", c.model.q}, {"leading", c.model.leading}, {"lower", c.model.lower}}},
      {"discretization",
       {{"n_modes", c.discretization.n_modes},
        {"horizon", c.discretization.horizon},
        {"tau_levels", c.discretization.tau_levels},
        {"fine_level", c.discretization.fine_level}}},
      {"taming",
       {{"alpha", c.taming.alpha},
        {"beta", c.taming.beta},
        {"theta", c.taming.theta},
        {"table_alphas", c.taming.table_alphas}}},
      {"sampling",
       {{"n_samples", c.sampling.n_samples},
        {"seed", c.sampling.seed},
        {"coupled", c.sampling.coupled},
        {"skip_blowups", c.sampling.skip_blowups}}},
      {"observable", {{"norm", c.observable.norm}}},
      {"interface",
       {{"epsilons", c.interface.epsilons}, {"tau_level", c.interface.tau_level}, {"times", c.interface.times}}},
      {"moments",
       {{"n_samples", c.moments.n_samples}, {"tau_level", c.moments.tau_level}, {"horizons", c.moments.horizons}}},
      {"output", {{"directory", c.output.directory}}},
  };
}

namespace detail {

// Reads obj[key] into out if present; type mismatches report the full path.
template <class T>
void read_field(const json& obj, const std::string& section, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(section.empty() ? key : section + "." + key, std::string("wrong type: ") + e.what());
  }
}

inline void reject_unknown(const json& obj, const std::string& section, std::initializer_list<const char*> known) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* name : known) ok = ok || k == name;
    if (!ok) throw ConfigError(section.empty() ? k : section + "." + k, "unknown key");
  }
}

inline const json* section(const json& root, const char* name) {
  const auto it = root.find(name);
  if (it == root.end()) return nullptr;
  if (!it->is_object()) throw ConfigError(name, "must be an object");
  return &*it;
}

}  // namespace detail

// Missing fields take the preset's value (the "preset" key, default
// paper7-beta5); the result is validated.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "config root must be an object");
  detail::reject_unknown(j, "", {"preset", "model", "discretization", "taming", "sampling", "observable", "interface",
                                 "moments", "output"});
  std::string name = "paper7-beta5";
  detail::read_field(j, "", "preset", name);
  ExperimentConfig c = preset(name);
  using detail::read_field;
  using detail::reject_unknown;
  if (const json* s = detail::section(j, "model")) {
    reject_unknown(*s, "model", {"epsilon", "q", "leading", "lower"});
    read_field(*s, "model", "epsilon", c.model.epsilon);
    read_field(*s, "model", "q", c.model.q);
    read_field(*s, "model", "leading", c.model.leading);
    read_field(*s, "model", "lower", c.model.lower);
  }
  if (const json* s = detail::section(j, "discretization")) {
    reject_unknown(*s, "discretization", {"n_modes", "horizon", "tau_levels", "fine_level"});
    read_field(*s, "discretization", "n_modes", c.discretization.n_modes);
    read_field(*s, "discretization", "horizon", c.discretization.horizon);
    read_field(*s, "discretization", "tau_levels", c.discretization.tau_levels);
    read_field(*s, "discretization", "fine_level", c.discretization.fine_level);
  }
  if (const json* s = detail::section(j, "taming")) {
    reject_unknown(*s, "taming", {"alpha", "beta", "theta", "table_alphas"});
    read_field(*s, "taming", "alpha", c.taming.alpha);
    read_field(*s, "taming", "beta", c.taming.beta);
    read_field(*s, "taming", "theta", c.taming.theta);
    read_field(*s, "taming", "table_alphas", c.taming.table_alphas);
  }
  if (const json* s = detail::section(j, "sampling")) {
    reject_unknown(*s, "sampling", {"n_samples", "seed", "coupled", "skip_blowups"});
    read_field(*s, "sampling", "n_samples", c.sampling.n_samples);
    read_field(*s, "sampling", "seed", c.sampling.seed);
    read_field(*s, "sampling", "coupled", c.sampling.coupled);
    read_field(*s, "sampling", "skip_blowups", c.sampling.skip_blowups);
  }
  if (const json* s = detail::section(j, "observable")) {
    reject_unknown(*s, "observable", {"norm"});
    read_field(*s, "observable", "norm", c.observable.norm);
  }
  if (const json* s = detail::section(j, "interface")) {
    reject_unknown(*s, "interface", {"epsilons", "tau_level", "times"});
    read_field(*s, "interface", "epsilons", c.interface.epsilons);
    read_field(*s, "interface", "tau_level", c.interface.tau_level);
    read_field(*s, "interface", "times", c.interface.times);
  }
  if (const json* s = detail::section(j, "moments")) {
    reject_unknown(*s, "moments", {"n_samples", "tau_level", "horizons"});
    read_field(*s, "moments", "n_samples", c.moments.n_samples);
    read_field(*s, "moments", "tau_level", c.moments.tau_level);
    read_field(*s, "moments", "horizons", c.moments.horizons);
  }
  if (const json* s = detail::section(j, "output")) {
    reject_unknown(*s, "output", {"directory"});
    read_field(*s, "output", "directory", c.output.directory);
  }
  c.validate();
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  // A run manifest embeds the resolved config under "config".
  if (j.is_object() && j.contains("config") && j.contains("tool")) return config_from_json(j.at("config"));
  return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace tamed_ac
