#pragma once

// Experiment drivers behind the command-line tool. Each driver turns an
// ExperimentConfig into in-memory results and, through write_*, into CSV and
// JSON artifacts plus a manifest that replays the run.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tamed_ac/analysis.hpp"
#include "tamed_ac/config.hpp"
#include "tamed_ac/drift.hpp"
#include "tamed_ac/ensemble.hpp"
#include "tamed_ac/io.hpp"
#include "tamed_ac/property_suite.hpp"
#include "tamed_ac/scheme.hpp"

namespace tamed_ac {

inline constexpr const char* kToolVersion = "1.0.0";

struct RunOptions {
  unsigned threads = 1;
  TamingMutant mutant = TamingMutant::none;
};

inline EnsembleOptions ensemble_options(const ExperimentConfig& c, const RunOptions& r) {
  return {r.threads, c.sampling.skip_blowups ? BlowUpPolicy::skip : BlowUpPolicy::abort};
}

inline NoisePlan noise_plan(const ExperimentConfig& c) {
  return {c.sampling.seed, c.discretization.fine_level, c.discretization.horizon, 0};
}

// ---------------------------------------------------------------------------
// Convergence

struct ConvergenceResult {
  std::vector<double> alphas;
  std::vector<ErrorTable> tables;           // one per alpha
  std::vector<std::optional<RateFit>> fits;  // empty when fewer than 3 rows
  std::vector<std::string> fit_messages;
  DriftConstants constants;
};

// Weak errors of the tamed scheme at every configured level, for each taming
// degree in `alphas`, against one shared reference ensemble.
inline ConvergenceResult convergence_study(const ExperimentConfig& c, std::vector<double> alphas,
                                           const RunOptions& ro = {}) {
  c.validate();
  ConvergenceResult res;
  res.alphas = std::move(alphas);
  res.constants = derive_growth_constants(c.drift());
  const auto basis = std::make_shared<const SineBasis>(c.discretization.n_modes);
  const auto& d = c.discretization;
  std::vector<SchemeConfig> schemes;
  for (double a : res.alphas) {
    for (int l : d.tau_levels) {
      schemes.push_back(SchemeConfig::tamed(basis, c.drift(), c.model.epsilon, a, c.taming.beta, c.taming.theta,
                                            d.horizon, l));
    }
  }
  const SchemeConfig ref = SchemeConfig::reference(basis, c.drift(), c.model.epsilon, d.horizon, d.fine_level);
  const StepTestFunction phi{parse_norm(c.observable.norm)};
  const WeakErrorOptions wopts{c.sampling.coupled, ensemble_options(c, ro)};
  const auto errs = weak_error_study(schemes, ref, noise_plan(c), c.sampling.n_samples, phi, wopts);

  std::size_t k = 0;
  for (double a : res.alphas) {
    ErrorTable t;
    t.meta = {c.model.epsilon, a, c.taming.beta, c.taming.theta, c.sampling.seed, c.observable.norm, c.sampling.coupled,
              d.fine_level};
    for (int l : d.tau_levels) {
      const auto& s = schemes[k];
      const auto& e = errs[k++];
      const Admissibility adm = step_size_condition(res.constants, s.taming, c.model.epsilon);
      t.rows.push_back({l, s.tau, e.error, e.halfwidth, e.n_samples, adm.admissible, adm.ratio});
    }
    t.validate();
    try {
      res.fits.emplace_back(fit_convergence_rate(t));
      res.fit_messages.emplace_back();
    } catch (const FitError& e) {
      res.fits.emplace_back(std::nullopt);
      res.fit_messages.emplace_back(std::string("rate fit refused: ") + e.what());
    }
    res.tables.push_back(std::move(t));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Moments and profiles

struct MomentRun {
  double horizon = 0.0;
  MomentReport report;
};

// Every-step moment report for each configured horizon at step 2^-tau_level.
// The noise plan's fine grid equals the step grid, so all horizons share the
// Brownian path on their common interval.
inline std::vector<MomentRun> moment_study(const ExperimentConfig& c, const RunOptions& ro = {}) {
  c.validate();
  const auto basis = std::make_shared<const SineBasis>(c.discretization.n_modes);
  std::vector<MomentRun> out;
  for (double T : c.moments.horizons) {
    const auto steps = static_cast<std::uint64_t>(std::llround(T * std::ldexp(1.0, c.moments.tau_level)));
    const int level = std::countr_zero(steps);
    SchemeConfig s = SchemeConfig::tamed(basis, c.drift(), c.model.epsilon, c.taming.alpha, c.taming.beta,
                                         c.taming.theta, T, level);
    const NoisePlan plan{c.sampling.seed, level, T, 0};
    out.push_back({T, moment_sup_estimate(s, plan, c.moments.n_samples, {}, ensemble_options(c, ro))});
  }
  return out;
}

struct ProfileRun {
  double epsilon = 0.0;
  ProfileSet profiles;
};

inline std::vector<ProfileRun> interface_study(const ExperimentConfig& c, const RunOptions& ro = {}) {
  c.validate();
  const auto basis = std::make_shared<const SineBasis>(c.discretization.n_modes);
  const double T = c.discretization.horizon;
  const double tau = std::ldexp(1.0, -c.interface.tau_level);
  const auto steps = static_cast<std::uint64_t>(std::llround(T / tau));
  if (!std::has_single_bit(steps)) throw ConfigError("interface.tau_level", "horizon / tau must be a power of two");
  const int level = std::countr_zero(steps);
  const NoisePlan plan{c.sampling.seed, level, T, 0};
  std::vector<ProfileRun> out;
  for (double eps : c.interface.epsilons) {
    const SchemeConfig s =
        SchemeConfig::tamed(basis, c.drift(), eps, c.taming.alpha, c.taming.beta, c.taming.theta, T, level);
    out.push_back({eps, interface_profile(s, plan, c.sampling.n_samples, c.interface.times, ensemble_options(c, ro))});
  }
  return out;
}

inline PropertyReport verify_study(const ExperimentConfig& c, const RunOptions& ro = {}) {
  PropertySuiteOptions o;
  o.seed = c.sampling.seed;
  o.mutant = ro.mutant;
  return property_suite(c.drift(), o);
}

// ---------------------------------------------------------------------------
// Manifests

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  std::string command;
  ExperimentConfig config;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;
  std::vector<std::string> outputs;
  ordered_json admissibility = ordered_json::array();
  ordered_json notes = ordered_json::array();
};

inline std::string manifest_json(const Manifest& m) {
  ordered_json j;
  j["tool"] = ordered_json{{"name", "tamed_ac"}, {"version", kToolVersion}};
  j["command"] = m.command;
  j["config"] = to_json(m.config);
  j["started_utc"] = utc_timestamp(m.started);
  j["finished_utc"] = utc_timestamp(m.finished);
  j["outputs"] = m.outputs;
  j["admissibility"] = m.admissibility;
  j["notes"] = m.notes;
  return j.dump(2) + "\n";
}

inline ordered_json admissibility_json(const ErrorTable& t) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) {
    rows.push_back(ordered_json{{"alpha", t.meta.alpha},
                                {"level", r.level},
                                {"tau", r.tau},
                                {"admissible", r.admissible},
                                {"ratio", r.admissibility_ratio}});
  }
  return rows;
}

inline std::string label_of(double x) {
  std::string s = format_double(x);
  for (char& ch : s) {
    if (ch == '/') ch = '_';
  }
  return s;
}

// ---------------------------------------------------------------------------
// Artifact writers; each returns the file names it wrote, relative to `dir`.

inline std::vector<std::string> write_convergence(const std::filesystem::path& dir, const ConvergenceResult& r,
                                                  bool wide) {
  std::vector<std::string> files;
  ordered_json fits = ordered_json::array();
  for (std::size_t i = 0; i < r.tables.size(); ++i) {
    const std::string name =
        r.tables.size() == 1 ? "error_table.csv" : "error_table_alpha_" + label_of(r.alphas[i]) + ".csv";
    write_text_file(dir / name, error_table_csv(r.tables[i]));
    files.push_back(name);
    ordered_json f{{"alpha", r.alphas[i]}, {"n_rows", r.tables[i].rows.size()}};
    if (r.fits[i]) {
      f["fit"] = to_json(*r.fits[i]);
    } else {
      f["fit"] = nullptr;
      f["message"] = r.fit_messages[i];
    }
    fits.push_back(f);
  }
  if (wide) {
    write_text_file(dir / "table1.csv", table1_csv(r.alphas, r.tables));
    files.push_back("table1.csv");
  }
  const ordered_json fit_doc = r.tables.size() == 1 ? fits[0] : ordered_json{{"fits", fits}};
  write_text_file(dir / "rate_fit.json", fit_doc.dump(2) + "\n");
  files.push_back("rate_fit.json");
  return files;
}

inline std::vector<std::string> write_profiles(const std::filesystem::path& dir, const SineBasis& basis,
                                               const std::vector<ProfileRun>& runs) {
  std::vector<std::string> files;
  for (const auto& r : runs) {
    const std::string name = "profile_eps_" + label_of(r.epsilon) + ".csv";
    write_text_file(dir / name, profile_csv(basis, r.profiles));
    files.push_back(name);
  }
  return files;
}

inline std::vector<std::string> write_moments(const std::filesystem::path& dir, const std::vector<MomentRun>& runs) {
  std::vector<std::string> files;
  ordered_json summary = ordered_json::array();
  for (const auto& r : runs) {
    const std::string name = "moments_T_" + label_of(r.horizon) + ".csv";
    write_text_file(dir / name, moments_csv(r.report));
    files.push_back(name);
    summary.push_back(ordered_json{{"horizon", r.horizon},
                                   {"max_mean_l2_sq", r.report.max_mean_l2_sq},
                                   {"max_mean_l4_4", r.report.max_mean_l4_4},
                                   {"max_mean_sup", r.report.max_mean_sup},
                                   {"mean_running_max_l2_sq", r.report.mean_running_max_l2_sq},
                                   {"n_samples", r.report.n_samples},
                                   {"n_failed", r.report.n_failed}});
  }
  write_text_file(dir / "moments_summary.json", ordered_json{{"runs", summary}}.dump(2) + "\n");
  files.push_back("moments_summary.json");
  return files;
}

inline std::vector<std::string> write_verify(const std::filesystem::path& dir, const PropertyReport& rep) {
  write_text_file(dir / "verify_report.json", to_json(rep).dump(2) + "\n");
  return {"verify_report.json"};
}

}  // namespace tamed_ac
