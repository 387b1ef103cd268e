// Batch front end: converge, table1, interface, moments, verify.
//
// Exit codes: 0 success, 1 validation or property failure, 2 blow-up, 3 I/O.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "tamed_ac/config.hpp"
#include "tamed_ac/experiments.hpp"

namespace {

using namespace tamed_ac;

enum ExitCode { kOk = 0, kFailure = 1, kBlowUp = 2, kIo = 3 };

struct CommonFlags {
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> n_samples;
  std::string out_dir;
  unsigned threads = 1;
  std::string mutant = "none";
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_path, "JSON config or run manifest to replay");
  sub->add_option("--preset", f.preset_name, "named preset")->check(CLI::IsMember(preset_names()));
  sub->add_option("--seed", f.seed, "master seed override");
  sub->add_option("--n-samples", f.n_samples, "Monte-Carlo sample count override");
  sub->add_option("--out-dir", f.out_dir, "output directory override");
  sub->add_option("--threads", f.threads, "worker threads (never changes output bytes)")->check(CLI::Range(1U, 1024U));
}

ExperimentConfig resolve(const CommonFlags& f, const std::string& command) {
  ExperimentConfig c;
  if (!f.config_path.empty()) {
    c = load_config(f.config_path);
    if (!f.preset_name.empty()) throw ConfigError("preset", "--preset and --config are mutually exclusive");
  } else if (!f.preset_name.empty()) {
    c = preset(f.preset_name);
  } else if (command == "interface") {
    c = preset("interface-eps2");
  }
  if (f.seed) c.sampling.seed = *f.seed;
  if (f.n_samples) {
    c.sampling.n_samples = *f.n_samples;
    c.moments.n_samples = *f.n_samples;
  }
  if (!f.out_dir.empty()) c.output.directory = f.out_dir;
  c.validate();
  return c;
}

TamingMutant parse_mutant(const std::string& s) {
  if (s == "none") return TamingMutant::none;
  if (s == "missing-unit") return TamingMutant::missing_unit;
  if (s == "inverted") return TamingMutant::inverted;
  throw ConfigError("--mutant", "unknown mutant '" + s + "'");
}

int run(const std::string& command, const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags, command);
  const RunOptions ro{flags.threads, parse_mutant(flags.mutant)};
  const std::filesystem::path dir = cfg.output.directory;
  Manifest m;
  m.command = command;
  m.config = cfg;
  m.started = std::chrono::system_clock::now();
  int code = kOk;

  if (command == "converge" || command == "table1") {
    const bool wide = command == "table1";
    std::vector<double> alphas = wide ? cfg.taming.table_alphas : std::vector<double>{cfg.taming.alpha};
    const ConvergenceResult r = convergence_study(cfg, alphas, ro);
    m.outputs = write_convergence(dir, r, wide);
    for (std::size_t i = 0; i < r.tables.size(); ++i) {
      for (auto& row : admissibility_json(r.tables[i])) m.admissibility.push_back(row);
      std::cout << "alpha=" << alpha_label(r.alphas[i]) << '\n';
      for (const auto& row : r.tables[i].rows) {
        std::cout << "  level " << row.level << "  tau " << format_double(row.tau) << "  error "
                  << format_double(row.weak_error) << " +- " << format_double(row.mc_halfwidth)
                  << (row.admissible ? "" : "  (step size condition violated)") << '\n';
      }
      if (r.fits[i]) {
        std::cout << "  slope " << format_double(r.fits[i]->slope) << '\n';
      } else {
        std::cerr << r.fit_messages[i] << '\n';
      }
    }
    if (wide) m.notes.push_back("alpha columns share beta and theta from the taming section");
  } else if (command == "interface") {
    const auto runs = interface_study(cfg, ro);
    m.outputs = write_profiles(dir, SineBasis(cfg.discretization.n_modes), runs);
    for (const auto& r : runs) {
      double peak = 0.0;
      for (const auto& p : r.profiles.mean_profiles) {
        for (double v : p.values) peak = std::max(peak, std::abs(v));
      }
      std::cout << "epsilon " << format_double(r.epsilon) << "  max |mean profile| " << format_double(peak) << '\n';
    }
  } else if (command == "moments") {
    const auto runs = moment_study(cfg, ro);
    m.outputs = write_moments(dir, runs);
    for (const auto& r : runs) {
      std::cout << "T " << format_double(r.horizon) << "  max E|X|^2 " << format_double(r.report.max_mean_l2_sq)
                << "  max E|X|_4^4 " << format_double(r.report.max_mean_l4_4) << '\n';
    }
  } else if (command == "verify") {
    const PropertyReport rep = verify_study(cfg, ro);
    m.outputs = write_verify(dir, rep);
    for (const auto& c : rep.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  samples " << c.samples;
      if (!c.passed) std::cout << "  counterexample: " << c.counterexample;
      std::cout << '\n';
    }
    if (ro.mutant != TamingMutant::none) m.notes.push_back("taming mutant injected: " + flags.mutant);
    if (!rep.all_passed()) code = kFailure;
  }

  m.finished = std::chrono::system_clock::now();
  write_text_file(dir / "manifest.json", manifest_json(m));
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tamed exponential Euler experiments for stochastic Allen-Cahn equations"};
  app.require_subcommand(1);
  std::map<std::string, CommonFlags> flags;
  const std::pair<const char*, const char*> commands[] = {
      {"converge", "weak-error table and rate fit for one taming degree"},
      {"table1", "weak errors for each taming degree in taming.table_alphas"},
      {"interface", "ensemble-mean profiles at the configured times"},
      {"moments", "ensemble moment monitors for each configured horizon"},
      {"verify", "property checks of the drift, taming and scalar inequality"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, flags[name]);
    if (std::string(name) == "verify") {
      sub->add_option("--mutant", flags[name].mutant, "inject a broken taming: none, missing-unit, inverted");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kFailure;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags[command]);
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return kBlowUp;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
