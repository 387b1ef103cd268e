#pragma once

// Observables and Monte-Carlo estimators built on the ensemble driver:
// the binned-sine test function, weak-error tables against a fine reference,
// log-log rate fits, moment monitors and mean interface profiles.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tamed_ac/drift.hpp"
#include "tamed_ac/ensemble.hpp"
#include "tamed_ac/error.hpp"
#include "tamed_ac/noise.hpp"
#include "tamed_ac/scheme.hpp"
#include "tamed_ac/spectral.hpp"

namespace tamed_ac {

// phi(X) = sin(a + k/10) for ||X|| in [a + k/10, a + (k+1)/10), a in N_0.
struct StepTestFunction {
  static constexpr double kBinsPerUnit = 10.0;
  Norm norm = Norm::l2();

  double of_radius(double r) const noexcept { return std::sin(std::floor(kBinsPerUnit * r) / kBinsPerUnit); }

  double operator()(const SineBasis& basis, const SpectralField& x) const {
    return of_radius(tamed_ac::norm(basis, x, norm));
  }
};

inline double step_test_eval(const StepTestFunction& phi, const SineBasis& basis, const SpectralField& x) {
  return phi(basis, x);
}

// ---------------------------------------------------------------------------
// Error tables and rate fits

struct ErrorRow {
  int level = 0;  // tau = T / 2^level
  double tau = 0.0;
  double weak_error = 0.0;
  double mc_halfwidth = 0.0;
  std::uint64_t n_samples = 0;
  bool admissible = false;
  double admissibility_ratio = 0.0;
};

struct ErrorTableMeta {
  double epsilon = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
  std::uint64_t seed = 0;
  std::string norm = "l2";
  bool coupled = true;
  int reference_level = 0;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;
  ErrorTableMeta meta;

  void validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!std::isfinite(rows[i].weak_error) || rows[i].weak_error < 0.0) {
        throw FitError("row " + std::to_string(i) + " has a non-finite or negative error");
      }
      if (i > 0 && !(rows[i].tau < rows[i - 1].tau)) throw FitError("taus must be strictly decreasing");
    }
  }
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // residual sum of squares in log2 space
};

// Least squares of log2(error) against log2(tau), all points weighted equally.
inline RateFit fit_loglog(std::span<const double> taus, std::span<const double> errors) {
  if (taus.size() != errors.size()) throw FitError("tau and error columns differ in length");
  if (taus.size() < 3) throw FitError("a rate fit needs at least 3 rows, got " + std::to_string(taus.size()));
  const std::size_t n = taus.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !std::isfinite(errors[i])) {
      throw FitError("row " + std::to_string(i) + " has a nonpositive error; cannot take log2");
    }
    if (!(taus[i] > 0.0)) throw FitError("row " + std::to_string(i) + " has a nonpositive tau");
    x[i] = std::log2(taus[i]);
    y[i] = std::log2(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("all taus are equal");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residual += r * r;
  }
  return fit;
}

inline RateFit fit_convergence_rate(const ErrorTable& table) {
  table.validate();
  std::vector<double> taus, errs;
  for (const auto& r : table.rows) {
    taus.push_back(r.tau);
    errs.push_back(r.weak_error);
  }
  return fit_loglog(taus, errs);
}

// ---------------------------------------------------------------------------
// Weak errors

struct WeakError {
  double error = 0.0;
  double halfwidth = 0.0;
  double mean_scheme = 0.0;
  double mean_reference = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_failed = 0;
};

struct WeakErrorOptions {
  bool coupled = true;  // drive scheme and reference with the same path
  EnsembleOptions ensemble;
};

inline constexpr double kNormalQuantile975 = 1.96;

// |E phi(X^tau_T) - E phi(X^ref_T)| for every scheme, with a shared reference
// ensemble. In coupled mode the halfwidth is 1.96 std(dphi)/sqrt(n); otherwise
// 1.96 sqrt((var_s + var_r)/n).
// `phi` is any callable phi(basis, state) -> double.
template <class Phi = StepTestFunction>
std::vector<WeakError> weak_error_study(std::span<const SchemeConfig> schemes, const SchemeConfig& reference,
                                        const NoisePlan& plan, std::uint64_t n_samples, const Phi& phi,
                                        const WeakErrorOptions& opts = {}) {
  if (n_samples < 2) throw DomainError("weak error estimation needs at least two samples");
  reference.validate();
  for (const auto& s : schemes) {
    s.validate();
    detail::coarse_ratio(s, plan);
    if (s.basis->size() != reference.basis->size()) throw DomainError("scheme and reference bases differ");
  }
  detail::coarse_ratio(reference, plan);
  const std::size_t n_modes = reference.basis->size();
  const SpectralField x0 = sine_initial_state(n_modes);
  const NoisePlan ref_plan = opts.coupled ? plan : plan.with_stream(plan.stream + 1);

  struct Workspace {
    NoisePath path;
    std::optional<NoisePath> ref_path;
  };
  auto outcomes = parallel_map(
      n_samples, opts.ensemble,
      [&] {
        Workspace w{NoisePath(plan, n_modes), std::nullopt};
        if (!opts.coupled) w.ref_path.emplace(ref_plan, n_modes);
        return w;
      },
      [&](Workspace& w, std::uint64_t s) {
        w.path.generate(s);
        std::vector<double> phis(schemes.size() + 1);
        const NoisePath* rp = &w.path;
        if (w.ref_path) {
          w.ref_path->generate(s);
          rp = &*w.ref_path;
        }
        phis[0] = phi(*reference.basis, run_trajectory(reference, *rp, RecordSpec::endpoint(), x0).endpoint);
        for (std::size_t i = 0; i < schemes.size(); ++i) {
          phis[i + 1] = phi(*schemes[i].basis, run_trajectory(schemes[i], w.path, RecordSpec::endpoint(), x0).endpoint);
        }
        return phis;
      });

  const auto rows = successful(outcomes);
  const std::size_t n_ok = rows.size();
  if (n_ok < 2) throw DomainError("fewer than two samples survived");
  std::vector<double> ref_vals(n_ok);
  for (std::size_t k = 0; k < n_ok; ++k) ref_vals[k] = rows[k][0];
  const SampleStats ref_stats = summarize(ref_vals);

  std::vector<WeakError> out;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    std::vector<double> vals(n_ok), diff(n_ok);
    for (std::size_t k = 0; k < n_ok; ++k) {
      vals[k] = rows[k][i + 1];
      diff[k] = rows[k][i + 1] - rows[k][0];
    }
    const SampleStats st = summarize(vals);
    const SampleStats dst = summarize(diff);
    WeakError we;
    we.mean_scheme = st.mean;
    we.mean_reference = ref_stats.mean;
    we.error = std::abs(dst.mean);
    const double rn = std::sqrt(static_cast<double>(n_ok));
    we.halfwidth = opts.coupled ? kNormalQuantile975 * dst.std / rn
                                : kNormalQuantile975 * std::sqrt(st.std * st.std + ref_stats.std * ref_stats.std) / rn;
    we.n_samples = n_ok;
    we.n_failed = outcomes.failures.size();
    out.push_back(we);
  }
  return out;
}

template <class Phi = StepTestFunction>
WeakError weak_error_estimate(const SchemeConfig& scheme, const SchemeConfig& reference, const NoisePlan& plan,
                              std::uint64_t n_samples, const Phi& phi, const WeakErrorOptions& opts = {}) {
  return weak_error_study(std::span<const SchemeConfig>(&scheme, 1), reference, plan, n_samples, phi, opts).front();
}

// ---------------------------------------------------------------------------
// Moments

struct MomentRow {
  double time = 0.0;
  double mean_l2_sq = 0.0;  // E ||X||_{L2}^2
  double mean_l4_4 = 0.0;   // E ||X||_{L4}^4
  double mean_sup = 0.0;    // E ||X||_sup (nodal)
};

struct MomentReport {
  std::vector<MomentRow> rows;
  double max_mean_l2_sq = 0.0;
  double max_mean_l4_4 = 0.0;
  double max_mean_sup = 0.0;
  double mean_running_max_l2_sq = 0.0;  // E max_m ||X_m||_{L2}^2
  std::uint64_t n_samples = 0;
  std::uint64_t n_failed = 0;
};

// Ensemble means of the norms at each requested time; an empty `times` means
// every step of the scheme grid.
inline MomentReport moment_sup_estimate(const SchemeConfig& cfg, const NoisePlan& plan, std::uint64_t n_samples,
                                        std::span<const double> times, const EnsembleOptions& opts = {}) {
  if (n_samples < 2) throw DomainError("moment estimation needs at least two samples");
  cfg.validate();
  const RecordSpec rec = times.empty() ? RecordSpec::every_step(cfg.n_steps)
                                       : RecordSpec::at_times(times, cfg.tau, cfg.n_steps);
  const std::size_t n_modes = cfg.basis->size();
  const SpectralField x0 = sine_initial_state(n_modes);
  if (cfg.n_steps > 0) detail::coarse_ratio(cfg, plan);
  const std::size_t nt = rec.steps.size();

  auto outcomes = parallel_map(
      n_samples, opts,
      [&] { return std::pair{NoisePath(plan, n_modes), std::vector<double>(n_modes)}; },
      [&](auto& ws, std::uint64_t s) {
        auto& [path, nodal] = ws;
        if (cfg.n_steps > 0 && cfg.noise_enabled) path.generate(s);
        const TrajectoryRecord tr = run_trajectory(cfg, path, rec, x0);
        std::vector<double> v(3 * nt + 1);
        for (std::size_t t = 0; t < nt; ++t) {
          const auto& c = tr.snapshots[t].coeffs;
          cfg.basis->to_physical(c, nodal);
          const double l2 = norm_with_values(*cfg.basis, c, nodal, Norm::l2());
          const double l4 = norm_with_values(*cfg.basis, c, nodal, Norm::lp(2));
          v[3 * t] = l2 * l2;
          v[3 * t + 1] = l4 * l4 * l4 * l4;
          v[3 * t + 2] = norm_with_values(*cfg.basis, c, nodal, Norm::sup());
        }
        v[3 * nt] = tr.monitors.max_l2 * tr.monitors.max_l2;
        return v;
      });

  const auto rows = successful(outcomes);
  MomentReport rep;
  rep.n_samples = rows.size();
  rep.n_failed = outcomes.failures.size();
  std::vector<double> col(rows.size());
  auto column_mean = [&](std::size_t idx) {
    for (std::size_t k = 0; k < rows.size(); ++k) col[k] = rows[k][idx];
    return summarize(col).mean;
  };
  for (std::size_t t = 0; t < nt; ++t) {
    MomentRow r;
    r.time = static_cast<double>(rec.steps[t]) * cfg.tau;
    r.mean_l2_sq = column_mean(3 * t);
    r.mean_l4_4 = column_mean(3 * t + 1);
    r.mean_sup = column_mean(3 * t + 2);
    rep.max_mean_l2_sq = std::max(rep.max_mean_l2_sq, r.mean_l2_sq);
    rep.max_mean_l4_4 = std::max(rep.max_mean_l4_4, r.mean_l4_4);
    rep.max_mean_sup = std::max(rep.max_mean_sup, r.mean_sup);
    rep.rows.push_back(r);
  }
  rep.mean_running_max_l2_sq = column_mean(3 * nt);
  return rep;
}

// ---------------------------------------------------------------------------
// Interface profiles

struct ProfileSet {
  std::vector<double> times;
  std::vector<PhysicalField> mean_profiles;  // one per time
  std::uint64_t n_samples = 0;
  std::uint64_t n_failed = 0;
};

inline ProfileSet interface_profile(const SchemeConfig& cfg, const NoisePlan& plan, std::uint64_t n_samples,
                                    std::span<const double> times, const EnsembleOptions& opts = {}) {
  if (n_samples < 1) throw DomainError("profile estimation needs at least one sample");
  cfg.validate();
  for (double t : times) {
    if (!(t >= 0.0) || t > cfg.horizon() * (1.0 + 1e-12)) throw DomainError("profile time outside the horizon");
  }
  const RecordSpec rec = RecordSpec::at_times(times, cfg.tau, cfg.n_steps);
  const std::size_t n = cfg.basis->size();
  const SpectralField x0 = sine_initial_state(n);
  if (cfg.n_steps > 0) detail::coarse_ratio(cfg, plan);
  const std::size_t nt = rec.steps.size();

  auto outcomes = parallel_map(
      n_samples, opts, [&] { return NoisePath(plan, n); },
      [&](NoisePath& path, std::uint64_t s) {
        if (cfg.n_steps > 0 && cfg.noise_enabled) path.generate(s);
        const TrajectoryRecord tr = run_trajectory(cfg, path, rec, x0);
        std::vector<double> v(nt * n);
        for (std::size_t t = 0; t < nt; ++t) {
          cfg.basis->to_physical(tr.snapshots[t].coeffs, std::span<double>(v).subspan(t * n, n));
        }
        return v;
      });

  const auto rows = successful(outcomes);
  ProfileSet out;
  out.n_samples = rows.size();
  out.n_failed = outcomes.failures.size();
  if (rows.empty()) throw DomainError("no sample survived");
  std::vector<double> col(rows.size());
  for (std::size_t t = 0; t < nt; ++t) {
    out.times.push_back(static_cast<double>(rec.steps[t]) * cfg.tau);
    PhysicalField prof(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < rows.size(); ++k) col[k] = rows[k][t * n + i];
      prof.values[i] = summarize(col).mean;
    }
    out.mean_profiles.push_back(std::move(prof));
  }
  return out;
}

}  // namespace tamed_ac
