#pragma once

// Time integrators for  dX = -A X dt + eps^{-1} F(X) dt + dW  on the sine basis.
//
// Tamed exponential Euler:
//   X_{m+1} = E(tau) X_m + tau E(tau) eps^{-1} F_tau(X_m) + int E(t_{m+1}-s) dW(s)
// Linear-implicit reference:
//   X_{m+1,j} = (X_{m,j} + tau eps^{-1} [F(X_m)]_j + dW_j) / (1 + tau lambda_j)
//
// Nemytskii operators are evaluated by collocation: transform to the nodes,
// apply the scalar function, transform back (no dealiasing).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tamed_ac/drift.hpp"
#include "tamed_ac/error.hpp"
#include "tamed_ac/noise.hpp"
#include "tamed_ac/spectral.hpp"

namespace tamed_ac {

enum class SchemeKind { tamed_exponential_euler, semi_implicit_reference };

struct SchemeConfig {
  double epsilon = 0.01;
  double tau = 1.0 / 1024.0;
  std::uint64_t n_steps = 1024;
  std::shared_ptr<const SineBasis> basis;
  DriftSpec drift = DriftSpec::allen_cahn();
  TamingParams taming;  // taming.tau mirrors tau for the tamed scheme
  SchemeKind kind = SchemeKind::tamed_exponential_euler;
  bool drift_enabled = true;  // false runs the linear (F = 0) problem
  bool noise_enabled = true;  // false runs the deterministic problem

  double horizon() const noexcept { return tau * static_cast<double>(n_steps); }

  void validate() const {
    if (!basis) throw InvalidParamsError("scheme config has no basis");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw InvalidParamsError("epsilon must lie in (0, 1]");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidParamsError("tau must be positive");
    drift.validate();
    if (kind == SchemeKind::tamed_exponential_euler) {
      taming.validate();
      if (taming.tau != tau) throw InvalidParamsError("taming.tau must equal the scheme step");
    }
  }

  static SchemeConfig tamed(std::shared_ptr<const SineBasis> basis, const DriftSpec& drift, double epsilon,
                            double alpha, double beta, double theta, double horizon, int level) {
    SchemeConfig c;
    c.basis = std::move(basis);
    c.drift = drift;
    c.epsilon = epsilon;
    c.n_steps = std::uint64_t{1} << level;
    c.tau = std::ldexp(horizon, -level);
    c.taming = {alpha, beta, theta, c.tau};
    c.kind = SchemeKind::tamed_exponential_euler;
    return c;
  }

  static SchemeConfig reference(std::shared_ptr<const SineBasis> basis, const DriftSpec& drift, double epsilon,
                                double horizon, int level) {
    SchemeConfig c;
    c.basis = std::move(basis);
    c.drift = drift;
    c.epsilon = epsilon;
    c.n_steps = std::uint64_t{1} << level;
    c.tau = std::ldexp(horizon, -level);
    c.taming.tau = c.tau;
    c.kind = SchemeKind::semi_implicit_reference;
    return c;
  }
};

// Reusable single-step kernel; owns its workspace, so one per thread.
class Stepper {
 public:
  explicit Stepper(const SchemeConfig& cfg)
      : basis_(cfg.basis),
        kind_(cfg.kind),
        drift_enabled_(cfg.drift_enabled),
        drift_(cfg.kind == SchemeKind::tamed_exponential_euler ? TamedDrift(cfg.drift, cfg.taming)
                                                               : TamedDrift(cfg.drift)),
        scale_(cfg.tau / cfg.epsilon) {
    cfg.validate();
    const std::size_t n = basis_->size();
    factor_.resize(n);
    const auto lam = basis_->eigenvalues();
    for (std::size_t j = 0; j < n; ++j) {
      factor_[j] = kind_ == SchemeKind::tamed_exponential_euler ? std::exp(-lam[j] * cfg.tau)
                                                                : 1.0 + cfg.tau * lam[j];
    }
    nodal_.resize(n);
    drift_nodal_.resize(n);
    work_.resize(n);
  }

  // state <- one step of the configured scheme driven by `noise` (coarse
  // convolution increments for the tamed scheme, Brownian increments for the
  // reference). Afterwards nodal() holds the nodal values of the input state.
  void advance(std::span<double> state, std::span<const double> noise, std::uint64_t step) {
    const std::size_t n = state.size();
    basis_->to_physical(state, nodal_);
    if (drift_enabled_) {
      for (std::size_t i = 0; i < n; ++i) drift_nodal_[i] = drift_(nodal_[i]);
      basis_->to_spectral(drift_nodal_, work_);
    } else {
      std::fill(work_.begin(), work_.end(), 0.0);
    }
    if (kind_ == SchemeKind::tamed_exponential_euler) {
      for (std::size_t j = 0; j < n; ++j) state[j] = factor_[j] * (state[j] + scale_ * work_[j]) + noise[j];
    } else {
      for (std::size_t j = 0; j < n; ++j) state[j] = (state[j] + scale_ * work_[j] + noise[j]) / factor_[j];
    }
    if (!all_finite(state)) throw BlowUpError(step);
  }

  std::span<const double> nodal() const noexcept { return nodal_; }
  const SineBasis& basis() const noexcept { return *basis_; }

 private:
  std::shared_ptr<const SineBasis> basis_;
  SchemeKind kind_;
  bool drift_enabled_;
  TamedDrift drift_;
  double scale_;                // tau / epsilon
  std::vector<double> factor_;  // exp(-lambda tau), or 1 + tau lambda
  std::vector<double> nodal_;
  std::vector<double> drift_nodal_;
  std::vector<double> work_;  // spectral coefficients of F(state)
};

inline SpectralField tamed_exponential_step(const SpectralField& state, const SchemeConfig& cfg,
                                            const SpectralField& noise, std::uint64_t step = 0) {
  if (cfg.kind != SchemeKind::tamed_exponential_euler) throw UsageError("config is not a tamed scheme");
  Stepper stepper(cfg);
  SpectralField out = state;
  stepper.advance(out.coeffs, noise.coeffs, step);
  return out;
}

inline SpectralField semi_implicit_reference_step(const SpectralField& state, const SchemeConfig& cfg,
                                                  const SpectralField& dW, std::uint64_t step = 0) {
  if (cfg.kind != SchemeKind::semi_implicit_reference) throw UsageError("config is not the reference scheme");
  Stepper stepper(cfg);
  SpectralField out = state;
  stepper.advance(out.coeffs, dW.coeffs, step);
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

struct RecordSpec {
  std::vector<std::uint64_t> steps;  // sorted snapshot step indices

  static RecordSpec endpoint() { return {}; }

  // Snapshot times must lie on the step grid t_m = m tau.
  static RecordSpec at_times(std::span<const double> times, double tau, std::uint64_t n_steps) {
    RecordSpec r;
    for (double t : times) {
      const double m = t / tau;
      const double rounded = std::round(m);
      if (!(t >= 0.0) || std::abs(m - rounded) > 1e-9 * std::max(1.0, m) ||
          rounded > static_cast<double>(n_steps)) {
        throw DomainError("snapshot time " + std::to_string(t) + " is not on the step grid");
      }
      r.steps.push_back(static_cast<std::uint64_t>(rounded));
    }
    std::sort(r.steps.begin(), r.steps.end());
    r.steps.erase(std::unique(r.steps.begin(), r.steps.end()), r.steps.end());
    return r;
  }

  static RecordSpec every_step(std::uint64_t n_steps) {
    RecordSpec r;
    r.steps.resize(n_steps + 1);
    for (std::uint64_t m = 0; m <= n_steps; ++m) r.steps[m] = m;
    return r;
  }
};

// Running maxima over t_0..t_M.
struct Monitors {
  double max_l2 = 0.0;
  double max_l4 = 0.0;
  double max_sup = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<SpectralField> snapshots;
  SpectralField endpoint;
  Monitors monitors;
};

namespace detail {

inline void update_monitors(Monitors& mon, const SineBasis& basis, std::span<const double> coeffs,
                            std::span<const double> nodal) {
  mon.max_l2 = std::max(mon.max_l2, norm_with_values(basis, coeffs, nodal, Norm::l2()));
  mon.max_l4 = std::max(mon.max_l4, norm_with_values(basis, coeffs, nodal, Norm::lp(2)));
  mon.max_sup = std::max(mon.max_sup, norm_with_values(basis, coeffs, nodal, Norm::sup()));
}

inline std::uint64_t coarse_ratio(const SchemeConfig& cfg, const NoisePlan& plan) {
  if (std::abs(plan.horizon - cfg.horizon()) > 1e-12 * std::max(1.0, plan.horizon)) {
    throw AlignmentError("scheme horizon " + std::to_string(cfg.horizon()) + " differs from noise horizon " +
                         std::to_string(plan.horizon));
  }
  if (cfg.n_steps == 0 || plan.fine_steps() % cfg.n_steps != 0 ||
      !std::has_single_bit(plan.fine_steps() / cfg.n_steps)) {
    throw AlignmentError("step count " + std::to_string(cfg.n_steps) + " does not divide the fine grid of " +
                         std::to_string(plan.fine_steps()) + " steps by a power of two");
  }
  return plan.fine_steps() / cfg.n_steps;
}

}  // namespace detail

// Integrates from x0 along `path`. With n_steps == 0 the record holds x0.
inline TrajectoryRecord run_trajectory(const SchemeConfig& cfg, const NoisePath& path, const RecordSpec& record,
                                       const SpectralField& x0) {
  cfg.validate();
  const SineBasis& basis = *cfg.basis;
  if (x0.size() != basis.size()) throw DomainError("initial state size differs from basis");
  TrajectoryRecord out;
  SpectralField state = x0;
  std::vector<double> nodal(basis.size());
  auto next_snapshot = record.steps.begin();
  auto maybe_snapshot = [&](std::uint64_t m) {
    while (next_snapshot != record.steps.end() && *next_snapshot == m) {
      out.times.push_back(static_cast<double>(m) * cfg.tau);
      out.snapshots.push_back(state);
      ++next_snapshot;
    }
  };

  if (cfg.n_steps == 0) {
    basis.to_physical(state.coeffs, nodal);
    detail::update_monitors(out.monitors, basis, state.coeffs, nodal);
    maybe_snapshot(0);
    out.endpoint = state;
    return out;
  }
  if (path.modes() != basis.size()) throw DomainError("noise path and basis differ in mode count");
  const std::uint64_t ratio = detail::coarse_ratio(cfg, path.plan());

  Stepper stepper(cfg);
  std::vector<double> noise(basis.size());
  for (std::uint64_t m = 0; m < cfg.n_steps; ++m) {
    maybe_snapshot(m);
    const double l2 = norm_with_values(basis, state.coeffs, {}, Norm::l2());
    if (!cfg.noise_enabled) {
      // noise stays zero
    } else if (cfg.kind == SchemeKind::tamed_exponential_euler) {
      path.coarse_conv(m, ratio, noise);
    } else {
      path.coarse_dw(m, ratio, noise);
    }
    try {
      stepper.advance(state.coeffs, noise, m);
    } catch (const BlowUpError&) {
      throw BlowUpError(m, path.sample());
    }
    // stepper.nodal() holds the values of the pre-step state.
    out.monitors.max_l2 = std::max(out.monitors.max_l2, l2);
    out.monitors.max_l4 = std::max(out.monitors.max_l4, norm_with_values(basis, {}, stepper.nodal(), Norm::lp(2)));
    out.monitors.max_sup = std::max(out.monitors.max_sup, norm_with_values(basis, {}, stepper.nodal(), Norm::sup()));
  }
  maybe_snapshot(cfg.n_steps);
  basis.to_physical(state.coeffs, nodal);
  detail::update_monitors(out.monitors, basis, state.coeffs, nodal);
  out.endpoint = std::move(state);
  return out;
}

// Generates the sample's noise path from the plan, then integrates from the
// default initial state sin(pi x).
inline TrajectoryRecord run_trajectory(const SchemeConfig& cfg, const NoisePlan& plan, std::uint64_t sample,
                                       const RecordSpec& record) {
  cfg.validate();
  const SpectralField x0 = sine_initial_state(cfg.basis->size());
  NoisePath path(plan, cfg.basis->size());
  if (cfg.n_steps > 0) {
    detail::coarse_ratio(cfg, plan);
    if (cfg.noise_enabled) path.generate(sample);
  }
  return run_trajectory(cfg, path, record, x0);
}

}  // namespace tamed_ac
