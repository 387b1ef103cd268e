// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Informational lines start with "  info".

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tamed_ac/config.hpp"
#include "tamed_ac/experiments.hpp"
#include "tamed_ac/io.hpp"
#include "tamed_ac/tamed_ac.hpp"

using namespace tamed_ac;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& fn) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  if (!v.pass) ++failures;
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " | " << v.detail << " ["
            << fmt(seconds_since(t0), 4) << " s]" << std::endl;
}

void info(const std::string& s) { std::cout << "  info " << s << std::endl; }

// ---------------------------------------------------------------------------

Verdict taming_properties() {
  const auto t0 = Clock::now();
  const DriftSpec d = DriftSpec::allen_cahn();
  const CheckResult dom = check_taming_domination(d, f_tau_eval, 100000, 1);
  const CheckResult gap = check_taming_gap(d, f_tau_eval, 100000, 1);
  const double dt = seconds_since(t0);
  const bool ok = dom.passed && gap.passed && dt < 1.0;
  return {ok, "domination " + std::string(dom.passed ? "ok" : "violated at " + dom.counterexample) + " (worst ratio " +
                  fmt(dom.worst_ratio) + "), gap " + (gap.passed ? "ok" : "violated at " + gap.counterexample) +
                  " (worst ratio " + fmt(gap.worst_ratio) + "), 2 x 1e5 samples in " + fmt(dt, 3) + " s"};
}

Verdict scalar_inequality() {
  const auto t0 = Clock::now();
  const CheckResult r = check_scalar_inequality(100000, 1);
  const double dt = seconds_since(t0);
  return {r.passed && dt < 1.0, std::string(r.passed ? "holds" : "violated at " + r.counterexample) +
                                    " on 1e5 tuples, worst lhs/rhs " + fmt(r.worst_ratio) + ", " + fmt(dt, 3) + " s"};
}

Verdict noise_law() {
  const auto t0 = Clock::now();
  const std::uint64_t n = 100000;
  bool ok = true;
  double worst_z = 0.0;
  std::string where;
  for (int level : {10, 14}) {
    const NoisePlan plan{314159, level, 1.0, 0};
    const double h = plan.fine_step();
    for (std::size_t j : {1u, 8u, 64u}) {
      const double lam = dirichlet_eigenvalue(j);
      for (std::uint64_t ratio : {1u, 2u, 16u}) {
        const double H = h * static_cast<double>(ratio);
        double sdd = 0.0, scc = 0.0, sdc = 0.0;
        for (std::uint64_t s = 0; s < n; ++s) {
          double dw = 0.0, cv = 0.0;
          if (ratio == 1) {
            const auto p = sample_increment_pair(plan, s, j, 0);
            dw = p.dW;
            cv = p.conv;
          } else {
            dw = coarse_brownian_increment(plan, s, j, 0, ratio);
            cv = coarse_convolution_increment(plan, s, j, 0, ratio);
          }
          sdd += dw * dw;
          scc += cv * cv;
          sdc += dw * cv;
        }
        const double nn = static_cast<double>(n);
        const double vd = H;
        const double vc = -std::expm1(-2.0 * lam * H) / (2.0 * lam);
        const double c = -std::expm1(-lam * H) / lam;
        const double z[3] = {std::abs(sdd / nn - vd) / (vd * std::sqrt(2.0 / nn)),
                             std::abs(scc / nn - vc) / (vc * std::sqrt(2.0 / nn)),
                             std::abs(sdc / nn - c) / std::sqrt((vd * vc + c * c) / nn)};
        for (double zi : z) {
          if (zi > worst_z) {
            worst_z = zi;
            where = "j=" + std::to_string(j) + " h=2^-" + std::to_string(level) + " R=" + std::to_string(ratio);
          }
          ok = ok && zi < 4.0;
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  return {ok && dt < 30.0, "largest deviation " + fmt(worst_z, 3) + " standard errors (" + where +
                               ") over modes {1,8,64}, h in {2^-10,2^-14}, R in {1,2,16}, 1e5 pairs each, " +
                               fmt(dt, 3) + " s"};
}

Verdict ou_sanity() {
  const auto t0 = Clock::now();
  const std::uint64_t n = 10000;
  const double T = 2.0;
  const auto basis = std::make_shared<const SineBasis>(64);
  std::vector<double> vars;
  for (double eps : {1.0, 0.01}) {
    // The linear exponential step is exact for any step size.
    auto cfg = SchemeConfig::tamed(basis, DriftSpec::allen_cahn(), eps, 1.0, 5.0, 0.5, T, 6);
    cfg.drift_enabled = false;
    const NoisePlan plan{2718, 6, T, 0};
    NoisePath path(plan, 64);
    std::vector<double> x1sq(n);
    for (std::uint64_t s = 0; s < n; ++s) {
      path.generate(s);
      const auto rec = run_trajectory(cfg, path, RecordSpec::endpoint(), SpectralField(64));
      x1sq[s] = rec.endpoint.coeffs[0] * rec.endpoint.coeffs[0];
    }
    const SampleStats st = summarize(x1sq);
    vars.push_back(st.mean);
    if (vars.size() == 1) {
      const double target = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);
      const double se = st.std / std::sqrt(static_cast<double>(n));
      const double z = std::abs(st.mean - target) / se;
      info("OU mode-1 variance " + fmt(st.mean, 8) + " vs 1/(2 pi^2) = " + fmt(target, 8) + ", " + fmt(z, 3) + " SE");
      if (!(z < 4.0)) return {false, "mode-1 variance " + fmt(st.mean, 8) + " is " + fmt(z, 3) + " SE from target"};
    }
  }
  const double dt = seconds_since(t0);
  const bool same = vars[0] == vars[1];
  return {same && dt < 60.0, "stationary variance " + fmt(vars[0], 8) + " within 4 SE of 0.050660 at T=2 with 1e4 samples, " +
                                 std::string(same ? "identical" : "different") + " for eps=1 and eps=0.01, " +
                                 fmt(dt, 3) + " s"};
}

const std::vector<double> kReferenceAlpha1{0.5982, 0.3533, 0.2131, 0.1319, 0.0853};

std::string errors_of(const ErrorTable& t) {
  std::string s;
  for (const auto& r : t.rows) s += (s.empty() ? "" : ", ") + fmt(r.weak_error, 4);
  return s;
}

ConvergenceResult ci_result;  // reused by the determinism check

Verdict weak_rate() {
  const auto t0 = Clock::now();
  const ExperimentConfig full = preset("paper7-beta5");
  const ConvergenceResult r = convergence_study(full, {1.0});
  const double dt_full = seconds_since(t0);
  const ErrorTable& t = r.tables[0];
  bool mag_ok = t.rows.size() == kReferenceAlpha1.size();
  double worst_ratio_lo = 1e300, worst_ratio_hi = 0.0;
  for (std::size_t i = 0; i < t.rows.size() && i < kReferenceAlpha1.size(); ++i) {
    const double ratio = t.rows[i].weak_error / kReferenceAlpha1[i];
    worst_ratio_lo = std::min(worst_ratio_lo, ratio);
    worst_ratio_hi = std::max(worst_ratio_hi, ratio);
    mag_ok = mag_ok && t.rows[i].weak_error > 0.0 && ratio >= 0.1 && ratio <= 10.0;
  }
  const double slope = r.fits[0] ? r.fits[0]->slope : NAN;
  const bool slope_ok = slope >= 0.40 && slope <= 0.90;
  info("paper7-beta5 errors [" + errors_of(t) + "], ratio to reference alpha = 1 column in [" + fmt(worst_ratio_lo, 3) + ", " +
       fmt(worst_ratio_hi, 3) + "], slope " + fmt(slope, 4) + ", " + fmt(dt_full, 4) + " s");

  const auto t1 = Clock::now();
  ci_result = convergence_study(preset("paper7-beta5-ci"), {1.0});
  const double dt_ci = seconds_since(t1);
  const double ci_slope = ci_result.fits[0] ? ci_result.fits[0]->slope : NAN;
  const bool ci_ok = ci_slope >= 0.3 && ci_slope <= 1.0 && dt_ci < 300.0;
  info("paper7-beta5-ci errors [" + errors_of(ci_result.tables[0]) + "], slope " + fmt(ci_slope, 4) + ", " +
       fmt(dt_ci, 4) + " s");

  const bool ok = mag_ok && slope_ok && dt_full < 1800.0 && ci_ok;
  return {ok, std::string("(a) magnitudes ") + (mag_ok ? "within" : "outside") + " [0.1x, 10x] of the reference alpha = 1 column" +
                  ", (b) slope " + fmt(slope, 4) + (slope_ok ? " in" : " outside") + " [0.40, 0.90], CI slope " +
                  fmt(ci_slope, 4) + (ci_ok ? " in" : " outside") + " [0.3, 1.0]"};
}

// Not gating: the same experiment measured with the unnormalized nodal norm.
void nodal_norm_info() {
  const auto t0 = Clock::now();
  ExperimentConfig c = preset("paper7-beta5");
  c.observable.norm = "nodal";
  const ConvergenceResult r = convergence_study(c, {1.0});
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 0; i < r.tables[0].rows.size(); ++i) {
    const double q = r.tables[0].rows[i].weak_error / kReferenceAlpha1[i];
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  info("not gating: paper7-beta5 with observable.norm=nodal gives errors [" + errors_of(r.tables[0]) +
       "], ratio to reference alpha = 1 column in [" + fmt(lo, 3) + ", " + fmt(hi, 3) + "], slope " +
       fmt(r.fits[0] ? r.fits[0]->slope : NAN, 4) + ", " + fmt(seconds_since(t0), 4) + " s");
}

Verdict beta100_regime() {
  const ExperimentConfig c = preset("paper7-beta100");
  const ConvergenceResult r = convergence_study(c, {1.0});
  const ErrorTable& t = r.tables[0];
  bool all_adm = true;
  for (const auto& row : t.rows) all_adm = all_adm && row.admissible;
  const double slope = r.fits[0] ? r.fits[0]->slope : NAN;
  const bool consts = r.constants.c0 == 0.5 && r.constants.c3 == 1.0;
  const bool ok = all_adm && consts && slope >= 0.35 && slope <= 0.90;
  info("paper7-beta100 errors [" + errors_of(t) + "]");
  return {ok, std::string(all_adm ? "all" : "not all") + " step sizes admissible (largest ratio " +
                  fmt(t.rows.front().admissibility_ratio, 4) + "), c0=" + fmt(r.constants.c0) +
                  ", c3=" + fmt(r.constants.c3) + ", slope " + fmt(slope, 4) + " vs [0.35, 0.90]"};
}

Verdict moment_stability() {
  ExperimentConfig c = preset("paper7-beta5");
  c.moments.n_samples = 100;
  c.moments.tau_level = 10;
  c.moments.horizons = {1.0, 2.0};
  const auto runs = moment_study(c);
  bool finite = true;
  for (const auto& run : runs) {
    finite = finite && run.report.n_failed == 0;
    for (const auto& row : run.report.rows) {
      finite = finite && std::isfinite(row.mean_l2_sq) && std::isfinite(row.mean_l4_4) && std::isfinite(row.mean_sup);
    }
  }
  const double m1 = runs[0].report.max_mean_l2_sq;
  const double m2 = runs[1].report.max_mean_l2_sq;
  const bool ok = finite && m2 <= 1.5 * m1;
  return {ok, std::string(finite ? "no" : "found") + " NaN/Inf over 100 samples, max_t E|X|^2 = " + fmt(m1) +
                  " (T=1), " + fmt(m2) + " (T=2), ratio " + fmt(m2 / m1, 4) + " vs 1.5"};
}

std::vector<ProfileRun> eps3_profiles;  // reused by the determinism check

Verdict interface_capture() {
  const ExperimentConfig c = preset("interface-eps3");
  eps3_profiles = interface_study(c);
  const SineBasis b(c.discretization.n_modes);
  const ProfileSet& p = eps3_profiles.front().profiles;
  double peak = 0.0;
  for (const auto& prof : p.mean_profiles) {
    for (double v : prof.values) peak = std::max(peak, std::abs(v));
  }
  double t0_dev = INFINITY;
  for (std::size_t t = 0; t < p.times.size(); ++t) {
    if (p.times[t] != 0.0) continue;
    t0_dev = 0.0;
    for (std::size_t i = 1; i <= b.size(); ++i) {
      t0_dev = std::max(t0_dev, std::abs(p.mean_profiles[t].values[i - 1] - std::sin(std::numbers::pi * b.node(i))));
    }
  }
  const bool ok = peak <= 1.1 && t0_dev <= 1e-12;
  return {ok, "max |mean profile| " + fmt(peak, 6) + " vs 1.1 over " + std::to_string(p.times.size()) +
                  " times, t=0 row deviates from sin(pi x_i) by " + fmt(t0_dev, 3)};
}

Verdict determinism() {
  const ConvergenceResult again = convergence_study(preset("paper7-beta5-ci"), {1.0}, RunOptions{2});
  const bool conv_same = error_table_csv(again.tables[0]) == error_table_csv(ci_result.tables[0]);
  const ExperimentConfig ic = preset("interface-eps3");
  const auto profiles = interface_study(ic, RunOptions{3});
  const SineBasis b(ic.discretization.n_modes);
  const bool prof_same = profile_csv(b, profiles.front().profiles) == profile_csv(b, eps3_profiles.front().profiles);
  return {conv_same && prof_same, std::string("paper7-beta5-ci error table ") +
                                      (conv_same ? "identical" : "DIFFERENT") + " for 1 vs 2 threads, interface-eps3 " +
                                      "profiles " + (prof_same ? "identical" : "DIFFERENT") + " for 1 vs 3 threads"};
}

}  // namespace

int main() {
  report(1, "taming domination and gap", taming_properties);
  report(2, "scalar (A + rB)^rho inequality", scalar_inequality);
  report(3, "noise increment law and coarse aggregation", noise_law);
  report(4, "Ornstein-Uhlenbeck stationary variance", ou_sanity);
  report(5, "weak rate, preset paper7-beta5 and CI preset", weak_rate);
  nodal_norm_info();
  report(6, "beta^alpha = 1/eps regime, preset paper7-beta100", beta100_regime);
  report(7, "moment stability over T in {1, 2}", moment_stability);
  report(8, "interface capture, preset interface-eps3", interface_capture);
  report(9, "thread-count independence of outputs", determinism);
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criterion(s) fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
