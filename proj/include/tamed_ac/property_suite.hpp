#pragma once

// Randomized and grid-based checks of the structural inequalities the tamed
// and regularized drifts must satisfy. Failures are reported, not thrown, so
// that a report always lists every check with its sample count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tamed_ac/drift.hpp"
#include "tamed_ac/error.hpp"

namespace tamed_ac {

using TamedDriftFn = std::function<double(const DriftSpec&, const TamingParams&, double)>;

// Deliberately broken tamings used to show that the checks bite.
enum class TamingMutant {
  none,
  missing_unit,  // f / (beta tau^theta |v|^p)^alpha
  inverted,      // f * (1 + beta tau^theta |v|^p)^alpha
};

inline TamedDriftFn taming_under_test(TamingMutant m) {
  switch (m) {
    case TamingMutant::none:
      return f_tau_eval;
    case TamingMutant::missing_unit:
      return [](const DriftSpec& d, const TamingParams& p, double v) {
        const double x = p.beta * std::pow(p.tau, p.theta) * std::pow(std::abs(v), (2.0 * d.q - 2.0) / p.alpha);
        return f_eval(d, v) / std::pow(x, p.alpha);
      };
    case TamingMutant::inverted:
      return [](const DriftSpec& d, const TamingParams& p, double v) {
        const double x = p.beta * std::pow(p.tau, p.theta) * std::pow(std::abs(v), (2.0 * d.q - 2.0) / p.alpha);
        return f_eval(d, v) * std::pow(1.0 + x, p.alpha);
      };
  }
  return f_tau_eval;
}

// Right-hand side of
//   (A + rB)^rho <= e^{(rho-1) ups r} A^rho
//                   + r (r^{rho-1} + (1 + (2/ups)^{rho-1})(1 + r^{rho-1}) e^{rho-1}) B^rho.
inline double scalar_inequality_rhs(double a, double b, double r, double ups, int rho) {
  const double rm1 = static_cast<double>(rho - 1);
  const double rp = std::pow(r, rm1);
  return std::exp(rm1 * ups * r) * std::pow(a, rho) +
         r * (rp + (1.0 + std::pow(2.0 / ups, rm1)) * (1.0 + rp) * std::exp(rm1)) * std::pow(b, rho);
}

struct CheckResult {
  std::string name;
  std::uint64_t samples = 0;
  bool passed = true;
  double worst_ratio = 0.0;  // max observed lhs/rhs (or equivalent)
  std::string counterexample;
  std::string detail;

  static CheckResult named(std::string name, std::uint64_t samples = 0) {
    CheckResult r;
    r.name = std::move(name);
    r.samples = samples;
    return r;
  }
};

struct PropertyReport {
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::optional<DriftConstants> constants;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
};

struct PropertySuiteOptions {
  std::uint64_t seed = 1;
  std::uint64_t taming_samples = 100000;
  std::uint64_t inequality_samples = 100000;
  TamingMutant mutant = TamingMutant::none;
};

namespace detail {

inline std::string describe(double u, const TamingParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "u=" << u << " alpha=" << p.alpha << " beta=" << p.beta << " theta=" << p.theta << " tau=" << p.tau;
  return os.str();
}

// Sample u in [-1e3, 1e3]: half uniform, half log-uniform in magnitude.
inline double sample_u(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double sign = uni(rng) < 0.5 ? -1.0 : 1.0;
  if (uni(rng) < 0.5) return sign * 1e3 * uni(rng);
  return sign * std::exp(std::log(1e-6) + uni(rng) * (std::log(1e3) - std::log(1e-6)));
}

inline TamingParams sample_taming(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return std::exp(std::log(lo) + uni(rng) * (std::log(hi) - std::log(lo))); };
  TamingParams p;
  p.theta = log_uniform(0.05, 2.0);
  p.alpha = (0.001 + 0.998 * uni(rng)) / p.theta;
  p.beta = log_uniform(1e-3, 1e3);
  p.tau = log_uniform(1e-6, 1.0);
  return p;
}

// alpha beta tau^theta |u|^{(2q-2)/alpha} |f(u)|, overflow-safe.
inline double taming_gap_bound(const DriftSpec& d, const TamingParams& p, double u, double fu) {
  if (fu == 0.0 || u == 0.0) return 0.0;
  const double expo = (2.0 * d.q - 2.0) / p.alpha;
  const double log_rhs = std::log(p.alpha * p.beta) + p.theta * std::log(p.tau) + expo * std::log(std::abs(u)) +
                         std::log(std::abs(fu));
  return log_rhs > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(log_rhs);
}

}  // namespace detail

inline CheckResult check_taming_domination(const DriftSpec& d, const TamedDriftFn& ftau, std::uint64_t n,
                                           std::uint64_t seed) {
  CheckResult res = CheckResult::named("taming_domination", n);
  std::mt19937_64 rng(seed);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double u = detail::sample_u(rng);
    const TamingParams p = detail::sample_taming(rng);
    const double ft = std::abs(ftau(d, p, u));
    const double f = std::abs(f_eval(d, u));
    const double ratio = f > 0.0 ? ft / f : (ft > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    res.worst_ratio = std::max(res.worst_ratio, ratio);
    if (!(ft <= f * (1.0 + 1e-12)) && res.passed) {
      res.passed = false;
      res.counterexample = detail::describe(u, p);
    }
  }
  res.detail = "|f_tau(u)| <= |f(u)|";
  return res;
}

inline CheckResult check_taming_gap(const DriftSpec& d, const TamedDriftFn& ftau, std::uint64_t n, std::uint64_t seed) {
  CheckResult res = CheckResult::named("taming_gap", n);
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double u = detail::sample_u(rng);
    const TamingParams p = detail::sample_taming(rng);
    const double f = f_eval(d, u);
    const double lhs = std::abs(ftau(d, p, u) - f);
    // When the gap is near machine precision relative to f, rounding in
    // f_tau dominates; allow a few ulps of |f|.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f);
    const double rhs = detail::taming_gap_bound(d, p, u, f) + slack;
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (std::isfinite(ratio)) res.worst_ratio = std::max(res.worst_ratio, ratio);
    if (!(lhs <= rhs * (1.0 + 1e-9)) && res.passed) {
      res.passed = false;
      res.worst_ratio = ratio;
      res.counterexample = detail::describe(u, p);
    }
  }
  res.detail = "|f_tau(u) - f(u)| <= alpha beta tau^theta |u|^{(2q-2)/alpha} |f(u)|";
  return res;
}

inline CheckResult check_scalar_inequality(std::uint64_t n, std::uint64_t seed) {
  CheckResult res = CheckResult::named("scalar_inequality", n);
  std::mt19937_64 rng(seed ^ 0xBB67AE8584CAA73BULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return std::exp(std::log(lo) + uni(rng) * (std::log(hi) - std::log(lo))); };
  for (std::uint64_t k = 0; k < n; ++k) {
    // Exact zeros exercise the A = 0 / B = 0 boundary.
    const double a = k % 97 == 0 ? 0.0 : 10.0 * uni(rng);
    const double b = k % 89 == 0 ? 0.0 : 10.0 * uni(rng);
    const double r = log_uniform(1e-3, 10.0);
    const double ups = log_uniform(1e-3, 10.0);
    const int rho = 1 + static_cast<int>(k % 6);
    const double lhs = std::pow(a + r * b, rho);
    const double rhs = scalar_inequality_rhs(a, b, r, ups, rho);
    if (rhs > 0.0) res.worst_ratio = std::max(res.worst_ratio, lhs / rhs);
    if (!(lhs <= rhs * (1.0 + 1e-9)) && res.passed) {
      res.passed = false;
      std::ostringstream os;
      os.precision(17);
      os << "A=" << a << " B=" << b << " r=" << r << " upsilon=" << ups << " rho=" << rho;
      res.counterexample = os.str();
    }
  }
  res.detail = "(A + rB)^rho bound, rho in 1..6";
  return res;
}

// sup_u f_delta'(u) over the grid stays below 1.1 x its value at delta = 1e-4
// for every delta in {1, 1e-2, 1e-4}.
inline CheckResult check_f_delta_one_sided(const DriftSpec& d, const std::vector<double>& grid) {
  CheckResult res = CheckResult::named("f_delta_one_sided_bound");
  auto grid_sup = [&](double delta) {
    double s = -std::numeric_limits<double>::infinity();
    for (double u : grid) s = std::max(s, f_delta_prime_eval(d, delta, u));
    return s;
  };
  const double base = grid_sup(1e-4);
  const double bound = base + 0.1 * std::abs(base);
  for (double delta : {1.0, 1e-2, 1e-4}) {
    const double s = grid_sup(delta);
    res.samples += grid.size();
    if (bound != 0.0) res.worst_ratio = std::max(res.worst_ratio, s / bound);
    if (!(s <= bound) && res.passed) {
      res.passed = false;
      res.counterexample = "delta=" + std::to_string(delta) + " sup=" + std::to_string(s);
    }
  }
  res.detail = "bound=" + std::to_string(bound);
  return res;
}

// |f_delta'(u)| <= C (1 + min(|u|^{2q-2}, delta^{-1/2})) with C fitted (plus
// 10%) at delta = 1e-8 and then held fixed for delta in {1, 1e-2, 1e-4}.
inline CheckResult check_f_delta_derivative_structure(const DriftSpec& d, const std::vector<double>& grid) {
  CheckResult res = CheckResult::named("f_delta_derivative_structure");
  const auto m = static_cast<unsigned>(2 * d.q - 2);
  auto ratio_sup = [&](double delta) {
    double s = 0.0;
    double at = 0.0;
    for (double u : grid) {
      const double w = 1.0 + std::min(detail::ipow(std::abs(u), m), 1.0 / std::sqrt(delta));
      const double r = std::abs(f_delta_prime_eval(d, delta, u)) / w;
      if (r > s) {
        s = r;
        at = u;
      }
    }
    return std::pair{s, at};
  };
  const double c = 1.1 * ratio_sup(1e-8).first;
  for (double delta : {1.0, 1e-2, 1e-4}) {
    const auto [s, at] = ratio_sup(delta);
    res.samples += grid.size();
    res.worst_ratio = std::max(res.worst_ratio, s / c);
    if (!(s <= c) && res.passed) {
      res.passed = false;
      res.counterexample = "delta=" + std::to_string(delta) + " u=" + std::to_string(at);
    }
  }
  res.detail = "C=" + std::to_string(c);
  return res;
}

// Analytic f_delta' against a centered difference of f_delta.
inline CheckResult check_f_delta_prime_fd(const DriftSpec& d, std::uint64_t n, std::uint64_t seed) {
  CheckResult res = CheckResult::named("f_delta_prime_finite_difference", n);
  std::mt19937_64 rng(seed ^ 0x3C6EF372FE94F82BULL);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  const double deltas[] = {1.0, 1e-2, 1e-4};
  for (std::uint64_t k = 0; k < n; ++k) {
    const double u = uni(rng);
    const double delta = deltas[k % 3];
    const double h = 1e-5 * std::max(1.0, std::abs(u));
    const double fd = (f_delta_eval(d, delta, u + h) - f_delta_eval(d, delta, u - h)) / (2.0 * h);
    const double an = f_delta_prime_eval(d, delta, u);
    const double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
    res.worst_ratio = std::max(res.worst_ratio, rel / 1e-6);
    if (!(rel <= 1e-6) && res.passed) {
      res.passed = false;
      res.counterexample = "u=" + std::to_string(u) + " delta=" + std::to_string(delta);
    }
  }
  res.detail = "relative tolerance 1e-6";
  return res;
}

inline PropertyReport property_suite(const DriftSpec& d, const PropertySuiteOptions& opts = {}) {
  PropertyReport rep;
  rep.seed = opts.seed;
  const TamedDriftFn ftau = taming_under_test(opts.mutant);

  CheckResult constants = CheckResult::named("drift_constants", 1);
  try {
    rep.constants = derive_growth_constants(d);
    const auto& c = *rep.constants;
    std::ostringstream os;
    os.precision(17);
    os << "L_f=" << c.lipschitz << " c0=" << c.c0 << " c1=" << c.c1 << " c2=" << c.c2 << " c3=" << c.c3
       << " c4=" << c.c4 << " c5=" << c.c5;
    constants.detail = os.str();
  } catch (const DerivationError& e) {
    constants.passed = false;
    std::ostringstream os;
    os.precision(17);
    os << "u=" << e.u() << " v=" << e.v();
    constants.counterexample = os.str();
    constants.detail = e.what();
  }
  rep.checks.push_back(constants);

  rep.checks.push_back(check_taming_domination(d, ftau, opts.taming_samples, opts.seed));
  rep.checks.push_back(check_taming_gap(d, ftau, opts.taming_samples, opts.seed));
  const auto grid = verification_grid();
  rep.checks.push_back(check_f_delta_one_sided(d, grid));
  rep.checks.push_back(check_f_delta_derivative_structure(d, grid));
  rep.checks.push_back(check_f_delta_prime_fd(d, 10000, opts.seed));
  rep.checks.push_back(check_scalar_inequality(opts.inequality_samples, opts.seed));
  return rep;
}

}  // namespace tamed_ac
