#pragma once

// Polynomial drift f(v) = -c_f v^{2q-1} + f0(v), its taming
//
//   f_tau(v) = f(v) / (1 + beta tau^theta |v|^{(2q-2)/alpha})^alpha,
//
// the regularization f_delta(v) = f(v) / (1 + sqrt(delta) |v|^{2q-2}), and the
// structural constants (L_f, c0..c5) certified on a fixed verification grid.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "tamed_ac/error.hpp"

namespace tamed_ac {

struct DriftSpec {
  int q = 2;             // degree of f is 2q - 1
  double leading = 1.0;  // c_f, coefficient of -v^{2q-1}
  std::vector<double> lower{0.0, 1.0};  // f0 coefficients, ascending powers, degree <= 2q-2

  // f(v) = v - v^3
  static DriftSpec allen_cahn() { return DriftSpec{}; }

  // Full ascending coefficient list of f.
  std::vector<double> coefficients() const {
    std::vector<double> c(static_cast<std::size_t>(2 * q), 0.0);
    std::copy(lower.begin(), lower.end(), c.begin());
    c.back() -= leading;
    return c;
  }

  // Structural checks only; a nonpositive leading coefficient is left for
  // derive_growth_constants to reject with a counterexample.
  void validate() const {
    if (q < 2) throw InvalidParamsError("drift degree parameter q must be >= 2");
    if (lower.size() > static_cast<std::size_t>(2 * q - 1)) {
      throw InvalidParamsError("lower-order part f0 must have degree <= 2q-2");
    }
    if (!std::isfinite(leading)) throw InvalidParamsError("leading coefficient must be finite");
    for (double a : lower) {
      if (!std::isfinite(a)) throw InvalidParamsError("f0 coefficients must be finite");
    }
  }

  bool operator==(const DriftSpec&) const = default;
};

struct TamingParams {
  double alpha = 1.0;
  double beta = 5.0;
  double theta = 0.5;
  double tau = 1.0 / 1024.0;

  void validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(theta > 0.0) || !(tau > 0.0)) {
      throw InvalidParamsError("taming parameters alpha, beta, theta, tau must be positive");
    }
    if (!(theta * alpha < 1.0)) throw InvalidParamsError("taming requires theta * alpha < 1");
  }

  bool operator==(const TamingParams&) const = default;
};

namespace detail {

inline double horner(std::span<const double> ascending, double v) noexcept {
  double acc = 0.0;
  for (auto it = ascending.rbegin(); it != ascending.rend(); ++it) acc = acc * v + *it;
  return acc;
}

inline double horner_derivative(std::span<const double> ascending, double v) noexcept {
  double acc = 0.0;
  for (std::size_t k = ascending.size(); k-- > 1;) acc = acc * v + static_cast<double>(k) * ascending[k];
  return acc;
}

inline double ipow(double x, unsigned n) noexcept {
  double r = 1.0;
  while (n != 0) {
    if (n & 1U) r *= x;
    x *= x;
    n >>= 1U;
  }
  return r;
}

// log(1 + e^y) without overflow.
inline double log1p_exp(double y) noexcept {
  return y > 30.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

}  // namespace detail

inline double f_eval(const DriftSpec& d, double v) {
  const auto c = d.coefficients();
  return detail::horner(c, v);
}

inline double f_prime_eval(const DriftSpec& d, double v) {
  const auto c = d.coefficients();
  return detail::horner_derivative(c, v);
}

inline double f_tau_eval(const DriftSpec& d, const TamingParams& p, double v) {
  const double fv = f_eval(d, v);
  if (v == 0.0 || fv == 0.0) return fv;
  const double expo = static_cast<double>(2 * d.q - 2) / p.alpha;
  const double scale = p.beta * std::pow(p.tau, p.theta);
  const double x = scale * std::pow(std::abs(v), expo);
  const double den = std::pow(1.0 + x, p.alpha);
  if (std::isfinite(fv) && std::isfinite(x) && std::isfinite(den)) return fv / den;
  // Overflow: evaluate in the log domain. Where f itself overflows only its
  // leading term matters.
  const double log_x = std::log(scale) + expo * std::log(std::abs(v));
  const double log_den = p.alpha * detail::log1p_exp(log_x);
  if (std::isfinite(fv)) return fv * std::exp(-log_den);
  const double top = d.coefficients().back();
  const int deg = 2 * d.q - 1;
  const double sign = (top < 0.0) == (v < 0.0 && deg % 2 == 1) ? 1.0 : -1.0;
  return sign * std::exp(std::log(std::abs(top)) + deg * std::log(std::abs(v)) - log_den);
}

inline void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("delta must lie in (0, 1]");
}

inline double f_delta_eval(const DriftSpec& d, double delta, double v) {
  check_delta(delta);
  const double den = 1.0 + std::sqrt(delta) * detail::ipow(std::abs(v), static_cast<unsigned>(2 * d.q - 2));
  return f_eval(d, v) / den;
}

inline double f_delta_prime_eval(const DriftSpec& d, double delta, double v) {
  check_delta(delta);
  const double sd = std::sqrt(delta);
  const auto m = static_cast<unsigned>(2 * d.q - 2);
  const double den = 1.0 + sd * detail::ipow(std::abs(v), m);
  // d/dv |v|^m = m |v|^{m-1} sign(v); m >= 2 so this vanishes at 0.
  const double dden = sd * static_cast<double>(m) * detail::ipow(std::abs(v), m - 1) * (v < 0.0 ? -1.0 : 1.0);
  return (f_prime_eval(d, v) * den - f_eval(d, v) * dden) / (den * den);
}

// Hot-loop evaluator for f_tau (or f when untamed) with the constant parts
// hoisted and integer powers taken by repeated squaring.
class TamedDrift {
 public:
  explicit TamedDrift(const DriftSpec& d) : coeffs_(d.coefficients()), tamed_(false) {}

  TamedDrift(const DriftSpec& d, const TamingParams& p)
      : coeffs_(d.coefficients()), tamed_(true), alpha_(p.alpha) {
    p.validate();
    scale_ = p.beta * std::pow(p.tau, p.theta);
    expo_ = static_cast<double>(2 * d.q - 2) / p.alpha;
    const double rounded = std::round(expo_);
    integer_expo_ = std::abs(expo_ - rounded) < 1e-12 && rounded <= 64.0;
    iexpo_ = static_cast<unsigned>(rounded);
  }

  double operator()(double v) const noexcept {
    const double fv = detail::horner(coeffs_, v);
    if (!tamed_) return fv;
    const double a = std::abs(v);
    const double x = scale_ * (integer_expo_ ? detail::ipow(a, iexpo_) : std::pow(a, expo_));
    if (alpha_ == 1.0) return fv / (1.0 + x);
    if (alpha_ == 0.5) return fv / std::sqrt(1.0 + x);
    return fv / std::pow(1.0 + x, alpha_);
  }

 private:
  std::vector<double> coeffs_;
  bool tamed_;
  double alpha_ = 1.0;
  double scale_ = 0.0;
  double expo_ = 0.0;
  bool integer_expo_ = false;
  unsigned iexpo_ = 0;
};

// ---------------------------------------------------------------------------
// Structural constants

struct DriftConstants {
  double lipschitz = 0.0;  // L_f, one-sided: f'(u) <= L_f
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
  double c5 = 0.0;
};

inline constexpr double kGridMin = 1e-6;
inline constexpr double kGridMax = 1e3;

// 2e5 points log-uniform in |u| in [1e-6, 1e3] (both signs) plus 0, sorted.
inline std::vector<double> verification_grid(std::size_t per_sign = 100000) {
  std::vector<double> g;
  g.reserve(2 * per_sign + 1);
  const double lo = std::log(kGridMin);
  const double hi = std::log(kGridMax);
  std::vector<double> pos(per_sign);
  for (std::size_t k = 0; k < per_sign; ++k) {
    const double s = per_sign == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(per_sign - 1);
    pos[k] = std::exp(lo + s * (hi - lo));
  }
  pos.back() = kGridMax;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) g.push_back(-*it);
  g.push_back(0.0);
  g.insert(g.end(), pos.begin(), pos.end());
  return g;
}

namespace detail {

// sup over |v| <= vmax of  v a - c1 |v|^{2q}.
inline double young_sup(double a, double c1, int q, double vmax) {
  const double two_q = 2.0 * q;
  double v = std::pow(std::abs(a) / (two_q * c1), 1.0 / (two_q - 1.0));
  v = std::min(v, vmax);
  return v * std::abs(a) - c1 * std::pow(v, two_q);
}

inline double young_argmax(double a, double c1, int q, double vmax) {
  const double two_q = 2.0 * q;
  const double v = std::min(std::pow(std::abs(a) / (two_q * c1), 1.0 / (two_q - 1.0)), vmax);
  return a < 0.0 ? -v : v;
}

}  // namespace detail

// Certifies, on the verification grid,
//   |f(u)|        <= c3 |u|^{2q-1} + c4 |u| + c5
//   (u + v) f(u)  <= -c0 |u|^{2q} + c1 |v|^{2q} + c2
//   f'(u)         <= L_f
// c0 is the first of c_f/2, c_f/4, ... for which some c1 = 2^m makes the
// coercivity bound close with its maximum attained away from the grid edge.
inline DriftConstants derive_growth_constants(const DriftSpec& d) {
  d.validate();
  const auto grid = verification_grid();
  const int q = d.q;
  const double two_q = 2.0 * q;
  DriftConstants out;

  double lf = -std::numeric_limits<double>::infinity();
  for (double u : grid) lf = std::max(lf, f_prime_eval(d, u));
  out.lipschitz = lf;

  // Coefficient-wise growth bound: |u|^k <= |u| + |u|^{2q-1} for 1 <= k <= 2q-2.
  const double cf_abs = std::abs(d.leading);
  double mid = 0.0;
  for (std::size_t k = 2; k < d.lower.size(); ++k) mid += std::abs(d.lower[k]);
  out.c3 = cf_abs + mid;
  out.c4 = (d.lower.size() > 1 ? std::abs(d.lower[1]) : 0.0) + mid;
  out.c5 = d.lower.empty() ? 0.0 : std::abs(d.lower[0]);
  for (double u : grid) {
    const double a = std::abs(u);
    const double bound = out.c3 * std::pow(a, two_q - 1.0) + out.c4 * a + out.c5;
    if (std::abs(f_eval(d, u)) > bound * (1.0 + 1e-12)) {
      throw DerivationError("growth bound |f(u)| <= c3|u|^{2q-1} + c4|u| + c5 fails", u, 0.0);
    }
  }

  const double base = d.leading > 0.0 ? d.leading : (cf_abs > 0.0 ? cf_abs : 1.0);
  std::vector<double> fvals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) fvals[i] = f_eval(d, grid[i]);

  double worst_u = kGridMax;
  double worst_v = 0.0;
  for (int k = 1; k <= 30; ++k) {
    const double c0 = base / std::ldexp(1.0, k);
    for (int m = -20; m <= 40; ++m) {
      const double c1 = std::ldexp(1.0, m);
      // Leading |u|^{2q} coefficient of u f(u) + c0|u|^{2q} + sup_v(v f(u) - c1|v|^{2q}).
      const double lead = -d.leading + c0 +
                          (two_q - 1.0) / two_q * std::pow(cf_abs, two_q / (two_q - 1.0)) *
                              std::pow(two_q * c1, -1.0 / (two_q - 1.0));
      if (!(lead < 0.0)) {
        worst_u = kGridMax;
        worst_v = detail::young_argmax(f_eval(d, kGridMax), c1, q, kGridMax);
        continue;
      }
      double best = 0.0;
      double best_u = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        const double g = u * fvals[i] + c0 * std::pow(std::abs(u), two_q) +
                         detail::young_sup(fvals[i], c1, q, kGridMax);
        if (g > best) {
          best = g;
          best_u = u;
        }
      }
      if (std::abs(best_u) >= 1e2) {
        worst_u = best_u;
        worst_v = detail::young_argmax(f_eval(d, best_u), c1, q, kGridMax);
        continue;
      }
      out.c0 = c0;
      out.c1 = c1;
      out.c2 = best;

      // Independent check on a coarse 2-D subgrid.
      std::vector<double> sub;
      for (std::size_t i = 0; i < grid.size(); i += 97) sub.push_back(grid[i]);
      sub.push_back(grid.back());
      std::vector<double> sub_pow(sub.size());
      for (std::size_t i = 0; i < sub.size(); ++i) sub_pow[i] = std::pow(std::abs(sub[i]), two_q);
      for (std::size_t i = 0; i < sub.size(); ++i) {
        const double u = sub[i];
        const double fu = f_eval(d, u);
        const double rhs_u = -c0 * sub_pow[i] + out.c2;
        for (std::size_t jv = 0; jv < sub.size(); ++jv) {
          const double v = sub[jv];
          const double lhs = (u + v) * fu;
          const double rhs = rhs_u + c1 * sub_pow[jv];
          const double scale = std::abs(u * fu) + std::abs(v * fu) + std::abs(rhs) + 1.0;
          if (lhs > rhs + 1e-9 * scale) {
            throw DerivationError("coercivity bound fails on the 2-D check", u, v);
          }
        }
      }
      return out;
    }
  }
  throw DerivationError("no candidate c0 = c_f/2^k certifies the coercivity bound", worst_u, worst_v);
}

struct Admissibility {
  bool admissible = false;
  double ratio = 0.0;  // LHS / RHS of 2 c3^2 tau^{1 - theta alpha} <= c0 beta^alpha eps
};

inline Admissibility step_size_condition(const DriftConstants& dc, const TamingParams& p, double epsilon) {
  if (!(p.theta * p.alpha < 1.0)) throw InvalidParamsError("taming requires theta * alpha < 1");
  p.validate();
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const double lhs = 2.0 * dc.c3 * dc.c3 * std::pow(p.tau, 1.0 - p.theta * p.alpha);
  const double rhs = dc.c0 * std::pow(p.beta, p.alpha) * epsilon;
  return {lhs <= rhs, lhs / rhs};
}

}  // namespace tamed_ac
