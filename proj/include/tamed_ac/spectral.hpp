#pragma once

// Sine-spectral representation of L2(0,1) with homogeneous Dirichlet
// boundary conditions.
//
//   e_j(x)    = sqrt(2) sin(j pi x),  j = 1..N   (orthonormal in L2)
//   lambda_j  = (j pi)^2                         (eigenvalues of -d^2/dx^2)
//   x_i       = i / (N + 1),          i = 1..N   (collocation nodes)
//
// The nodal and modal representations are linked through the discrete
// orthogonality  sum_i sin(j pi x_i) sin(k pi x_i) = (N+1)/2 delta_jk,
// so the transform pair is exactly invertible (a scaled DST-I).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tamed_ac/error.hpp"

namespace tamed_ac {

struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t n) : coeffs(n, 0.0) {}
  explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

  std::size_t size() const noexcept { return coeffs.size(); }
  bool operator==(const SpectralField&) const = default;
};

struct PhysicalField {
  std::vector<double> values;

  PhysicalField() = default;
  explicit PhysicalField(std::size_t n) : values(n, 0.0) {}
  explicit PhysicalField(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  bool operator==(const PhysicalField&) const = default;
};

inline bool all_finite(std::span<const double> xs) noexcept {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

inline void require_finite(std::span<const double> xs, std::string_view what) {
  if (!all_finite(xs)) throw NonFiniteError(std::string(what) + " contains NaN/Inf");
}

// (j pi)^2 for the Dirichlet Laplacian on (0,1); j is 1-based.
inline double dirichlet_eigenvalue(std::size_t j) noexcept {
  const double k = static_cast<double>(j) * std::numbers::pi;
  return k * k;
}

class SineBasis {
 public:
  explicit SineBasis(std::size_t n_modes) : n_(n_modes) {
    if (n_modes == 0) throw DomainError("SineBasis needs at least one mode");
    lambda_.resize(n_);
    nodes_.resize(n_);
    sines_.resize(n_ * n_);
    const std::size_t period = 2 * (n_ + 1);
    const double h = 1.0 / static_cast<double>(n_ + 1);
    for (std::size_t i = 1; i <= n_; ++i) {
      lambda_[i - 1] = dirichlet_eigenvalue(i);
      nodes_[i - 1] = static_cast<double>(i) * h;
      for (std::size_t j = 1; j <= n_; ++j) {
        // Reduce i*j mod 2(N+1) so that the symmetric matrix is built from
        // identical arguments wherever the sine values coincide.
        const std::size_t m = (i * j) % period;
        sines_[(i - 1) * n_ + (j - 1)] = std::sin(std::numbers::pi * static_cast<double>(m) * h);
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  double eigenvalue(std::size_t j) const {
    if (j < 1 || j > n_) {
      throw IndexError("eigenvalue index " + std::to_string(j) + " outside [1, " +
                       std::to_string(n_) + "]");
    }
    return lambda_[j - 1];
  }
  std::span<const double> eigenvalues() const noexcept { return lambda_; }

  double node(std::size_t i) const {
    if (i < 1 || i > n_) throw IndexError("node index " + std::to_string(i) + " out of range");
    return nodes_[i - 1];
  }
  std::span<const double> nodes() const noexcept { return nodes_; }

  // sin(j pi x_i), 1-based.
  double sine(std::size_t i, std::size_t j) const noexcept { return sines_[(i - 1) * n_ + (j - 1)]; }

  // values_i = sqrt(2) sum_j coeffs_j sin(j pi x_i)
  void to_physical(std::span<const double> coeffs, std::span<double> values) const noexcept {
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = &sines_[i * n_];
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += row[j] * coeffs[j];
      values[i] = std::numbers::sqrt2 * acc;
    }
  }

  // coeffs_j = sqrt(2)/(N+1) sum_i values_i sin(j pi x_i)
  void to_spectral(std::span<const double> values, std::span<double> coeffs) const noexcept {
    // The sine matrix is symmetric, so rows can be used for both directions.
    const double scale = std::numbers::sqrt2 / static_cast<double>(n_ + 1);
    for (std::size_t j = 0; j < n_; ++j) {
      const double* row = &sines_[j * n_];
      double acc = 0.0;
      for (std::size_t i = 0; i < n_; ++i) acc += row[i] * values[i];
      coeffs[j] = scale * acc;
    }
  }

  PhysicalField to_physical(const SpectralField& u) const {
    check_size(u.size());
    require_finite(u.coeffs, "spectral field");
    PhysicalField out(n_);
    to_physical(u.coeffs, out.values);
    return out;
  }

  SpectralField to_spectral(const PhysicalField& v) const {
    check_size(v.size());
    require_finite(v.values, "physical field");
    SpectralField out(n_);
    to_spectral(v.values, out.coeffs);
    return out;
  }

  // E(t) = exp(-A t), applied mode by mode.
  SpectralField semigroup_apply(const SpectralField& u, double t) const {
    if (!(t >= 0.0)) throw DomainError("semigroup time must be nonnegative");
    check_size(u.size());
    SpectralField out = u;
    if (t == 0.0) return out;
    for (std::size_t j = 0; j < n_; ++j) out.coeffs[j] *= std::exp(-lambda_[j] * t);
    return out;
  }

 private:
  void check_size(std::size_t n) const {
    if (n != n_) {
      throw DomainError("field has " + std::to_string(n) + " entries, basis has " +
                        std::to_string(n_));
    }
  }

  std::size_t n_;
  std::vector<double> lambda_;
  std::vector<double> nodes_;
  std::vector<double> sines_;  // row-major N x N, symmetric
};

// The default initial condition u(0,x) = sin(pi x), i.e. coefficient 1/sqrt(2)
// on the first mode.
inline SpectralField sine_initial_state(std::size_t n_modes) {
  SpectralField x0(n_modes);
  x0.coeffs[0] = 1.0 / std::numbers::sqrt2;
  return x0;
}

// ---------------------------------------------------------------------------
// Norms

enum class NormKind {
  l2,               // Euclidean norm of the coefficients (Parseval)
  lp,               // L^{2 rho} via rectangle rule on the nodes, param = rho
  sup,              // max nodal |value|
  sobolev,          // sqrt(sum lambda_j^gamma c_j^2), param = gamma
  nodal_euclidean,  // unweighted Euclidean norm of the nodal vector
};

struct Norm {
  NormKind kind = NormKind::l2;
  double param = 0.0;

  static Norm l2() { return {NormKind::l2, 0.0}; }
  static Norm lp(int rho) { return {NormKind::lp, static_cast<double>(rho)}; }
  static Norm sup() { return {NormKind::sup, 0.0}; }
  static Norm sobolev(double gamma) { return {NormKind::sobolev, gamma}; }
  static Norm nodal_euclidean() { return {NormKind::nodal_euclidean, 0.0}; }

  bool operator==(const Norm&) const = default;
};

// Accepts "l2", "sup", "nodal", "lp:<rho>", "sobolev:<gamma>".
inline Norm parse_norm(std::string_view text) {
  auto param_of = [&](std::string_view prefix) -> double {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(rest, &used);
    } catch (const std::exception&) {
      throw UsageError("bad norm parameter in '" + std::string(text) + "'");
    }
    if (used != rest.size()) throw UsageError("bad norm parameter in '" + std::string(text) + "'");
    return value;
  };
  if (text == "l2") return Norm::l2();
  if (text == "sup") return Norm::sup();
  if (text == "nodal") return Norm::nodal_euclidean();
  if (text.starts_with("lp:")) {
    const double rho = param_of("lp:");
    if (rho < 1.0 || rho != std::floor(rho)) throw UsageError("lp norm needs integer rho >= 1");
    return Norm::lp(static_cast<int>(rho));
  }
  if (text.starts_with("sobolev:")) return Norm::sobolev(param_of("sobolev:"));
  throw UsageError("unknown norm kind '" + std::string(text) + "'");
}

inline std::string to_string(const Norm& n) {
  switch (n.kind) {
    case NormKind::l2: return "l2";
    case NormKind::sup: return "sup";
    case NormKind::nodal_euclidean: return "nodal";
    case NormKind::lp: return "lp:" + std::to_string(static_cast<int>(n.param));
    case NormKind::sobolev: {
      std::string s = std::to_string(n.param);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return "sobolev:" + s;
    }
  }
  return "l2";
}

// Norms that need the nodal representation read it from `values`, which must
// equal basis.to_physical(u); callers that already hold it avoid a transform.
inline double norm_with_values(const SineBasis& basis, std::span<const double> coeffs,
                               std::span<const double> values, const Norm& kind) {
  switch (kind.kind) {
    case NormKind::l2: {
      double s = 0.0;
      for (double c : coeffs) s += c * c;
      return std::sqrt(s);
    }
    case NormKind::sobolev: {
      if (!(kind.param < 1.0)) throw DomainError("sobolev exponent must be < 1");
      double s = 0.0;
      const auto lam = basis.eigenvalues();
      for (std::size_t j = 0; j < coeffs.size(); ++j) s += std::pow(lam[j], kind.param) * coeffs[j] * coeffs[j];
      return std::sqrt(s);
    }
    case NormKind::lp: {
      const double p = 2.0 * kind.param;
      if (!(kind.param >= 1.0)) throw DomainError("lp norm needs rho >= 1");
      double s = 0.0;
      for (double v : values) s += std::pow(std::abs(v), p);
      s /= static_cast<double>(basis.size() + 1);
      return std::pow(s, 1.0 / p);
    }
    case NormKind::sup: {
      double m = 0.0;
      for (double v : values) m = std::max(m, std::abs(v));
      return m;
    }
    case NormKind::nodal_euclidean: {
      double s = 0.0;
      for (double v : values) s += v * v;
      return std::sqrt(s);
    }
  }
  throw UsageError("unknown norm kind");
}

inline bool needs_nodal_values(const Norm& n) noexcept {
  return n.kind == NormKind::lp || n.kind == NormKind::sup || n.kind == NormKind::nodal_euclidean;
}

inline double norm(const SineBasis& basis, const SpectralField& u, const Norm& kind) {
  if (!needs_nodal_values(kind)) {
    if (u.size() != basis.size()) throw DomainError("field/basis size mismatch");
    return norm_with_values(basis, u.coeffs, {}, kind);
  }
  const PhysicalField v = basis.to_physical(u);
  return norm_with_values(basis, u.coeffs, v.values, kind);
}

}  // namespace tamed_ac
