#pragma once

// Spectrally truncated cylindrical Wiener noise.
//
// Mode j is driven by an independent scalar Brownian motion. Over a fine step
// of length h the scheme needs two correlated quantities per mode:
//
//   dW   = W(t+h) - W(t)                           Var = h
//   conv = int_t^{t+h} exp(-lambda (t+h-s)) dW(s)  Var = (1 - e^{-2 lambda h}) / (2 lambda)
//                                                  Cov = (1 - e^{-lambda h}) / lambda
//
// The pair is drawn from two standard normals produced by Philox keyed on
// (master_seed, stream) with counter (fine step, mode, sample). A coarse step
// of R fine steps aggregates the fine values exactly, so every step size that
// divides the fine grid sees the same Brownian path.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tamed_ac/error.hpp"
#include "tamed_ac/philox.hpp"
#include "tamed_ac/spectral.hpp"

namespace tamed_ac {

struct NoisePlan {
  std::uint64_t master_seed = 0;
  int fine_level = 14;      // fine step h = horizon / 2^fine_level
  double horizon = 1.0;
  std::uint64_t stream = 0;  // distinct streams give independent paths

  double fine_step() const noexcept { return std::ldexp(horizon, -fine_level); }
  std::uint64_t fine_steps() const noexcept { return std::uint64_t{1} << fine_level; }

  void validate() const {
    if (fine_level < 0 || fine_level > 40) throw DomainError("fine_level must lie in [0, 40]");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive");
  }

  // Same seed, independent stream; used for the uncoupled reference path.
  NoisePlan with_stream(std::uint64_t s) const {
    NoisePlan p = *this;
    p.stream = s;
    return p;
  }
};

struct NoiseIncrementPair {
  double dW = 0.0;
  double conv = 0.0;
};

// Joint law of (dW, conv) over an interval of length h and its Cholesky factor:
//   dW = sqrt(h) Z1,  conv = a Z1 + b Z2.
struct IncrementLaw {
  double var_dw = 0.0;
  double var_conv = 0.0;
  double cov = 0.0;
  double sqrt_h = 0.0;
  double a = 0.0;
  double b = 0.0;

  static IncrementLaw of(double lambda, double h) {
    IncrementLaw law;
    law.var_dw = h;
    law.sqrt_h = std::sqrt(h);
    const double x = lambda * h;
    if (!(x > 1e-12)) {
      // lambda h -> 0: conv coincides with dW.
      law.var_conv = h;
      law.cov = h;
      law.a = law.sqrt_h;
      law.b = 0.0;
      return law;
    }
    law.var_conv = -std::expm1(-2.0 * x) / (2.0 * lambda);
    law.cov = -std::expm1(-x) / lambda;
    law.a = law.cov / law.sqrt_h;
    // Residual variance var_conv - cov^2/h = h R(x); series avoids cancellation.
    double r = 0.0;
    if (x < 1e-2) {
      r = x * x * (1.0 / 12.0 + x * (-1.0 / 12.0 + x * (17.0 / 360.0 + x * (-7.0 / 360.0 + x * (43.0 / 6720.0)))));
    } else {
      const double e1 = -std::expm1(-x) / x;
      r = -std::expm1(-2.0 * x) / (2.0 * x) - e1 * e1;
    }
    law.b = std::sqrt(std::max(0.0, r * h));
    return law;
  }
};

// Two standard normals for (sample, mode j, fine step k).
inline std::pair<double, double> standard_normal_pair(const NoisePlan& plan, std::uint64_t sample,
                                                      std::size_t j, std::uint64_t k) noexcept {
  const auto block = Philox4x64::generate({k, static_cast<std::uint64_t>(j), sample, 0},
                                          {plan.master_seed, plan.stream});
  return box_muller(to_open_unit(block[0]), to_open_unit(block[1]));
}

namespace detail {

inline void check_mode_and_step(const NoisePlan& plan, std::size_t j, std::uint64_t k) {
  if (j < 1) throw IndexError("mode index is 1-based");
  if (k >= plan.fine_steps()) {
    throw IndexError("fine step " + std::to_string(k) + " beyond plan with " +
                     std::to_string(plan.fine_steps()) + " steps");
  }
}

inline void check_alignment(const NoisePlan& plan, std::uint64_t m, std::uint64_t ratio) {
  if (ratio == 0 || !std::has_single_bit(ratio) || ratio > plan.fine_steps()) {
    throw AlignmentError("coarse ratio " + std::to_string(ratio) +
                         " is not a power of two dividing the fine grid");
  }
  if ((m + 1) * ratio > plan.fine_steps()) {
    throw AlignmentError("coarse step " + std::to_string(m) + " extends past the horizon");
  }
}

}  // namespace detail

inline NoiseIncrementPair sample_increment_pair(const NoisePlan& plan, std::uint64_t sample, std::size_t j,
                                                std::uint64_t k) {
  detail::check_mode_and_step(plan, j, k);
  const IncrementLaw law = IncrementLaw::of(dirichlet_eigenvalue(j), plan.fine_step());
  const auto [z1, z2] = standard_normal_pair(plan, sample, j, k);
  return {law.sqrt_h * z1, law.a * z1 + law.b * z2};
}

// sum_{k<R} exp(-lambda_j (R-1-k) h) conv_{mR+k}, accumulated in Horner form.
inline double coarse_convolution_increment(const NoisePlan& plan, std::uint64_t sample, std::size_t j,
                                           std::uint64_t m, std::uint64_t ratio) {
  detail::check_alignment(plan, m, ratio);
  const double decay = std::exp(-dirichlet_eigenvalue(j) * plan.fine_step());
  double acc = 0.0;
  for (std::uint64_t k = m * ratio; k < (m + 1) * ratio; ++k) {
    acc = acc * decay + sample_increment_pair(plan, sample, j, k).conv;
  }
  return acc;
}

inline double coarse_brownian_increment(const NoisePlan& plan, std::uint64_t sample, std::size_t j,
                                        std::uint64_t m, std::uint64_t ratio) {
  detail::check_alignment(plan, m, ratio);
  double acc = 0.0;
  for (std::uint64_t k = m * ratio; k < (m + 1) * ratio; ++k) acc += sample_increment_pair(plan, sample, j, k).dW;
  return acc;
}

// All fine increments of one sample, materialized so that several step sizes
// can be driven by the same path without regenerating it. Produces values
// bit-identical to the scalar functions above.
class NoisePath {
 public:
  NoisePath(const NoisePlan& plan, std::size_t n_modes) : plan_(plan), n_(n_modes) {
    plan.validate();
    const double h = plan.fine_step();
    laws_.reserve(n_);
    decay_.resize(n_);
    for (std::size_t j = 1; j <= n_; ++j) {
      laws_.push_back(IncrementLaw::of(dirichlet_eigenvalue(j), h));
      decay_[j - 1] = std::exp(-dirichlet_eigenvalue(j) * h);
    }
    dw_.resize(n_ * plan.fine_steps());
    conv_.resize(n_ * plan.fine_steps());
  }

  void generate(std::uint64_t sample) {
    sample_ = sample;
    const std::uint64_t steps = plan_.fine_steps();
    for (std::uint64_t k = 0; k < steps; ++k) {
      double* dw = &dw_[k * n_];
      double* cv = &conv_[k * n_];
      for (std::size_t j = 0; j < n_; ++j) {
        const auto [z1, z2] = standard_normal_pair(plan_, sample, j + 1, k);
        const IncrementLaw& law = laws_[j];
        dw[j] = law.sqrt_h * z1;
        cv[j] = law.a * z1 + law.b * z2;
      }
    }
  }

  const NoisePlan& plan() const noexcept { return plan_; }
  std::size_t modes() const noexcept { return n_; }
  std::uint64_t sample() const noexcept { return sample_; }

  NoiseIncrementPair fine(std::size_t j, std::uint64_t k) const {
    detail::check_mode_and_step(plan_, j, k);
    if (j > n_) throw IndexError("mode beyond materialized path");
    return {dw_[k * n_ + j - 1], conv_[k * n_ + j - 1]};
  }

  void coarse_conv(std::uint64_t m, std::uint64_t ratio, std::span<double> out) const {
    detail::check_alignment(plan_, m, ratio);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint64_t k = m * ratio; k < (m + 1) * ratio; ++k) {
      const double* cv = &conv_[k * n_];
      for (std::size_t j = 0; j < n_; ++j) out[j] = out[j] * decay_[j] + cv[j];
    }
  }

  void coarse_dw(std::uint64_t m, std::uint64_t ratio, std::span<double> out) const {
    detail::check_alignment(plan_, m, ratio);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::uint64_t k = m * ratio; k < (m + 1) * ratio; ++k) {
      const double* dw = &dw_[k * n_];
      for (std::size_t j = 0; j < n_; ++j) out[j] += dw[j];
    }
  }

 private:
  NoisePlan plan_;
  std::size_t n_;
  std::uint64_t sample_ = 0;
  std::vector<IncrementLaw> laws_;
  std::vector<double> decay_;
  std::vector<double> dw_;    // [k * n + j]
  std::vector<double> conv_;  // [k * n + j]
};

}  // namespace tamed_ac
