#include <cmath>
#include <numbers>
#include <random>

#include "catch_amalgamated.hpp"
#include "tamed_ac/spectral.hpp"

using namespace tamed_ac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SpectralField random_field(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  SpectralField u(n);
  for (auto& c : u.coeffs) c = z(rng);
  return u;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace

TEST_CASE("eigenvalues are (j pi)^2", "[spectral]") {
  const SineBasis b(64);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  CHECK_THAT(b.eigenvalue(1), WithinRel(9.8696044010893586, 1e-15));
  CHECK_THAT(b.eigenvalue(2), WithinRel(4.0 * pi2, 1e-15));
  CHECK_THAT(b.eigenvalue(8), WithinRel(631.65468166971895, 1e-14));
  for (std::size_t j = 2; j <= 64; ++j) CHECK(b.eigenvalue(j) > b.eigenvalue(j - 1));
  CHECK_THROWS_AS(b.eigenvalue(0), IndexError);
  CHECK_THROWS_AS(b.eigenvalue(65), IndexError);
}

TEST_CASE("grid nodes are interior and equispaced", "[spectral]") {
  const SineBasis b(15);
  for (std::size_t i = 1; i <= 15; ++i) {
    CHECK(b.node(i) > 0.0);
    CHECK(b.node(i) < 1.0);
    CHECK_THAT(b.node(i), WithinAbs(static_cast<double>(i) / 16.0, 0.0));
  }
}

TEST_CASE("single-mode and zero transforms", "[spectral]") {
  const SineBasis b(64);
  const SpectralField x0 = sine_initial_state(64);
  const PhysicalField v = b.to_physical(x0);
  for (std::size_t i = 1; i <= 64; ++i) CHECK_THAT(v.values[i - 1], WithinAbs(std::sin(std::numbers::pi * b.node(i)), 1e-15));

  PhysicalField s(64);
  for (std::size_t i = 1; i <= 64; ++i) s.values[i - 1] = std::sin(std::numbers::pi * b.node(i));
  const SpectralField c = b.to_spectral(s);
  CHECK_THAT(c.coeffs[0], WithinAbs(1.0 / std::numbers::sqrt2, 1e-15));
  for (std::size_t j = 1; j < 64; ++j) CHECK_THAT(c.coeffs[j], WithinAbs(0.0, 1e-15));

  const PhysicalField z = b.to_physical(SpectralField(64));
  for (double x : z.values) CHECK(x == 0.0);
  const SpectralField zc = b.to_spectral(PhysicalField(64));
  for (double x : zc.coeffs) CHECK(x == 0.0);
}

TEST_CASE("delta at a node transforms to the sine row", "[spectral]") {
  const std::size_t n = 64, i0 = 17;
  const SineBasis b(n);
  PhysicalField d(n);
  d.values[i0 - 1] = 1.0;
  const SpectralField c = b.to_spectral(d);
  for (std::size_t j = 1; j <= n; ++j) {
    const double expect = std::numbers::sqrt2 / 65.0 * std::sin(static_cast<double>(j) * std::numbers::pi * b.node(i0));
    CHECK_THAT(c.coeffs[j - 1], WithinAbs(expect, 1e-15));
  }
}

TEST_CASE("transforms round-trip on random fields", "[spectral]") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 7u, 64u}) {
    const SineBasis b(n);
    for (int k = 0; k < 100; ++k) {
      const SpectralField u = random_field(n, rng);
      const SpectralField back = b.to_spectral(b.to_physical(u));
      CHECK(rel_diff(back.coeffs, u.coeffs) < 1e-12);
      PhysicalField v(n);
      v.values = random_field(n, rng).coeffs;
      CHECK(rel_diff(b.to_physical(b.to_spectral(v)).values, v.values) < 1e-12);
    }
  }
}

TEST_CASE("non-finite input is rejected", "[spectral]") {
  const SineBasis b(4);
  SpectralField u(4);
  u.coeffs[2] = std::nan("");
  CHECK_THROWS_AS(b.to_physical(u), NonFiniteError);
  PhysicalField v(4);
  v.values[0] = INFINITY;
  CHECK_THROWS_AS(b.to_spectral(v), NonFiniteError);
}

TEST_CASE("semigroup action", "[spectral]") {
  const SineBasis b(64);
  std::mt19937_64 rng(11);
  const SpectralField u = random_field(64, rng);
  CHECK(b.semigroup_apply(u, 0.0).coeffs == u.coeffs);
  CHECK_THROWS_AS(b.semigroup_apply(u, -1e-3), DomainError);

  const SpectralField one = sine_initial_state(64);
  CHECK_THAT(b.semigroup_apply(one, 0.1).coeffs[0] / one.coeffs[0], WithinRel(0.37270783885343794, 1e-14));
  CHECK(norm(b, b.semigroup_apply(u, 1e3), Norm::l2()) == 0.0);

  std::uniform_real_distribution<double> t(0.0, 0.5);
  for (int k = 0; k < 50; ++k) {
    const double s = t(rng), r = t(rng);
    const SpectralField a = b.semigroup_apply(b.semigroup_apply(u, s), r);
    const SpectralField c = b.semigroup_apply(u, s + r);
    CHECK(rel_diff(a.coeffs, c.coeffs) < 1e-12);
    CHECK(norm(b, b.semigroup_apply(u, s), Norm::l2()) <=
          std::exp(-b.eigenvalue(1) * s) * norm(b, u, Norm::l2()) * (1.0 + 1e-14));
  }
}

TEST_CASE("norms", "[spectral]") {
  const SineBasis b(64);
  const SpectralField x0 = sine_initial_state(64);
  CHECK_THAT(norm(b, x0, Norm::l2()), WithinRel(0.70710678118654752, 1e-15));
  CHECK_THAT(norm(b, x0, Norm::sobolev(0.4)), WithinRel(1.1177507018665573, 1e-14));
  CHECK_THROWS_AS(norm(b, x0, Norm::sobolev(1.0)), DomainError);
  CHECK_THAT(norm(b, x0, Norm::sup()), WithinAbs(std::sin(std::numbers::pi * 32.0 / 65.0), 1e-15));

  const SpectralField zero(64);
  for (const Norm& k : {Norm::l2(), Norm::lp(2), Norm::sup(), Norm::sobolev(0.3), Norm::nodal_euclidean()}) {
    CHECK(norm(b, zero, k) == 0.0);
  }

  std::mt19937_64 rng(3);
  const SpectralField u = random_field(64, rng);
  double s = 0.0;
  for (double c : u.coeffs) s += c * c;
  CHECK_THAT(norm(b, u, Norm::l2()) * norm(b, u, Norm::l2()), WithinRel(s, 1e-12));
}

TEST_CASE("Lp(2) quadrature tracks L2 on smooth fields", "[spectral]") {
  const SineBasis b(64);
  SpectralField u(64);
  for (std::size_t j = 1; j <= 64; ++j) u.coeffs[j - 1] = 1.0 / static_cast<double>(j * j);
  const double l2 = norm(b, u, Norm::l2());
  const double lp = norm(b, u, Norm::lp(1));
  CHECK(std::abs(lp - l2) / l2 < 0.05);
}

TEST_CASE("norm parsing", "[spectral]") {
  CHECK(parse_norm("l2") == Norm::l2());
  CHECK(parse_norm("sup") == Norm::sup());
  CHECK(parse_norm("nodal") == Norm::nodal_euclidean());
  CHECK(parse_norm("lp:3") == Norm::lp(3));
  CHECK(parse_norm("sobolev:0.25") == Norm::sobolev(0.25));
  CHECK(to_string(parse_norm("sobolev:0.25")) == "sobolev:0.25");
  CHECK_THROWS_AS(parse_norm("h1"), UsageError);
  CHECK_THROWS_AS(parse_norm("lp:1.5"), UsageError);
  CHECK_THROWS_AS(parse_norm("lp:"), UsageError);
}
