#include <cmath>
#include <memory>
#include <vector>

#include "catch_amalgamated.hpp"
#include "tamed_ac/ensemble.hpp"

using namespace tamed_ac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("compensated sum recovers cancelled mass", "[ensemble]") {
  const std::vector<double> xs{1e16, 1.0, -1e16, 1.0};
  CHECK(compensated_sum(xs) == 2.0);
}

TEST_CASE("summary statistics", "[ensemble]") {
  const std::vector<double> c(10, 0.3);
  const SampleStats s = summarize(c);
  CHECK(s.mean == 0.3);
  CHECK(s.std == 0.0);
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const SampleStats t = summarize(v);
  CHECK_THAT(t.mean, WithinRel(2.5, 1e-15));
  CHECK_THAT(t.std, WithinRel(std::sqrt(5.0 / 3.0), 1e-15));
}

TEST_CASE("parallel map keeps results in sample order", "[ensemble]") {
  for (unsigned threads : {1u, 3u, 8u}) {
    const auto out = parallel_map(
        100, {threads, BlowUpPolicy::abort}, [] { return 0; },
        [](int&, std::uint64_t s) { return static_cast<double>(s * s); });
    REQUIRE(out.values.size() == 100);
    for (std::uint64_t s = 0; s < 100; ++s) CHECK(*out.values[s] == static_cast<double>(s * s));
  }
}

TEST_CASE("blow-up policies", "[ensemble]") {
  auto fn = [](int&, std::uint64_t s) -> double {
    if (s == 7 || s == 3) throw BlowUpError(11, s);
    return 1.0;
  };
  const auto skipped = parallel_map(10, {2, BlowUpPolicy::skip}, [] { return 0; }, fn);
  CHECK(skipped.n_ok() == 8);
  REQUIRE(skipped.failures.size() == 2);
  CHECK(skipped.failures[0].sample == 3);
  CHECK(skipped.failures[1].sample == 7);
  try {
    parallel_map(10, {1, BlowUpPolicy::abort}, [] { return 0; }, fn);
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.sample() == 3);
    CHECK(e.step() == 11);
  }
  CHECK_THROWS_AS(parallel_map(4, {2, BlowUpPolicy::skip}, [] { return 0; },
                               [](int&, std::uint64_t) -> double { throw DomainError("boom"); }),
                  DomainError);
}

TEST_CASE("ensemble results do not depend on the thread count", "[ensemble]") {
  const auto b = std::make_shared<const SineBasis>(16);
  const auto cfg = SchemeConfig::tamed(b, DriftSpec::allen_cahn(), 0.01, 1.0, 5.0, 0.5, 1.0, 6);
  const NoisePlan plan{21, 8, 1.0, 0};
  auto obs = [&](const SpectralField& x, std::uint64_t) { return norm(*b, x, Norm::l2()); };
  const SampleStats one = run_ensemble(cfg, plan, 40, obs, {1, BlowUpPolicy::abort});
  const SampleStats four = run_ensemble(cfg, plan, 40, obs, {4, BlowUpPolicy::abort});
  CHECK(one.mean == four.mean);
  CHECK(one.std == four.std);
  CHECK(one.n == 40);
  CHECK_THROWS_AS(run_ensemble(cfg, plan, 1, obs), DomainError);
}

TEST_CASE("linear ensemble variance matches the OU closed form", "[ensemble]") {
  const auto b = std::make_shared<const SineBasis>(4);
  auto cfg = SchemeConfig::tamed(b, DriftSpec::allen_cahn(), 1.0, 1.0, 5.0, 0.5, 0.5, 4);
  cfg.drift_enabled = false;
  const NoisePlan plan{5, 6, 0.5, 0};
  const std::uint64_t n = 4000;
  // Mode 2 starts at zero, so E X_2(T)^2 = (1 - e^{-2 lambda T}) / (2 lambda).
  auto obs = [](const SpectralField& x, std::uint64_t) { return x.coeffs[1] * x.coeffs[1]; };
  const SampleStats s = run_ensemble(cfg, plan, n, obs);
  const double lam = b->eigenvalue(2);
  const double expect = -std::expm1(-2.0 * lam * 0.5) / (2.0 * lam);
  CHECK(std::abs(s.mean - expect) < 4.0 * s.std / std::sqrt(static_cast<double>(n)));
}
