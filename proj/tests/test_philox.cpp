#include <cmath>

#include "catch_amalgamated.hpp"
#include "tamed_ac/philox.hpp"

using namespace tamed_ac;

// Known-answer vectors for Philox4x64-10.
TEST_CASE("Philox4x64-10 known answers", "[philox]") {
  using C = Philox4x64::Counter;
  CHECK(Philox4x64::generate(C{0, 0, 0, 0}, {0, 0}) ==
        C{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  const std::uint64_t ones = ~std::uint64_t{0};
  CHECK(Philox4x64::generate(C{ones, ones, ones, ones}, {ones, ones}) ==
        C{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
  CHECK(Philox4x64::generate(C{0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
                               0x082efa98ec4e6c89ULL},
                             {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        C{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
  CHECK(Philox4x64::generate(C{5, 7, 11, 0}, {123456789, 1}) ==
        C{0x7123db3ac1c2ce6cULL, 0xee30a22551b81159ULL, 0xf75129736e92a669ULL, 0xe974e3170b33b747ULL});
}

TEST_CASE("generation is usable at compile time", "[philox]") {
  constexpr auto block = Philox4x64::generate({0, 0, 0, 0}, {0, 0});
  STATIC_REQUIRE(block[0] == 0x16554d9eca36314cULL);
}

TEST_CASE("uniform mapping stays inside the open interval", "[philox]") {
  CHECK(to_open_unit(0) > 0.0);
  CHECK(to_open_unit(~std::uint64_t{0}) < 1.0);
  CHECK(to_open_unit(std::uint64_t{1} << 63) == 0.5 + 0x1.0p-53);
  const auto [z1, z2] = box_muller(to_open_unit(0), to_open_unit(0));
  CHECK(std::isfinite(z1));
  CHECK(std::isfinite(z2));
}

TEST_CASE("normal draws have unit moments", "[philox]") {
  double s = 0.0, s2 = 0.0, cross = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const auto b = Philox4x64::generate({static_cast<std::uint64_t>(k), 0, 0, 0}, {42, 0});
    const auto [z1, z2] = box_muller(to_open_unit(b[0]), to_open_unit(b[1]));
    s += z1 + z2;
    s2 += z1 * z1 + z2 * z2;
    cross += z1 * z2;
  }
  CHECK(std::abs(s / (2 * n)) < 4.0 / std::sqrt(2.0 * n));
  CHECK(std::abs(s2 / (2 * n) - 1.0) < 4.0 * std::sqrt(2.0 / (2 * n)));
  CHECK(std::abs(cross / n) < 4.0 / std::sqrt(n));
}
