#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "pimd_kubo/rng.hpp"

using namespace pimd_kubo;

TEST_SUITE("rng") {
  TEST_CASE("Philox4x32-10 known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) ==
          PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }

  TEST_CASE("streams are reproducible and distinct") {
    RandomStream a(7, StreamTag::Momenta, 3), b(7, StreamTag::Momenta, 3);
    RandomStream c(7, StreamTag::Momenta, 4), d(7, StreamTag::ChainMoves, 3), e(8, StreamTag::Momenta, 3);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    firsts.insert(RandomStream(7, StreamTag::Momenta, 3).next_u64());
    firsts.insert(c.next_u64());
    firsts.insert(d.next_u64());
    firsts.insert(e.next_u64());
    CHECK(firsts.size() == 4);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  }

  TEST_CASE("uniform and normal moments") {
    RandomStream r(11, StreamTag::Test, 0);
    const int n = 200000;
    double su = 0.0, su2 = 0.0, sn = 0.0, sn2 = 0.0, sn4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      su += u;
      su2 += u * u;
      const double z = r.normal();
      sn += z;
      sn2 += z * z;
      sn4 += z * z * z * z;
    }
    // Tolerances are 5 standard errors of each moment estimate.
    CHECK(std::abs(su / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(su2 / n - 1.0 / 3.0) < 5.0 * std::sqrt((1.0 / 5.0 - 1.0 / 9.0) / n));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(sn4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
  }

  TEST_CASE("open-left uniform never returns zero") {
    RandomStream r(1, StreamTag::Test, 9);
    for (int i = 0; i < 10000; ++i) {
      const double u = r.uniform_open_left();
      REQUIRE(u > 0.0);
      REQUIRE(u <= 1.0);
    }
  }
}
