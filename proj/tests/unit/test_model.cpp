#include <doctest.h>

#include <cmath>

#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/model.hpp"

using namespace pimd_kubo;

namespace {

double central_difference(const PotentialModel& m, double q) {
  const double h = 1e-5;
  return (m.value(q + h) - m.value(q - h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("harmonic value is exactly m w^2 q^2 / 2") {
    const auto m = PotentialModel::harmonic(2.0, 1.5);
    for (double q : {-3.0, -0.25, 0.0, 0.7, 4.0}) CHECK(m.value(q) == 0.5 * 2.0 * 1.5 * 1.5 * q * q);
    CHECK(m.is_symmetric());
    CHECK(m.small_oscillation_frequency() == doctest::Approx(1.5));
  }

  TEST_CASE("gradients agree with finite differences of the value") {
    const PotentialModel models[] = {PotentialModel::harmonic(1.0, 1.0),
                                     PotentialModel::mildly_anharmonic(1.3, 0.8, 0.02, 0.05),
                                     PotentialModel::quartic(0.7, 2.0)};
    for (const auto& m : models)
      for (double q = -3.0; q <= 3.0; q += 0.37)
        CHECK(m.gradient(q) == doctest::Approx(central_difference(m, q)).epsilon(1e-7));
  }

  TEST_CASE("quartic and mildly anharmonic forms") {
    const auto quartic = PotentialModel::quartic(1.0, 2.0);
    CHECK(quartic.value(1.5) == doctest::Approx(2.0 * std::pow(1.5, 4) / 4.0));
    CHECK(quartic.small_oscillation_frequency() == 0.0);
    const auto mild = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.05);
    CHECK(mild.value(2.0) == doctest::Approx(0.5 * 4.0 + 0.1 * 8.0 + 0.05 * 16.0));
    CHECK_FALSE(mild.is_symmetric());
    CHECK(PotentialModel::mildly_anharmonic(1.0, 1.0, 0.0, 0.05).is_symmetric());
  }

  TEST_CASE("bounded models grow far from the origin") {
    const PotentialModel models[] = {PotentialModel::mildly_anharmonic(1.0, 0.5, -0.05, 0.01),
                                     PotentialModel::quartic(1.0, 0.1)};
    for (const auto& m : models) {
      const double far = 10.0 * std::max(1.0, m.omega() > 0.0 ? 1.0 / m.omega() : 1.0);
      CHECK(m.value(far) > m.value(0.0));
      CHECK(m.value(-far) > m.value(0.0));
      CHECK(m.value(10.0 * far) > m.value(far));
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(PotentialModel::harmonic(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS(PotentialModel::harmonic(1.0, -1.0), ValidationError);
    CHECK_THROWS_AS(PotentialModel::mildly_anharmonic(1.0, 1.0, 0.0, -0.1), ValidationError);
    // A cubic term without a quartic one is unbounded below.
    CHECK_THROWS_AS(PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(PotentialModel::quartic(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(potential_eval(PotentialModel::harmonic(1, 1), NAN), ValidationError);
  }

  TEST_CASE("thermo parameters") {
    ThermoParams t{2.0, 8, 1.0};
    CHECK_NOTHROW(t.validate());
    CHECK(t.spring_frequency() == doctest::Approx(4.0));
    CHECK(t.bead_beta() == doctest::Approx(0.25));
    CHECK_THROWS_AS((ThermoParams{0.0, 8, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ThermoParams{1.0, 0, 1.0}.validate()), ValidationError);
    CHECK_THROWS_AS((ThermoParams{1.0, 4, -1.0}.validate()), ValidationError);
  }

  TEST_CASE("path-splitting correction") {
    const auto h = PotentialModel::harmonic(1.0, 2.0);
    // Quadratic V: (V(q+e/2) + V(q-e/2))/2 - V(q) = V''/2 (e/2)^2, independent of q.
    for (double q : {-1.0, 0.0, 2.5}) CHECK(delta_v(h, q, 0.6) == doctest::Approx(0.5 * 4.0 * 0.09));
    CHECK(delta_v(h, 1.0, 0.0) == 0.0);
  }

  TEST_CASE("kind names round-trip") {
    for (auto k : {PotentialKind::Harmonic, PotentialKind::MildlyAnharmonic, PotentialKind::Quartic})
      CHECK(potential_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(potential_kind_from_string("morse"), ValidationError);
  }
}
