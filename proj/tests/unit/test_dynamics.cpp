#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pimd_kubo/dynamics.hpp"
#include "pimd_kubo/rng.hpp"

using namespace pimd_kubo;

namespace {

RingPolymerState random_state(std::size_t n, std::uint64_t seed) {
  RandomStream r(seed, StreamTag::Test, n);
  RingPolymerState s(n);
  for (auto& x : s.positions) x = r.normal();
  for (auto& p : s.momenta) p = r.normal();
  return s;
}

IntegratorConfig steps(double dt, std::size_t n, std::size_t stride = 1) {
  IntegratorConfig c;
  c.dt = dt;
  c.n_steps = n;
  c.record_stride = stride;
  return c;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("free ring polymer normal modes rotate exactly") {
    // Each free mode is a harmonic oscillator: after a full period 2 pi / w_k
    // the mode returns to its initial amplitude.
    const ThermoParams thermo{1.0, 4, 1.0};
    const double wk = 2.0 * 4.0 * std::sin(std::numbers::pi / 2.0);  // k = 2
    const double period = 2.0 * std::numbers::pi / wk;
    RingPolymerState s(4);
    for (std::size_t j = 0; j < 4; ++j) s.positions[j] = NormalModeTransform::mode_vector(4, j, 2);
    const auto prop = RpmdPropagator::free_ring(1.0, thermo, period / 100.0);
    for (int i = 0; i < 100; ++i) prop.step(s);
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(s.positions[j] == doctest::Approx(NormalModeTransform::mode_vector(4, j, 2)).epsilon(1e-10));
      CHECK(std::abs(s.momenta[j]) < 1e-10);
    }
  }

  TEST_CASE("single bead integrator is velocity Verlet") {
    const auto model = PotentialModel::quartic(1.0, 1.0);
    const double dt = 0.01;
    double q = 1.0, p = 0.0;
    for (int i = 0; i < 50; ++i) {
      p -= 0.5 * dt * model.gradient(q);
      q += dt * p;
      p -= 0.5 * dt * model.gradient(q);
    }
    const auto traj = classical_trajectory(1.0, 0.0, model, steps(dt, 50, 50));
    CHECK(traj.q.back() == doctest::Approx(q).epsilon(1e-14));
    CHECK(traj.p.back() == doctest::Approx(p).epsilon(1e-14));
  }

  TEST_CASE("harmonic classical trajectory") {
    const auto model = PotentialModel::harmonic(1.0, 2.0);
    const auto traj = classical_trajectory(1.0, 0.0, model, steps(0.001, 1000, 100));
    for (std::size_t j = 0; j < traj.times.size(); ++j)
      CHECK(traj.q[j] == doctest::Approx(std::cos(2.0 * traj.times[j])).epsilon(1e-5));
  }

  TEST_CASE("energy is conserved to O(dt^2)") {
    const auto model = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.05, 0.05);
    const ThermoParams thermo{2.0, 16, 1.0};
    auto drift = [&](double dt) {
      RingPolymerState s = random_state(16, 3);
      const double e0 = ring_polymer_energy(s, thermo, model);
      const RpmdPropagator prop(model, thermo, dt);
      double worst = 0.0;
      for (int i = 0; i < static_cast<int>(2.0 / dt); ++i) {
        prop.step(s);
        worst = std::max(worst, std::abs(ring_polymer_energy(s, thermo, model) - e0));
      }
      return worst;
    };
    const double e1 = drift(0.02);
    const double e2 = drift(0.01);
    const RingPolymerState s0 = random_state(16, 3);
    CHECK(e1 < 1e-2 * ring_polymer_energy(s0, thermo, model));
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.25));
  }

  TEST_CASE("time reversibility") {
    const auto model = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.05);
    const ThermoParams thermo{1.0, 8, 1.0};
    const RingPolymerState start = random_state(8, 4);
    RingPolymerState s = start;
    const RpmdPropagator prop(model, thermo, 0.01);
    for (int i = 0; i < 300; ++i) prop.step(s);
    for (auto& p : s.momenta) p = -p;
    for (int i = 0; i < 300; ++i) prop.step(s);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(s.positions[k] == doctest::Approx(start.positions[k]).epsilon(1e-9));
      CHECK(-s.momenta[k] == doctest::Approx(start.momenta[k]).epsilon(1e-9));
    }
  }

  TEST_CASE("harmonic centroid follows the classical trajectory") {
    const auto model = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams thermo{4.0, 8, 1.0};
    const RingPolymerState s = random_state(8, 5);
    const double x0 = centroid_position(s);
    const double p0 = centroid_momentum(s);
    const auto rec = rpmd_trajectory(s, model, thermo, steps(0.005, 2000, 100), {Observable::q()});
    for (std::size_t j = 0; j < rec.times.size(); ++j) {
      const double t = rec.times[j];
      CHECK(rec.centroid_position[j] == doctest::Approx(x0 * std::cos(t) + p0 * std::sin(t)).epsilon(1e-4));
      CHECK(rec.values[0][j] == doctest::Approx(rec.centroid_position[j]).epsilon(1e-12));
    }
  }

  TEST_CASE("FFT backend gives the same trajectory as the matrix backend") {
    const auto model = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.0, 0.05);
    const ThermoParams thermo{8.0, 128, 1.0};
    // N = 128 runs on the FFT path; compare with an explicit-matrix step.
    RingPolymerState a = random_state(128, 6);
    RingPolymerState b = a;
    const RpmdPropagator prop(model, thermo, 0.01);
    const NormalModeTransform mat(128, NormalModeTransform::Backend::Matrix);
    const auto w = free_rp_frequencies(thermo, model);
    for (int i = 0; i < 20; ++i) {
      prop.step(a);
      for (auto k = 0u; k < 128; ++k) b.momenta[k] -= 0.005 * model.gradient(b.positions[k]);
      auto xm = mat.apply(b.positions, TransformDirection::Forward);
      auto pm = mat.apply(b.momenta, TransformDirection::Forward);
      for (std::size_t k = 0; k < 128; ++k) {
        const double c = std::cos(w[k] * 0.01);
        const double sx = k == 0 ? 0.01 : std::sin(w[k] * 0.01) / w[k];
        const double sp = k == 0 ? 0.0 : -w[k] * std::sin(w[k] * 0.01);
        const double x = xm[k], p = pm[k];
        xm[k] = c * x + sx * p;
        pm[k] = sp * x + c * p;
      }
      b.positions = mat.apply(xm, TransformDirection::Inverse);
      b.momenta = mat.apply(pm, TransformDirection::Inverse);
      for (auto k = 0u; k < 128; ++k) b.momenta[k] -= 0.005 * model.gradient(b.positions[k]);
    }
    for (std::size_t k = 0; k < 128; ++k) CHECK(std::abs(a.positions[k] - b.positions[k]) < 1e-10);
  }

  TEST_CASE("integrator config") {
    const auto c = steps(0.1, 10, 3);
    CHECK(c.n_records() == 4);
    const auto t = c.record_times();
    CHECK(t.back() == doctest::Approx(0.9));
    CHECK_THROWS_AS(steps(0.0, 10).validate(), ValidationError);
    CHECK_THROWS_AS(steps(0.1, 10, 0).validate(), ValidationError);
  }

  TEST_CASE("spline reproduces a cubic force and its integral") {
    // A natural spline is exact for linear data; check force and potential.
    std::vector<double> g, f, se;
    for (int i = 0; i <= 8; ++i) {
      g.push_back(-2.0 + 0.5 * i);
      f.push_back(-3.0 * g.back() + 1.0);
      se.push_back(0.0);
    }
    const CentroidForceTable table(g, f, se);
    for (double q = -2.0; q <= 2.0; q += 0.13) {
      CHECK(table.force_at(q) == doctest::Approx(-3.0 * q + 1.0).epsilon(1e-12));
      // -int_{-2}^{q} (1 - 3 s) ds
      const double w = -((q + 2.0) - 1.5 * (q * q - 4.0));
      CHECK(table.potential_at(q) == doctest::Approx(w).epsilon(1e-12));
    }
    CHECK_THROWS_AS(table.force_at(2.01), GridEscape);
  }

  TEST_CASE("spline interpolates a smooth force to fourth order") {
    auto err = [](int nodes) {
      std::vector<double> g, f, se;
      for (int i = 0; i < nodes; ++i) {
        g.push_back(-1.0 + 2.0 * i / (nodes - 1));
        f.push_back(std::sin(2.0 * g.back()));
        se.push_back(0.0);
      }
      const CentroidForceTable t(g, f, se);
      double worst = 0.0;
      // Interior region, away from the natural end conditions.
      for (double q = -0.5; q <= 0.5; q += 0.001) worst = std::max(worst, std::abs(t.force_at(q) - std::sin(2 * q)));
      return worst;
    };
    CHECK(err(17) / err(33) > 10.0);
  }

  TEST_CASE("harmonic centroid force table") {
    const auto model = PotentialModel::harmonic(1.0, 1.0);
    SamplerConfig cfg;
    cfg.n_samples = 256;
    cfg.burn_in = 100;
    const auto table = build_centroid_force_table(model, ThermoParams{1.0, 8, 1.0}, cfg, {-1.0, 0.0, 0.5, 2.0});
    for (std::size_t i = 0; i < table.grid().size(); ++i)
      CHECK(table.force()[i] == doctest::Approx(-table.grid()[i]).epsilon(1e-12));
  }

  TEST_CASE("CMD on a zero force table keeps momentum-free centroids static") {
    const CentroidForceTable table({-1.0, 0.0, 1.0}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
    const auto traj = cmd_trajectory(0.3, 0.0, table, 1.0, steps(0.1, 50));
    for (double q : traj.q) CHECK(q == 0.3);
    CHECK_THROWS_AS(cmd_trajectory(0.3, 1.0, table, 1.0, steps(0.1, 50)), GridEscape);
  }
}
