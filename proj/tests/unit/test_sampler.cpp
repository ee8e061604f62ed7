#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

#include "pimd_kubo/sampler.hpp"

using namespace pimd_kubo;

namespace {

// <x_j^2> of the discretized harmonic ring polymer: sum over normal modes of
// 1 / (beta m (w^2 + w_k^2)).
double harmonic_bead_variance(double beta, int n, double m, double w) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    const double wk = 2.0 * (n / beta) * std::sin(k * std::numbers::pi / n);
    s += 1.0 / (beta * m * (w * w + wk * wk));
  }
  return s;
}

SamplerConfig config(std::size_t n, std::uint64_t seed) {
  SamplerConfig c;
  c.n_samples = n;
  c.burn_in = 500;
  c.decorrelation_stride = 4;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("sampler") {
  TEST_CASE("config validation") {
    SamplerConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_samples = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SamplerConfig{};
    c.target_acceptance = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = SamplerConfig{};
    c.move_scale = -1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
  }

  TEST_CASE("harmonic bead and centroid variances") {
    const auto model = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams thermo{1.0, 8, 1.0};
    const auto ens = sample_ring_positions(model, thermo, config(20000, 3));
    const auto q2 = estimate_static_average(Observable::q2(), ens);
    CHECK(std::abs(q2.mean - harmonic_bead_variance(1.0, 8, 1.0, 1.0)) < 4.0 * q2.std_error);
    // Centroid variance is the k = 0 term, 1 / (beta m w^2).
    std::vector<double> c2(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) c2[i] = std::pow(centroid_position(ens[i]), 2);
    const auto cv = block_average(c2);
    CHECK(std::abs(cv.mean - 1.0) < 4.0 * cv.std_error);
    const auto q = estimate_static_average(Observable::q(), ens);
    CHECK(std::abs(q.mean) < 4.0 * q.std_error);
    CHECK(ens.diagnostics.move_acceptance > 0.2);
    CHECK(ens.diagnostics.move_acceptance < 0.7);
  }

  TEST_CASE("single bead samples the classical Boltzmann density") {
    const auto model = PotentialModel::harmonic(2.0, 1.5);
    const auto ens = sample_ring_positions(model, ThermoParams{0.8, 1, 1.0}, config(20000, 4));
    const auto q2 = estimate_static_average(Observable::q2(), ens);
    const double exact = 1.0 / (0.8 * 2.0 * 1.5 * 1.5);
    CHECK(std::abs(q2.mean - exact) < 4.0 * q2.std_error);
  }

  TEST_CASE("ensembles do not depend on the worker count") {
    const auto model = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.05);
    const ThermoParams thermo{2.0, 6, 1.0};
    const auto a = sample_ring_positions(model, thermo, config(800, 5), Parallelism{1});
    const auto b = sample_ring_positions(model, thermo, config(800, 5), Parallelism{4});
    const auto c = sample_ring_positions(model, thermo, config(800, 6), Parallelism{1});
    bool same = true, differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      same = same && std::memcmp(a[i].data(), b[i].data(), 6 * sizeof(double)) == 0;
      differs = differs || a[i][0] != c[i][0];
    }
    CHECK(same);
    CHECK(differs);
  }

  TEST_CASE("constrained sampler pins the centroid") {
    const auto model = PotentialModel::quartic(1.0, 1.0);
    const ThermoParams thermo{4.0, 8, 1.0};
    const auto ens = sample_ring_positions_constrained(model, thermo, config(2000, 7), 0.6);
    double max_dev = 0.0;
    std::vector<double> spread(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) {
      max_dev = std::max(max_dev, std::abs(centroid_position(ens[i]) - 0.6));
      double s = 0.0;
      for (double x : ens[i]) s += (x - 0.6) * (x - 0.6);
      spread[i] = s / 8.0;
    }
    CHECK(max_dev < 1e-12);
    CHECK(block_average(spread).mean > 0.0);
  }

  TEST_CASE("constrained harmonic internal spread") {
    // With the centroid fixed, the bead spread about it is the sum over k >= 1.
    const auto model = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams thermo{2.0, 8, 1.0};
    const auto ens = sample_ring_positions_constrained(model, thermo, config(20000, 8), -0.4);
    std::vector<double> spread(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) {
      double s = 0.0;
      for (double x : ens[i]) s += (x + 0.4) * (x + 0.4);
      spread[i] = s / 8.0;
    }
    const auto m = block_average(spread);
    const double exact = harmonic_bead_variance(2.0, 8, 1.0, 1.0) - 1.0 / 2.0;
    CHECK(std::abs(m.mean - exact) < 4.0 * m.std_error);
  }

  TEST_CASE("momentum draws") {
    const auto model = PotentialModel::harmonic(1.5, 1.0);
    const ThermoParams thermo{2.0, 4, 1.0};
    std::vector<double> p2, mid2;
    for (std::size_t i = 0; i < 4000; ++i) {
      const auto p = draw_momenta(thermo, model, 9, i, MomentumConvention::Bead);
      const auto mid = draw_momenta(thermo, model, 9, i, MomentumConvention::BondMidpoint);
      CHECK(centroid_position(mid) == doctest::Approx(centroid_position(p)).epsilon(1e-12));
      for (double v : p) p2.push_back(v * v);
      for (double v : mid) mid2.push_back(v * v);
    }
    // Bead variance m N / beta; the midpoint average halves it.
    const auto a = block_average(p2);
    const auto b = block_average(mid2);
    CHECK(std::abs(a.mean - 3.0) < 4.0 * a.std_error);
    CHECK(std::abs(b.mean - 1.5) < 4.0 * b.std_error);
  }

  TEST_CASE("virial control variate has zero mean and lowers the error") {
    const auto model = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams thermo{1.0, 8, 1.0};
    const auto ens = sample_ring_positions(model, thermo, config(20000, 10));
    std::vector<double> y(ens.size());
    for (std::size_t i = 0; i < ens.size(); ++i) y[i] = virial_cv_sample(Observable::q2(), ens[i], model, thermo).control;
    const auto ym = block_average(y);
    CHECK(std::abs(ym.mean) < 4.0 * ym.std_error);
    const auto plain = estimate_static_average(Observable::q2(), ens);
    const auto cv = estimate_static_average_virial_cv(Observable::q2(), ens, model);
    CHECK(cv.std_error < 0.5 * plain.std_error);
    CHECK(std::abs(cv.mean - harmonic_bead_variance(1.0, 8, 1.0, 1.0)) < 4.0 * cv.std_error);
  }

  TEST_CASE("poor proposals raise a non-ergodicity warning") {
    auto cfg = config(200, 11);
    cfg.burn_in = 0;
    cfg.move_scale = 500.0;
    const auto ens = sample_ring_positions(PotentialModel::harmonic(1, 1), ThermoParams{1.0, 4, 1.0}, cfg);
    bool warned = false;
    for (const auto& w : ens.diagnostics.warnings) warned = warned || w.code == "NonErgodicWarning";
    CHECK(warned);
  }
}
