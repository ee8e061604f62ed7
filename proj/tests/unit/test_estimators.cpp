#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "pimd_kubo/estimators.hpp"

using namespace pimd_kubo;

namespace {

SamplerConfig sampler(std::size_t n, std::uint64_t seed) {
  SamplerConfig c;
  c.n_samples = n;
  c.burn_in = 500;
  c.decorrelation_stride = 4;
  c.seed = seed;
  return c;
}

IntegratorConfig integrator(double dt, std::size_t n, std::size_t stride) {
  IntegratorConfig c;
  c.dt = dt;
  c.n_steps = n;
  c.record_stride = stride;
  return c;
}

CorrelationSeries tabulate(double dt, std::size_t n, const std::function<double(double)>& f) {
  CorrelationSeries s;
  for (std::size_t i = 0; i < n; ++i) {
    s.times.push_back(dt * static_cast<double>(i));
    s.values.push_back(f(s.times.back()));
    s.std_errors.push_back(0.0);
  }
  return s;
}

// Single-bead variance of the free-ring Gaussian for a harmonic well:
// (1/(beta m N)) sum_k 1/(omega^2 + omega_k^2).
double harmonic_bead_variance(double beta, int n) {
  const double wn = n / beta;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double wk = 2.0 * wn * std::sin(k * std::numbers::pi / n);
    sum += 1.0 / (1.0 + wk * wk);
  }
  return sum / beta;
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("RPMD is exact for the harmonic C_qq") {
    const auto h = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams th{1.0, 8, 1.0};
    const auto c = rpmd_kubo_correlator(h, th, sampler(4000, 7), integrator(0.05, 120, 10), Observable::q(),
                                        Observable::q());
    REQUIRE(c.size() == 13);
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(std::abs(c.values[i] - std::cos(c.times[i])) < 4.0 * c.std_errors[i]);
  }

  TEST_CASE("odd/even correlator vanishes in a symmetric well") {
    const auto m = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.0, 0.1);
    const auto c = rpmd_kubo_correlator(m, ThermoParams{2.0, 8, 1.0}, sampler(2000, 2), integrator(0.05, 60, 20),
                                        Observable::q(), Observable::q2());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c.values[i]) < 4.0 * c.std_errors[i]);
  }

  TEST_CASE("reversed momenta give the same correlator") {
    const auto m = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.05);
    const ThermoParams th{2.0, 8, 1.0};
    const auto ens = sample_ring_positions(m, th, sampler(2000, 4));
    const auto icfg = integrator(0.05, 60, 20);
    const auto f = rpmd_kubo_correlator(m, ens, icfg, Observable::q(), Observable::q(), MomentumConvention::Bead);
    const auto r = rpmd_kubo_correlator(m, ens, icfg, Observable::q(), Observable::q(), MomentumConvention::Bead, {},
                                        TimeDirection::Reversed);
    CHECK(f.values[0] == r.values[0]);
    for (std::size_t i = 1; i < f.size(); ++i)
      CHECK(std::abs(f.values[i] - r.values[i]) < 4.0 * std::hypot(f.std_errors[i], r.std_errors[i]));
  }

  TEST_CASE("momentum observable reads the centroid momentum") {
    const auto h = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams th{1.0, 8, 1.0};
    const auto c = rpmd_kubo_correlator(h, th, sampler(4000, 9), integrator(0.05, 60, 10), Observable::momentum(),
                                        Observable::q());
    // C_pq(t) = sin(t) for the harmonic well at beta = 1.
    for (std::size_t i = 0; i < c.size(); ++i)
      CHECK(std::abs(c.values[i] - std::sin(c.times[i])) < 4.0 * c.std_errors[i] + 1e-12);
  }

  TEST_CASE("derivative route") {
    const auto c = tabulate(0.01, 600, [](double t) { return std::cos(t); });
    const auto d = kubo_momentum_correlator_via_derivative(c, 1.0, 1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(d.values[i] + std::sin(d.times[i])));
    CHECK(worst < 1e-6);

    const auto two = kubo_momentum_correlator_via_derivative(c, 2.0, 1.0);
    CHECK(two.values[300] == doctest::Approx(2.0 * d.values[300]).epsilon(1e-14));

    const auto flat = kubo_momentum_correlator_via_derivative(tabulate(0.1, 20, [](double) { return 3.0; }), 1.0, 1.0);
    for (double v : flat.values) CHECK(std::abs(v) < 1e-12);

    CHECK_THROWS_AS(kubo_momentum_correlator_via_derivative(tabulate(0.3, 20, [](double) { return 1.0; }), 1.0, 1.0),
                    GridTooCoarse);
    CHECK_THROWS(kubo_momentum_correlator_via_derivative(tabulate(0.01, 4, [](double) { return 1.0; }), 1.0, 1.0));
  }

  TEST_CASE("derivative errors propagate from the stencil") {
    auto c = tabulate(0.01, 10, [](double t) { return t; });
    for (auto& e : c.std_errors) e = 1e-3;
    const auto d = kubo_momentum_correlator_via_derivative(c, 1.0, 1.0);
    // Central stencil {1, -8, 0, 8, -1} / 12 dt.
    CHECK(d.std_errors[5] == doctest::Approx(1e-3 * std::sqrt(130.0) / 0.12).epsilon(1e-12));
    for (double v : d.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("harmonic filtered densities") {
    const auto h = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams th{1.0, 16, 1.0};
    const auto ens = sample_ring_positions(h, th, sampler(20000, 11));
    const DensityRange range{-6.0, 6.0};
    const auto centroid = filtered_density_estimate(FilterSpec{FilterKind::CentroidDelta}, ens, range);
    const auto bead = filtered_density_estimate(FilterSpec{FilterKind::PositionDelta}, ens, range);
    // The bead filter pools all 16 beads of every sample.
    for (const auto& [d, n_values] : {std::pair{&centroid, 20000.0}, std::pair{&bead, 20000.0 * 16}}) {
      CHECK(std::abs(d->integral() - 1.0) < 1e-12);
      CHECK(d->n_samples == 20000);
      // Scott's rule from the sample spread.
      const double scott = 3.49 * std::sqrt(d->sample_variance) * std::pow(n_values, -1.0 / 3.0);
      CHECK(d->bin_width <= scott * (1.0 + 1e-12));
      CHECK(d->bin_width > 0.8 * scott);
    }
    CHECK(centroid.momentum_variance == doctest::Approx(1.0));
    CHECK(std::abs(centroid.sample_variance - 1.0) < 4.0 * centroid.sample_variance_se);
    const double bead_var = harmonic_bead_variance(1.0, 16);
    // Approaches coth(1/2) / 2 = 1.08198 as N grows.
    CHECK(std::abs(bead_var - 0.5 / std::tanh(0.5)) < 1e-3);
    CHECK(std::abs(bead.sample_variance - bead_var) < 4.0 * bead.sample_variance_se);
    CHECK(filter_kind_from_string(to_string(FilterKind::PositionDelta)) == FilterKind::PositionDelta);
    CHECK_THROWS_AS(filter_kind_from_string("gaussian"), ValidationError);
    CHECK_THROWS_AS(filtered_density_estimate(FilterSpec{}, ens, DensityRange{1.0, -1.0}), ValidationError);
  }

  TEST_CASE("filter decomposition reproduces the direct mean") {
    const auto m = PotentialModel::mildly_anharmonic(1.0, 1.0, 0.1, 0.05);
    const auto ens = sample_ring_positions(m, ThermoParams{2.0, 8, 1.0}, sampler(3000, 5));
    for (auto kind : {FilterKind::CentroidDelta, FilterKind::PositionDelta}) {
      const auto f = filtered_equal_time_average(FilterSpec{kind}, ens, Observable::q(), Observable::q2(),
                                                 DensityRange{-8.0, 8.0});
      REQUIRE(f.density.n_outside == 0);
      CHECK(f.filtered == doctest::Approx(f.direct.mean).epsilon(1e-10));
    }
  }

  TEST_CASE("spectrum of a cosine") {
    const double dt = 0.05;
    const auto c = tabulate(dt, 2001, [](double t) { return std::cos(1.3 * t); });
    for (auto w : {Window::None, Window::Hann}) {
      const auto s = spectrum(c, w, 8);
      const double bin = s.frequencies[1] - s.frequencies[0];
      CHECK(bin == doctest::Approx(std::numbers::pi / (8 * 2000 * dt)).epsilon(1e-12));
      const auto peaks = find_peaks(s);
      REQUIRE(!peaks.empty());
      CHECK(std::abs(peaks[0].frequency - 1.3) <= bin);
    }
    const auto zero = spectrum(tabulate(dt, 100, [](double) { return 0.0; }));
    for (double v : zero.intensity) CHECK(v == 0.0);
    CHECK(window_from_string(to_string(Window::Hann)) == Window::Hann);
  }

  TEST_CASE("spectrum amplitudes keep their ratio") {
    const auto c = tabulate(0.05, 4001, [](double t) { return 5.0 * std::cos(t) + std::cos(3.0 * t); });
    const auto s = spectrum(c, Window::Hann, 8);
    const double ratio = max_intensity_in(s, 0.8, 1.2) / max_intensity_in(s, 2.8, 3.2);
    CHECK(ratio == doctest::Approx(5.0).epsilon(0.01));
  }

  TEST_CASE("CMD on an exact harmonic force table") {
    const auto h = PotentialModel::harmonic(1.0, 1.0);
    const ThermoParams th{1.0, 8, 1.0};
    std::vector<double> grid, force, err;
    for (int i = 0; i <= 80; ++i) {
      grid.push_back(-8.0 + 0.2 * i);
      force.push_back(-grid.back());
      err.push_back(0.0);
    }
    const CentroidForceTable table(grid, force, err);
    const auto icfg = integrator(0.05, 120, 10);
    const auto qq = cmd_kubo_correlator(h, th, table, sampler(4000, 13), icfg, Observable::q(), Observable::q());
    for (std::size_t i = 0; i < qq.size(); ++i)
      CHECK(std::abs(qq.values[i] - std::cos(qq.times[i])) < 4.0 * qq.std_errors[i]);
    const auto pq =
        cmd_kubo_correlator(h, th, table, sampler(4000, 13), icfg, Observable::momentum(), Observable::q());
    CHECK(std::abs(pq.values[0]) < 4.0 * pq.std_errors[0]);
    CHECK_THROWS_AS(
        cmd_kubo_correlator(h, th, table, sampler(100, 13), icfg, Observable::q2(), Observable::q()),
        UnsupportedObservable);
  }
}
