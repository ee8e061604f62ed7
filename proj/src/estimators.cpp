#include "pimd_kubo/estimators.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "fftw_lock.hpp"
#include "pimd_kubo/rng.hpp"
#include "pimd_kubo/stats.hpp"

namespace pimd_kubo {

namespace {

double initial_a0(const Observable& a, std::span<const double> x, std::span<const double> p) {
  return a.is_momentum() ? centroid_position(p) : centroid_observable(a, x);
}

double record_value(const Observable& b, const RingPolymerState& s) {
  return b.is_momentum() ? centroid_momentum(s) : centroid_observable(b, s);
}

std::string format_double(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

// --- RPMD -------------------------------------------------------------------------

CorrelationSeries rpmd_kubo_correlator(const PotentialModel& model, const Ensemble& ensemble,
                                       const IntegratorConfig& integrator_cfg, const Observable& a,
                                       const Observable& b, MomentumConvention convention,
                                       const Parallelism& par, TimeDirection direction) {
  integrator_cfg.validate();
  const ThermoParams& thermo = ensemble.thermo();
  if (ensemble.size() < 2 * ensemble.n_blocks)
    throw InsufficientSamples("RPMD correlator needs at least " + std::to_string(2 * ensemble.n_blocks) +
                              " trajectories, got " + std::to_string(ensemble.size()));
  const RpmdPropagator prop(model, thermo, integrator_cfg.dt);
  const std::vector<double> times = integrator_cfg.record_times();
  const double sign = direction == TimeDirection::Reversed ? -1.0 : 1.0;

  const auto avg = block_series_average(
      ensemble.size(), times.size(),
      [&](std::size_t i, std::span<double> out) {
        const auto x = ensemble[i];
        auto p = draw_momenta(thermo, model, ensemble.seed(), i, convention);
        for (auto& v : p) v *= sign;
        const double a0 = initial_a0(a, x, p);
        RingPolymerState state(std::vector<double>(x.begin(), x.end()), std::move(p));
        out[0] = a0 * record_value(b, state);
        std::size_t j = 1;
        for (std::size_t s = 1; s <= integrator_cfg.n_steps; ++s) {
          prop.step(state);
          if (s % integrator_cfg.record_stride == 0) out[j++] = a0 * record_value(b, state);
        }
      },
      par, ensemble.n_blocks);

  CorrelationSeries out;
  out.times = times;
  out.values = avg.mean;
  out.std_errors = avg.std_error;
  out.metadata["method"] = "rpmd";
  out.metadata["A"] = a.label();
  out.metadata["B"] = b.label();
  out.metadata["n_trajectories"] = std::to_string(ensemble.size());
  out.metadata["n_beads"] = std::to_string(thermo.n_beads);
  out.metadata["beta"] = format_double(thermo.beta);
  out.metadata["dt"] = format_double(integrator_cfg.dt);
  out.metadata["momentum_convention"] = convention == MomentumConvention::Bead ? "bead" : "bond_midpoint";
  out.metadata["time_direction"] = direction == TimeDirection::Forward ? "forward" : "reversed";
  out.warnings = ensemble.diagnostics.warnings;
  return out;
}

CorrelationSeries rpmd_kubo_correlator(const PotentialModel& model, const ThermoParams& thermo,
                                       const SamplerConfig& sampler_cfg, const IntegratorConfig& integrator_cfg,
                                       const Observable& a, const Observable& b, MomentumConvention convention,
                                       const Parallelism& par, TimeDirection direction) {
  integrator_cfg.validate();
  const auto ensemble = sample_ring_positions(model, thermo, sampler_cfg, par);
  return rpmd_kubo_correlator(model, ensemble, integrator_cfg, a, b, convention, par, direction);
}

std::vector<double> rpmd_centroid_positions(const PotentialModel& model, const Ensemble& ensemble,
                                            const IntegratorConfig& integrator_cfg,
                                            MomentumConvention convention, std::size_t t_index,
                                            const Parallelism& par) {
  integrator_cfg.validate();
  if (t_index >= integrator_cfg.n_records()) throw ValidationError("record index beyond the trajectory");
  const RpmdPropagator prop(model, ensemble.thermo(), integrator_cfg.dt);
  const std::size_t steps = t_index * integrator_cfg.record_stride;
  std::vector<double> out(ensemble.size());
  parallel_for(ensemble.size(), par, [&](std::size_t i) {
    const auto x = ensemble[i];
    RingPolymerState state(std::vector<double>(x.begin(), x.end()),
                           draw_momenta(ensemble.thermo(), model, ensemble.seed(), i, convention));
    for (std::size_t s = 0; s < steps; ++s) prop.step(state);
    out[i] = centroid_position(state);
  });
  return out;
}

// --- CMD --------------------------------------------------------------------------

CorrelationSeries cmd_kubo_correlator(const PotentialModel& model, const ThermoParams& thermo,
                                      const CentroidForceTable& table, const SamplerConfig& sampler_cfg,
                                      const IntegratorConfig& integrator_cfg, const Observable& a,
                                      const Observable& b, const Parallelism& par,
                                      double max_escape_fraction) {
  if (!(a.is_momentum() || a.is_linear_position()))
    throw UnsupportedObservable("CMD correlators need A = q or A = p, got " + a.label());
  integrator_cfg.validate();
  const auto ensemble = sample_ring_positions(model, thermo, sampler_cfg, par);
  const std::size_t n = ensemble.size();
  const std::vector<double> times = integrator_cfg.record_times();
  const std::size_t nt = times.size();
  const double p_sigma = std::sqrt(model.mass() / thermo.beta);

  std::vector<double> rows(n * nt);
  std::vector<char> escaped(n, 0);
  parallel_for(n, par, [&](std::size_t i) {
    RandomStream rng(sampler_cfg.seed, StreamTag::CentroidMomenta, i);
    const double q0 = centroid_position(ensemble[i]);
    const double p0 = p_sigma * rng.normal();
    const double a0 = a.is_momentum() ? p0 : q0;
    if (!table.contains(q0)) {
      escaped[i] = 1;
      return;
    }
    try {
      const auto traj = cmd_trajectory(q0, p0, table, model.mass(), integrator_cfg);
      for (std::size_t j = 0; j < nt; ++j)
        rows[i * nt + j] = a0 * (b.is_momentum() ? traj.p[j] : b(traj.q[j]));
    } catch (const GridEscape&) {
      escaped[i] = 1;
    }
  });

  std::vector<std::size_t> kept;
  kept.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!escaped[i]) kept.push_back(i);
  const std::size_t n_escaped = n - kept.size();
  if (static_cast<double>(n_escaped) > max_escape_fraction * static_cast<double>(n))
    throw GridEscape(std::to_string(n_escaped) + " of " + std::to_string(n) +
                     " CMD trajectories left the force table [" + format_double(table.lower()) + ", " +
                     format_double(table.upper()) + "]");
  if (kept.size() < 2 * sampler_cfg.n_blocks) throw InsufficientSamples("too few CMD trajectories");

  const auto avg = block_series_average(
      kept.size(), nt,
      [&](std::size_t k, std::span<double> out) {
        const double* row = rows.data() + kept[k] * nt;
        std::copy(row, row + nt, out.begin());
      },
      par, sampler_cfg.n_blocks);

  CorrelationSeries out;
  out.times = times;
  out.values = avg.mean;
  out.std_errors = avg.std_error;
  out.metadata["method"] = "cmd";
  out.metadata["A"] = a.label();
  out.metadata["B"] = b.label();
  out.metadata["n_trajectories"] = std::to_string(kept.size());
  out.metadata["n_escaped"] = std::to_string(n_escaped);
  out.metadata["dt"] = format_double(integrator_cfg.dt);
  out.warnings = ensemble.diagnostics.warnings;
  out.warnings.insert(out.warnings.end(), table.warnings.begin(), table.warnings.end());
  if (n_escaped > 0)
    out.warnings.push_back({"GridEscape", std::to_string(n_escaped) +
                                              " CMD trajectories left the force table and were dropped"});
  return out;
}

// --- derivative route ------------------------------------------------------------

CorrelationSeries kubo_momentum_correlator_via_derivative(const CorrelationSeries& series, double mass,
                                                          double omega_physical) {
  series.validate();
  const std::size_t n = series.size();
  if (n < 5) throw ValidationError("derivative route needs at least 5 time points");
  if (!(mass > 0.0)) throw ValidationError("mass must be > 0");
  const double dt = series.times[1] - series.times[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(series.times[i] - series.times[i - 1] - dt) > 1e-9 * std::max(1.0, dt) * n)
      throw ValidationError("derivative route needs a uniform time grid");
  if (dt * omega_physical > 0.2)
    throw GridTooCoarse("dt * omega = " + format_double(dt * omega_physical) + " exceeds 0.2");

  static constexpr double kCentral[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
  static constexpr double kFirst[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
  static constexpr double kSecond[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};

  CorrelationSeries out;
  out.times = series.times;
  out.values.resize(n);
  out.std_errors.resize(n);
  const double scale = mass / (12.0 * dt);
  auto apply = [&](std::size_t i, std::size_t start, const double* c, double sign) {
    double v = 0.0;
    double e2 = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
      // Mirrored stencils at the right end run backwards with flipped sign.
      const std::size_t idx = sign > 0 ? start + k : start - k;
      v += c[k] * series.values[idx];
      e2 += c[k] * c[k] * series.std_errors[idx] * series.std_errors[idx];
    }
    out.values[i] = sign * scale * v;
    out.std_errors[i] = scale * std::sqrt(e2);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0)
      apply(i, 0, kFirst, 1.0);
    else if (i == 1)
      apply(i, 0, kSecond, 1.0);
    else if (i == n - 1)
      apply(i, n - 1, kFirst, -1.0);
    else if (i == n - 2)
      apply(i, n - 1, kSecond, -1.0);
    else
      apply(i, i - 2, kCentral, 1.0);
  }
  out.metadata = series.metadata;
  out.metadata["B"] = "p";
  out.metadata["derived_from"] = "time_derivative";
  out.warnings = series.warnings;
  return out;
}

// --- filtered densities ----------------------------------------------------------

std::string to_string(FilterKind kind) {
  return kind == FilterKind::CentroidDelta ? "centroid" : "position";
}

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "centroid") return FilterKind::CentroidDelta;
  if (name == "position") return FilterKind::PositionDelta;
  throw ValidationError("unknown filter '" + name + "' (expected centroid or position)");
}

void DensityRange::validate() const {
  if (!(q_min < q_max) || !std::isfinite(q_min) || !std::isfinite(q_max))
    throw ValidationError("density range needs finite q_min < q_max");
}

namespace {

// Values a sample contributes to the filtered histogram, each with weight
// 1 / values.size().
void filter_values(FilterKind kind, std::span<const double> x, std::vector<double>& out) {
  out.clear();
  if (kind == FilterKind::CentroidDelta)
    out.push_back(centroid_position(x));
  else
    out.assign(x.begin(), x.end());
}

struct Binning {
  double q_min;
  double width;
  std::size_t n_bins;

  // n_bins when outside
  std::size_t bin(double v) const {
    if (!(v >= q_min)) return n_bins;
    const auto b = static_cast<std::size_t>((v - q_min) / width);
    return b < n_bins ? b : (v == q_min + width * static_cast<double>(n_bins) ? n_bins - 1 : n_bins);
  }
};

Binning scott_binning(FilterKind kind, const Ensemble& ensemble, const DensityRange& range, double& mean,
                      double& variance) {
  CompensatedSum s1;
  std::vector<double> vals;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    filter_values(kind, ensemble[i], vals);
    for (double v : vals) s1.add(v);
    count += vals.size();
  }
  mean = s1.value() / static_cast<double>(count);
  CompensatedSum s2;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    filter_values(kind, ensemble[i], vals);
    for (double v : vals) s2.add((v - mean) * (v - mean));
  }
  variance = s2.value() / static_cast<double>(count - 1);
  const double h = 3.49 * std::sqrt(variance) * std::cbrt(1.0 / static_cast<double>(count));
  const double span = range.q_max - range.q_min;
  const auto n_bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h)));
  return {range.q_min, span / static_cast<double>(n_bins), n_bins};
}

}  // namespace

DensityTable filtered_density_estimate(const FilterSpec& filter, const Ensemble& ensemble,
                                       const DensityRange& range) {
  range.validate();
  const std::size_t n = ensemble.size();
  const std::size_t n_blocks = ensemble.n_blocks;
  if (n < 2 * n_blocks)
    throw InsufficientSamples("density estimate needs at least " + std::to_string(2 * n_blocks) +
                              " samples");
  double mean = 0.0;
  double variance = 0.0;
  const Binning bins = scott_binning(filter.kind, ensemble, range, mean, variance);

  const auto bounds = block_bounds(n, n_blocks);
  std::vector<std::vector<double>> block_density(n_blocks, std::vector<double>(bins.n_bins, 0.0));
  std::vector<double> counts(bins.n_bins, 0.0);
  std::vector<double> block_spread(n_blocks, 0.0);
  double inside = 0.0;
  double outside = 0.0;
  std::vector<double> vals;
  for (std::size_t blk = 0; blk < n_blocks; ++blk) {
    double block_inside = 0.0;
    CompensatedSum spread;
    for (std::size_t i = bounds[blk]; i < bounds[blk + 1]; ++i) {
      filter_values(filter.kind, ensemble[i], vals);
      const double w = 1.0 / static_cast<double>(vals.size());
      double sq = 0.0;
      for (double v : vals) {
        sq += (v - mean) * (v - mean) * w;
        const std::size_t b = bins.bin(v);
        if (b == bins.n_bins) {
          outside += w;
          continue;
        }
        block_density[blk][b] += w;
        counts[b] += w;
        block_inside += w;
      }
      spread.add(sq);
    }
    for (double& d : block_density[blk]) d = block_inside > 0.0 ? d / (block_inside * bins.width) : 0.0;
    block_spread[blk] = spread.value() / static_cast<double>(bounds[blk + 1] - bounds[blk]);
    inside += block_inside;
  }
  if (!(inside > 0.0)) throw InsufficientSamples("no samples fall inside the density range");

  DensityTable table;
  table.bin_width = bins.width;
  table.centers.resize(bins.n_bins);
  table.density.resize(bins.n_bins);
  table.std_errors.resize(bins.n_bins);
  std::vector<double> per_block(n_blocks);
  for (std::size_t b = 0; b < bins.n_bins; ++b) {
    table.centers[b] = range.q_min + (static_cast<double>(b) + 0.5) * bins.width;
    table.density[b] = counts[b] / (inside * bins.width);
    for (std::size_t blk = 0; blk < n_blocks; ++blk) per_block[blk] = block_density[blk][b];
    table.std_errors[b] = standard_error_from_block_means(per_block);
  }
  table.momentum_variance = ensemble.mass() / ensemble.thermo().beta;
  table.n_samples = n;
  table.n_outside = static_cast<std::size_t>(std::llround(outside * (filter.kind == FilterKind::PositionDelta
                                                                          ? ensemble.n_beads()
                                                                          : 1)));
  table.sample_mean = mean;
  table.sample_variance = variance;
  table.sample_variance_se = standard_error_from_block_means(block_spread);
  table.metadata["filter"] = to_string(filter.kind);
  table.metadata["binning"] = "scott";
  table.metadata["bin_width"] = format_double(bins.width);
  return table;
}

DensityTable filtered_density_estimate(const FilterSpec& filter, const PotentialModel& model,
                                       const ThermoParams& thermo, const SamplerConfig& sampler_cfg,
                                       const DensityRange& range, const Parallelism& par) {
  range.validate();
  const auto ensemble = sample_ring_positions(model, thermo, sampler_cfg, par);
  auto table = filtered_density_estimate(filter, ensemble, range);
  if (!ensemble.diagnostics.warnings.empty())
    table.metadata["warnings"] = std::to_string(ensemble.diagnostics.warnings.size());
  return table;
}

FilteredAverage filtered_equal_time_average(const FilterSpec& filter, const Ensemble& ensemble,
                                            const Observable& a, const Observable& b,
                                            const DensityRange& range) {
  if (!a.is_position() || !b.is_position())
    throw UnsupportedObservable("filtered equal-time average needs position observables");
  FilteredAverage out;
  out.density = filtered_density_estimate(filter, ensemble, range);
  const std::size_t n_bins = out.density.centers.size();
  const Binning bins{range.q_min, out.density.bin_width, n_bins};

  std::vector<double> products(ensemble.size());
  std::vector<CompensatedSum> weighted(n_bins);
  std::vector<double> weights(n_bins, 0.0);
  std::vector<double> vals;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const auto x = ensemble[i];
    products[i] = centroid_observable(a, x) * centroid_observable(b, x);
    filter_values(filter.kind, x, vals);
    const double w = 1.0 / static_cast<double>(vals.size());
    for (double v : vals) {
      const std::size_t bin = bins.bin(v);
      if (bin == n_bins) continue;
      weighted[bin].add(w * products[i]);
      weights[bin] += w;
    }
  }
  out.conditional_mean.assign(n_bins, 0.0);
  CompensatedSum total;
  for (std::size_t bin = 0; bin < n_bins; ++bin) {
    if (weights[bin] > 0.0) out.conditional_mean[bin] = weighted[bin].value() / weights[bin];
    total.add(out.density.density[bin] * out.density.bin_width * out.conditional_mean[bin]);
  }
  out.filtered = total.value();
  out.direct = block_average(products, ensemble.n_blocks);
  return out;
}

// --- spectrum ---------------------------------------------------------------------

std::string to_string(Window window) { return window == Window::None ? "none" : "hann"; }

Window window_from_string(const std::string& name) {
  if (name == "none") return Window::None;
  if (name == "hann") return Window::Hann;
  throw ValidationError("unknown window '" + name + "' (expected none or hann)");
}

Spectrum spectrum(const CorrelationSeries& series, Window window, std::size_t oversample) {
  series.validate();
  const std::size_t n = series.size();
  if (n < 2) throw ValidationError("spectrum needs at least two time points");
  if (oversample == 0) throw ValidationError("oversample must be >= 1");
  const double dt = series.times[1] - series.times[0];
  const double t_max = series.times.back();
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(series.times[i] - static_cast<double>(i) * dt) > 1e-9 * std::max(1.0, t_max))
      throw ValidationError("spectrum needs a uniform time grid");

  const std::size_t m = oversample * (n - 1) + 1;
  std::vector<double> in(m, 0.0), out(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = window == Window::Hann ? 0.5 * (1.0 + std::cos(std::numbers::pi * series.times[i] / t_max))
                                            : 1.0;
    in[i] = series.values[i] * w;
  }
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_r2r_1d(static_cast<int>(m), in.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  Spectrum s;
  s.frequencies.resize(m);
  s.intensity.resize(m);
  const double dw = std::numbers::pi / (static_cast<double>(m - 1) * dt);
  for (std::size_t j = 0; j < m; ++j) {
    s.frequencies[j] = static_cast<double>(j) * dw;
    s.intensity[j] = dt * std::abs(out[j]);
  }
  s.metadata["window"] = to_string(window);
  s.metadata["oversample"] = std::to_string(oversample);
  s.metadata["frequency_step"] = format_double(dw);
  return s;
}

std::vector<Peak> find_peaks(const Spectrum& s) {
  std::vector<Peak> peaks;
  const auto& y = s.intensity;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || y[i] > y[i - 1];
    const bool right = i + 1 == n || y[i] >= y[i + 1];
    if (left && right && y[i] > 0.0) peaks.push_back({s.frequencies[i], y[i]});
  }
  std::ranges::stable_sort(peaks, [](const Peak& a, const Peak& b) { return a.intensity > b.intensity; });
  return peaks;
}

double max_intensity_in(const Spectrum& s, double lo, double hi) {
  double best = 0.0;
  for (std::size_t i = 0; i < s.frequencies.size(); ++i)
    if (s.frequencies[i] >= lo && s.frequencies[i] <= hi) best = std::max(best, s.intensity[i]);
  return best;
}

}  // namespace pimd_kubo
