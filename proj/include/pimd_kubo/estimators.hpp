#pragma once

#include <string>
#include <vector>

#include "pimd_kubo/dynamics.hpp"
#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/model.hpp"
#include "pimd_kubo/parallel.hpp"
#include "pimd_kubo/ringpoly.hpp"
#include "pimd_kubo/sampler.hpp"
#include "pimd_kubo/series.hpp"

namespace pimd_kubo {

enum class TimeDirection { Forward, Reversed };

// C~_AB(t) = < A0(x) B0(x(t), p(t)) > over x ~ R and fresh bead momenta for
// every trajectory. Momenta for trajectory i come from
// draw_momenta(thermo, model, sampler_cfg.seed, i, convention); Reversed
// flips their sign. A momentum observable is read as the bead-averaged
// momentum.
CorrelationSeries rpmd_kubo_correlator(const PotentialModel& model, const ThermoParams& thermo,
                                       const SamplerConfig& sampler_cfg, const IntegratorConfig& integrator_cfg,
                                       const Observable& a, const Observable& b,
                                       MomentumConvention convention = MomentumConvention::Bead,
                                       const Parallelism& par = {},
                                       TimeDirection direction = TimeDirection::Forward);

// Same as above on an existing ensemble.
CorrelationSeries rpmd_kubo_correlator(const PotentialModel& model, const Ensemble& ensemble,
                                       const IntegratorConfig& integrator_cfg, const Observable& a,
                                       const Observable& b, MomentumConvention convention,
                                       const Parallelism& par = {},
                                       TimeDirection direction = TimeDirection::Forward);

// Centroid position at time `t_index` (a record index) for every trajectory
// of the estimator above, in trajectory order.
std::vector<double> rpmd_centroid_positions(const PotentialModel& model, const Ensemble& ensemble,
                                            const IntegratorConfig& integrator_cfg,
                                            MomentumConvention convention, std::size_t t_index,
                                            const Parallelism& par = {});

// CMD: (q_c, p_c) from the centroid density (q_c as the centroid of an
// unconstrained R sample, p_c Gaussian with variance m / beta), evolved on the
// tabulated mean force. A must be q or p. Trajectories leaving the table are
// dropped with a warning; more than max_escape_fraction of them raises
// GridEscape.
CorrelationSeries cmd_kubo_correlator(const PotentialModel& model, const ThermoParams& thermo,
                                      const CentroidForceTable& table, const SamplerConfig& sampler_cfg,
                                      const IntegratorConfig& integrator_cfg, const Observable& a,
                                      const Observable& b, const Parallelism& par = {},
                                      double max_escape_fraction = 1e-3);

// C~_Ap = m dC~_Aq/dt by fourth-order finite differences (one-sided at the
// ends). GridTooCoarse if dt * omega_physical > 0.2.
CorrelationSeries kubo_momentum_correlator_via_derivative(const CorrelationSeries& series, double mass,
                                                          double omega_physical);

enum class FilterKind { CentroidDelta, PositionDelta };
std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

struct FilterSpec {
  FilterKind kind = FilterKind::CentroidDelta;
};

// Histogram range; the bin width follows Scott's rule.
struct DensityRange {
  double q_min = -5.0;
  double q_max = 5.0;
  void validate() const;
};

// rho_0 on the bins: the centroid marginal of R (CentroidDelta, paired with
// the analytic momentum Gaussian) or the single-bead marginal of R
// (PositionDelta). Normalized over the bins; samples outside are counted in
// n_outside.
DensityTable filtered_density_estimate(const FilterSpec& filter, const PotentialModel& model,
                                       const ThermoParams& thermo, const SamplerConfig& sampler_cfg,
                                       const DensityRange& range, const Parallelism& par = {});
DensityTable filtered_density_estimate(const FilterSpec& filter, const Ensemble& ensemble,
                                       const DensityRange& range);

// sum_bins rho_0 * dq * < A0 B0 | bin >: the equal-time correlator assembled
// through the filter, next to the direct ensemble mean of A0 B0.
struct FilteredAverage {
  DensityTable density;
  std::vector<double> conditional_mean;  // per bin, 0 for empty bins
  double filtered = 0.0;
  MeanWithError direct;
};
FilteredAverage filtered_equal_time_average(const FilterSpec& filter, const Ensemble& ensemble,
                                            const Observable& a, const Observable& b,
                                            const DensityRange& range);

enum class Window { None, Hann };
std::string to_string(Window window);
Window window_from_string(const std::string& name);

struct Spectrum {
  std::vector<double> frequencies;
  std::vector<double> intensity;
  std::map<std::string, std::string> metadata;
};

// |dt * DCT-I| of the even extension of the series, zero padded to
// oversample times its length. The Hann window is 0.5 (1 + cos(pi t / T)).
Spectrum spectrum(const CorrelationSeries& series, Window window = Window::None, std::size_t oversample = 8);

// Local maxima of the intensity, strongest first.
struct Peak {
  double frequency;
  double intensity;
};
std::vector<Peak> find_peaks(const Spectrum& s);

// Largest intensity within [lo, hi].
double max_intensity_in(const Spectrum& s, double lo, double hi);

}  // namespace pimd_kubo
