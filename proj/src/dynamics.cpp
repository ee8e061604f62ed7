#include "pimd_kubo/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pimd_kubo/rng.hpp"

namespace pimd_kubo {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  if (n_steps == 0) throw ValidationError("n_steps must be > 0");
  if (record_stride == 0) throw ValidationError("record_stride must be > 0");
}

std::vector<double> IntegratorConfig::record_times() const {
  std::vector<double> t(n_records());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = static_cast<double>(j * record_stride) * dt;
  return t;
}

// --- RPMD ------------------------------------------------------------------------

RpmdPropagator::RpmdPropagator(std::optional<PotentialModel> model, double mass,
                               const ThermoParams& thermo, double dt)
    : model_(std::move(model)),
      mass_(mass),
      dt_(dt),
      transform_(static_cast<std::size_t>(thermo.n_beads)) {
  thermo.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be > 0");
  const std::size_t n = transform_.n_beads();
  const std::vector<double> freqs = free_rp_frequencies(thermo, PotentialModel::harmonic(mass, 1.0));
  cos_.resize(n);
  sin_x_.resize(n);
  sin_p_.resize(n);
  cos_[0] = 1.0;
  sin_x_[0] = dt / mass;
  sin_p_[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double w = freqs[k];
    cos_[k] = std::cos(w * dt);
    sin_x_[k] = std::sin(w * dt) / (mass * w);
    sin_p_[k] = -mass * w * std::sin(w * dt);
  }
}

RpmdPropagator::RpmdPropagator(const PotentialModel& model, const ThermoParams& thermo, double dt)
    : RpmdPropagator(std::optional<PotentialModel>(model), model.mass(), thermo, dt) {}

RpmdPropagator RpmdPropagator::free_ring(double mass, const ThermoParams& thermo, double dt) {
  if (!(mass > 0.0)) throw ValidationError("mass must be > 0");
  return RpmdPropagator(std::nullopt, mass, thermo, dt);
}

void RpmdPropagator::step(RingPolymerState& state) const {
  const std::size_t n = transform_.n_beads();
  if (state.n_beads() != n || state.momenta.size() != n)
    throw ValidationError("state bead count does not match propagator");
  const double half = 0.5 * dt_;
  if (model_)
    for (std::size_t k = 0; k < n; ++k) state.momenta[k] -= half * model_->gradient(state.positions[k]);

  thread_local std::vector<double> xm, pm;
  xm.resize(n);
  pm.resize(n);
  transform_.forward(state.positions, xm);
  transform_.forward(state.momenta, pm);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = xm[k];
    const double p = pm[k];
    xm[k] = cos_[k] * x + sin_x_[k] * p;
    pm[k] = sin_p_[k] * x + cos_[k] * p;
  }
  transform_.inverse(xm, state.positions);
  transform_.inverse(pm, state.momenta);

  if (model_)
    for (std::size_t k = 0; k < n; ++k) state.momenta[k] -= half * model_->gradient(state.positions[k]);
}

RingPolymerState rpmd_step(const RingPolymerState& state, const PotentialModel& model,
                           const ThermoParams& thermo, double dt) {
  state.validate();
  RingPolymerState out = state;
  RpmdPropagator(model, thermo, dt).step(out);
  return out;
}

TrajectoryRecord rpmd_trajectory(const RingPolymerState& initial, const PotentialModel& model,
                                 const ThermoParams& thermo, const IntegratorConfig& cfg,
                                 const std::vector<Observable>& record) {
  cfg.validate();
  initial.validate();
  if (initial.n_beads() != static_cast<std::size_t>(thermo.n_beads))
    throw ValidationError("initial state has " + std::to_string(initial.n_beads()) + " beads, thermo has " +
                          std::to_string(thermo.n_beads));
  const RpmdPropagator prop(model, thermo, cfg.dt);
  TrajectoryRecord out;
  out.times = cfg.record_times();
  const std::size_t nr = out.times.size();
  out.centroid_position.reserve(nr);
  out.centroid_momentum.reserve(nr);
  out.values.assign(record.size(), {});
  for (auto& v : out.values) v.reserve(nr);

  RingPolymerState state = initial;
  auto push = [&] {
    out.centroid_position.push_back(centroid_position(state));
    out.centroid_momentum.push_back(centroid_momentum(state));
    for (std::size_t i = 0; i < record.size(); ++i)
      out.values[i].push_back(record[i].is_momentum() ? centroid_momentum(state)
                                                      : centroid_observable(record[i], state));
  };
  push();
  for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
    prop.step(state);
    if (s % cfg.record_stride == 0) push();
  }
  return out;
}

PhaseSpaceSeries classical_trajectory(double q0, double p0, const PotentialModel& model,
                                      const IntegratorConfig& cfg) {
  const ThermoParams single{1.0, 1, 1.0};
  const auto rec = rpmd_trajectory(RingPolymerState({q0}, {p0}), model, single, cfg, {});
  return {rec.times, rec.centroid_position, rec.centroid_momentum};
}

// --- centroid force table ----------------------------------------------------------

CentroidForceTable::CentroidForceTable(std::vector<double> grid, std::vector<double> force,
                                       std::vector<double> std_error)
    : grid_(std::move(grid)), force_(std::move(force)), std_error_(std::move(std_error)) {
  const std::size_t n = grid_.size();
  if (n < 2) throw ValidationError("centroid force table needs at least two nodes");
  if (force_.size() != n || std_error_.size() != n)
    throw ValidationError("centroid force table arrays differ in length");
  for (std::size_t i = 1; i < n; ++i)
    if (!(grid_[i] > grid_[i - 1])) throw ValidationError("centroid force grid must be strictly ascending");

  // Natural cubic spline: tridiagonal system for interior second derivatives.
  second_.assign(n, 0.0);
  if (n > 2) {
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = grid_[i] - grid_[i - 1];
      const double h1 = grid_[i + 1] - grid_[i];
      diag[i] = 2.0 * (h0 + h1);
      upper[i] = h1;
      rhs[i] = 6.0 * ((force_[i + 1] - force_[i]) / h1 - (force_[i] - force_[i - 1]) / h0);
    }
    // Thomas algorithm on rows 1..n-2 (sub-diagonal of row i is h_{i-1}).
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double lower = grid_[i] - grid_[i - 1];
      const double w = lower / diag[i - 1];
      diag[i] -= w * upper[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      second_[i] = (rhs[i] - (i + 2 < n ? upper[i] * second_[i + 1] : 0.0)) / diag[i];
      if (i == 1) break;
    }
  }
  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid_[i + 1] - grid_[i];
    cumulative_[i + 1] = cumulative_[i] + 0.5 * h * (force_[i] + force_[i + 1]) -
                         h * h * h * (second_[i] + second_[i + 1]) / 24.0;
  }
}

std::size_t CentroidForceTable::segment(double q) const {
  if (!contains(q))
    throw GridEscape("centroid position " + std::to_string(q) + " outside force table [" +
                     std::to_string(lower()) + ", " + std::to_string(upper()) + "]");
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), q);
  const auto idx = static_cast<std::size_t>(std::distance(grid_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, grid_.size() - 2);
}

double CentroidForceTable::force_at(double q) const {
  const std::size_t i = segment(q);
  const double h = grid_[i + 1] - grid_[i];
  const double a = (grid_[i + 1] - q) / h;
  const double b = 1.0 - a;
  return a * force_[i] + b * force_[i + 1] +
         ((a * a * a - a) * second_[i] + (b * b * b - b) * second_[i + 1]) * h * h / 6.0;
}

double CentroidForceTable::potential_at(double q) const {
  const std::size_t i = segment(q);
  const double h = grid_[i + 1] - grid_[i];
  const double b = (q - grid_[i]) / h;
  const double a1 = 1.0 - b;
  const double partial =
      h * (force_[i] * (b - 0.5 * b * b) + force_[i + 1] * 0.5 * b * b +
           h * h / 6.0 *
               (second_[i] * (-0.25 * a1 * a1 * a1 * a1 + 0.5 * a1 * a1 - 0.25) +
                second_[i + 1] * (0.25 * b * b * b * b - 0.5 * b * b)));
  return -(cumulative_[i] + partial);
}

CentroidForceTable build_centroid_force_table(const PotentialModel& model, const ThermoParams& thermo,
                                              const SamplerConfig& cfg, const std::vector<double>& grid,
                                              const Parallelism& par) {
  thermo.validate();
  cfg.validate();
  const std::size_t n = grid.size();
  std::vector<double> force(n), se(n);
  std::vector<Warnings> node_warnings(n);
  parallel_for(n, par, [&](std::size_t node) {
    SamplerConfig node_cfg = cfg;
    node_cfg.seed = derive_seed(cfg.seed, node);
    std::vector<double> values(cfg.n_samples);
    const auto diag = visit_constrained_ring_samples(
        model, thermo, node_cfg, grid[node],
        [&](std::size_t i, std::span<const double> x) {
          double g = 0.0;
          for (double xk : x) g += model.gradient(xk);
          values[i] = -g / static_cast<double>(x.size());
        },
        Parallelism{1});
    const auto avg = block_average(values);
    force[node] = avg.mean;
    se[node] = avg.std_error;
    node_warnings[node] = diag.warnings;
  });
  CentroidForceTable table(grid, std::move(force), std::move(se));
  for (std::size_t node = 0; node < n; ++node)
    for (const auto& w : node_warnings[node])
      table.warnings.push_back({w.code, "q_c=" + std::to_string(grid[node]) + ": " + w.message});
  return table;
}

PhaseSpaceSeries cmd_trajectory(double q_c0, double p_c0, const CentroidForceTable& table, double mass,
                                const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(mass > 0.0)) throw ValidationError("mass must be > 0");
  PhaseSpaceSeries out;
  out.times = cfg.record_times();
  out.q.reserve(out.times.size());
  out.p.reserve(out.times.size());
  double q = q_c0;
  double p = p_c0;
  double f = table.force_at(q);
  out.q.push_back(q);
  out.p.push_back(p);
  const double half = 0.5 * cfg.dt;
  for (std::size_t s = 1; s <= cfg.n_steps; ++s) {
    p += half * f;
    q += cfg.dt * p / mass;
    f = table.force_at(q);
    p += half * f;
    if (s % cfg.record_stride == 0) {
      out.q.push_back(q);
      out.p.push_back(p);
    }
  }
  return out;
}

}  // namespace pimd_kubo
