#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/model.hpp"
#include "pimd_kubo/parallel.hpp"
#include "pimd_kubo/ringpoly.hpp"
#include "pimd_kubo/sampler.hpp"

namespace pimd_kubo {

struct IntegratorConfig {
  double dt = 0.01;
  std::size_t n_steps = 1000;
  std::size_t record_stride = 1;  // record every k-th step (t = 0 always recorded)

  void validate() const;
  std::size_t n_records() const { return n_steps / record_stride + 1; }
  std::vector<double> record_times() const;
};

// Split-operator ring-polymer propagator: half potential kick, exact free
// ring-polymer rotation in normal-mode coordinates, half potential kick.
// Symplectic and time reversible. The centroid mode has zero spring
// frequency, so it only drifts during the free step.
class RpmdPropagator {
public:
  RpmdPropagator(const PotentialModel& model, const ThermoParams& thermo, double dt);

  // Potential kicks disabled: the free ring polymer of the given mass.
  static RpmdPropagator free_ring(double mass, const ThermoParams& thermo, double dt);

  void step(RingPolymerState& state) const;

  double dt() const { return dt_; }
  double mass() const { return mass_; }
  std::size_t n_beads() const { return transform_.n_beads(); }

private:
  RpmdPropagator(std::optional<PotentialModel> model, double mass, const ThermoParams& thermo, double dt);

  std::optional<PotentialModel> model_;
  double mass_;
  double dt_;
  NormalModeTransform transform_;
  // Per-mode rotation: x' = c x + s_x p, p' = s_p x + c p.
  std::vector<double> cos_;
  std::vector<double> sin_x_;
  std::vector<double> sin_p_;
};

RingPolymerState rpmd_step(const RingPolymerState& state, const PotentialModel& model,
                           const ThermoParams& thermo, double dt);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> centroid_position;
  std::vector<double> centroid_momentum;
  // values[i][j]: recorded observable i at record j, as (1/N) sum_k B(x_k) or p0.
  std::vector<std::vector<double>> values;
};

TrajectoryRecord rpmd_trajectory(const RingPolymerState& initial, const PotentialModel& model,
                                 const ThermoParams& thermo, const IntegratorConfig& cfg,
                                 const std::vector<Observable>& record);

// Velocity Verlet on V; runs the N = 1 ring-polymer engine.
struct PhaseSpaceSeries {
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> p;
};

PhaseSpaceSeries classical_trajectory(double q0, double p0, const PotentialModel& model,
                                      const IntegratorConfig& cfg);

// Centroid mean force on a grid, interpolated by a natural cubic spline.
class CentroidForceTable {
public:
  CentroidForceTable(std::vector<double> grid, std::vector<double> force, std::vector<double> std_error);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& force() const { return force_; }
  const std::vector<double>& std_error() const { return std_error_; }

  double lower() const { return grid_.front(); }
  double upper() const { return grid_.back(); }
  bool contains(double q) const { return q >= lower() && q <= upper(); }

  // Spline value; throws GridEscape outside [lower, upper].
  double force_at(double q) const;
  // Centroid potential of mean force -int_{lower}^{q} F, zero at lower().
  double potential_at(double q) const;

  Warnings warnings;

private:
  std::size_t segment(double q) const;

  std::vector<double> grid_;
  std::vector<double> force_;
  std::vector<double> std_error_;
  std::vector<double> second_;      // spline second derivatives (natural ends)
  std::vector<double> cumulative_;  // int_{lower}^{grid_i} F
};

// F_c(q_c) = < -(1/N) sum_k V'(x_k) > over the centroid-constrained ensemble.
CentroidForceTable build_centroid_force_table(const PotentialModel& model, const ThermoParams& thermo,
                                              const SamplerConfig& cfg, const std::vector<double>& grid,
                                              const Parallelism& par = {});

// Velocity Verlet for (q_c, p_c) under the tabulated force. Throws GridEscape
// if q_c leaves the table.
PhaseSpaceSeries cmd_trajectory(double q_c0, double p_c0, const CentroidForceTable& table, double mass,
                                const IntegratorConfig& cfg);

}  // namespace pimd_kubo
