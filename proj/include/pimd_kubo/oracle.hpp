#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

#include "pimd_kubo/model.hpp"
#include "pimd_kubo/parallel.hpp"
#include "pimd_kubo/ringpoly.hpp"
#include "pimd_kubo/sampler.hpp"
#include "pimd_kubo/series.hpp"

namespace pimd_kubo {

// Uniform position grid [q_min, q_max] with n_points nodes.
struct GridSpec {
  double q_min = -10.0;
  double q_max = 10.0;
  std::size_t n_points = 512;

  void validate() const;
  double spacing() const { return (q_max - q_min) / static_cast<double>(n_points - 1); }
  double point(std::size_t i) const { return q_min + static_cast<double>(i) * spacing(); }
};

// Lowest eigenpairs of the grid Hamiltonian. States are stored as grid
// amplitudes psi_n(q_i) normalised so that sum_i |psi_n(q_i)|^2 dq = 1.
class EigenSystem {
public:
  EigenSystem(GridSpec grid, double mass, double hbar, Eigen::VectorXd energies, Eigen::MatrixXd states,
              double max_residual);

  const GridSpec& grid() const { return grid_; }
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& states() const { return states_; }
  std::size_t n_retained() const { return static_cast<std::size_t>(energies_.size()); }
  double max_residual() const { return max_residual_; }

  // <n|A|m> in the retained eigenbasis.
  Eigen::MatrixXcd operator_matrix(const Observable& obs) const;

  // Largest |psi_n| at the two boundary nodes over retained states.
  double max_boundary_amplitude() const;

private:
  GridSpec grid_;
  double mass_;
  double hbar_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd states_;
  double max_residual_;
};

// Sinc-DVR (Colbert-Miller) kinetic energy plus diagonal potential.
// Throws BoundaryLeak when a retained state does not vanish (< 1e-8) at the
// grid edges.
EigenSystem diagonalize(const PotentialModel& model, const GridSpec& grid, std::size_t n_retained,
                        double hbar = 1.0);

// Kubo weight (1/beta) int_0^beta e^{-lambda E_n} e^{-(beta-lambda) E_m} dlambda.
// A series expansion replaces the divided difference for near-degenerate
// levels.
double kubo_weight(double e_n, double e_m, double beta);

// Throws SpectralIncomplete unless e^{-beta E_last} / Z < 1e-12.
void check_spectral_completeness(const EigenSystem& eig, double beta);

double partition_function(const EigenSystem& eig, double beta);
double thermal_average(const EigenSystem& eig, const Observable& obs, double beta);

// Spectral evaluation of the Kubo-transformed correlation function. The
// imaginary residue is recorded in metadata["imag_residue"].
CorrelationSeries exact_kubo_correlator(const EigenSystem& eig, const Observable& a, const Observable& b,
                                        double beta, const std::vector<double>& times);

// Equal-time Kubo correlator from an n_nodes Gauss-Legendre lambda quadrature
// of Tr{e^{-(beta-lambda)H} A e^{-lambda H} B} / (beta Z). Independent of
// kubo_weight.
double kubo_equal_time_by_quadrature(const EigenSystem& eig, const Observable& a, const Observable& b,
                                     double beta, int n_nodes = 64);

// (1/2N)(A e^{-beta H} + e^{-beta H} A) + (1/N) sum_{j=1}^{N-1} e^{-beta j H / N} A e^{-beta (1 - j/N) H}
// in the retained eigenbasis (not divided by Z).
struct KuboOperator {
  Eigen::MatrixXcd matrix;
  double partition_function = 1.0;
  int n_slices = 1;
};

KuboOperator discrete_kubo_transform(const EigenSystem& eig, const Observable& a, double beta, int n_slices);

// Tr{K e^{iHt/hbar} B e^{-iHt/hbar}} / Z
CorrelationSeries correlate(const KuboOperator& kubo, const EigenSystem& eig, const Observable& b,
                            const std::vector<double>& times);

// Harmonic path-integral kernel e^{-beta m w^2 eta^2 / (8N)} e^{i eta p_mid / hbar}.
std::complex<double> harmonic_j_kernel(double x_k, double p_mid, double eta, const PotentialModel& model,
                                       const ThermoParams& thermo);

// Tr{S(t; x, p) B(q)} for the harmonic oscillator: the bead average of
// Gaussians of variance beta hbar^2 sin^2(wt) / (4 m N) centred on
// x_k cos(wt) + (p_k + p_{k+1}) sin(wt) / (2 m w). Each Gaussian integral is
// done by adaptive Gauss-Kronrod quadrature; at sin(wt) = 0 the Gaussian is a
// delta function.
double harmonic_swarm_trace(std::span<const double> x, std::span<const double> p, double t,
                            const Observable& b, const PotentialModel& model, const ThermoParams& thermo);

// Monte Carlo evaluation of C~_Aq(t) for the harmonic oscillator from
// x ~ R(x), p~ ~ Maxwell-Boltzmann and the closed-form centroid motion
// x0(t) = (1/N) sum_k [x_k cos(wt) + (p_k + p_{k+1}) sin(wt) / (2 m w)].
// Uses the same ensemble and momentum streams as rpmd_kubo_correlator.
CorrelationSeries harmonic_caq_reference(const PotentialModel& model, const ThermoParams& thermo,
                                         const Observable& a, const std::vector<double>& times,
                                         const SamplerConfig& sampler_cfg, const Parallelism& par = {});

// Same, on a given ensemble.
CorrelationSeries harmonic_caq_reference(const PotentialModel& model, const Ensemble& ensemble,
                                         const Observable& a, const std::vector<double>& times,
                                         const Parallelism& par = {});

// Analytic harmonic centroid density: Gaussian in q_c of variance
// 1/(beta m w^2) times Gaussian in p_c of variance m/beta. The table holds the
// q_c factor evaluated at the bin centres of `centers`.
struct CentroidDensityReference {
  double position_variance = 0.0;
  double momentum_variance = 0.0;
  double operator()(double q_c, double p_c) const;
  double position_density(double q_c) const;
};

CentroidDensityReference centroid_density_reference(const PotentialModel& model, const ThermoParams& thermo);
DensityTable centroid_density_reference(const PotentialModel& model, const ThermoParams& thermo,
                                        const std::vector<double>& centers);

}  // namespace pimd_kubo
