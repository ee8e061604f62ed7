#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pimd_kubo/model.hpp"

namespace pimd_kubo {

// Bead positions and momenta of a cyclic ring polymer. Bead indices are
// 0-based with closure k + N == k.
struct RingPolymerState {
  std::vector<double> positions;
  std::vector<double> momenta;

  RingPolymerState() = default;
  explicit RingPolymerState(std::size_t n_beads) : positions(n_beads, 0.0), momenta(n_beads, 0.0) {}
  RingPolymerState(std::vector<double> x, std::vector<double> p);

  std::size_t n_beads() const { return positions.size(); }
  // Throws ValidationError on length mismatch or non-finite entries.
  void validate() const;
};

// An observable is either a function of position or the momentum.
class Observable {
public:
  enum class Kind { PositionFunction, Momentum };

  static Observable position_function(std::string label, std::function<double(double)> f);
  // f(q) = sum_i coeffs[i] q^i
  static Observable polynomial(std::string label, std::vector<double> coeffs);
  static Observable momentum();

  // q, q^2, q^3, q^4
  static Observable q() { return polynomial("q", {0.0, 1.0}); }
  static Observable q2() { return polynomial("q2", {0.0, 0.0, 1.0}); }
  static Observable q3() { return polynomial("q3", {0.0, 0.0, 0.0, 1.0}); }
  static Observable q4() { return polynomial("q4", {0.0, 0.0, 0.0, 0.0, 1.0}); }

  Kind kind() const { return kind_; }
  bool is_position() const { return kind_ == Kind::PositionFunction; }
  bool is_momentum() const { return kind_ == Kind::Momentum; }
  const std::string& label() const { return label_; }
  // Polynomial coefficients, empty for non-polynomial functions.
  const std::vector<double>& coefficients() const { return coeffs_; }
  // Parity of a position function: +1 even, -1 odd, 0 mixed or unknown.
  int parity() const;
  // True for q (identity); used to gate linear-only methods.
  bool is_linear_position() const;

  // Throws UnsupportedObservable for Momentum.
  double operator()(double q) const;

private:
  Observable(Kind kind, std::string label, std::function<double(double)> f, std::vector<double> coeffs);

  Kind kind_;
  std::string label_;
  std::function<double(double)> f_;
  std::vector<double> coeffs_;
};

double centroid_position(const RingPolymerState& state);
double centroid_position(std::span<const double> positions);
double centroid_momentum(const RingPolymerState& state);
// (1/N) sum_k f(x_k); rejects Momentum.
double centroid_observable(const Observable& obs, const RingPolymerState& state);
double centroid_observable(const Observable& obs, std::span<const double> positions);
// (1/N) sum_k (p_k + p_{k+1}) / 2
double bond_midpoint_momentum_centroid(std::span<const double> momenta);

// sum_k (m/2) w_N^2 (x_k - x_{k+1})^2, w_N = N / (beta hbar).
double spring_energy(std::span<const double> positions, const ThermoParams& thermo,
                     const PotentialModel& model);
double spring_energy(const RingPolymerState& state, const ThermoParams& thermo,
                     const PotentialModel& model);
// -d(spring_energy)/dx_k
std::vector<double> spring_forces(std::span<const double> positions, const ThermoParams& thermo,
                                  const PotentialModel& model);

// Ring-polymer Hamiltonian sum p^2/2m + spring_energy + sum V.
double ring_polymer_energy(const RingPolymerState& state, const ThermoParams& thermo,
                           const PotentialModel& model);

// log R(x) including the (mN / (2 pi beta hbar^2))^{N/2} prefactor.
double log_ring_density(std::span<const double> positions, const ThermoParams& thermo,
                        const PotentialModel& model);

// w_k = 2 (N / (beta hbar)) sin(k pi / N), k = 0..N-1.
std::vector<double> free_rp_frequencies(const ThermoParams& thermo, const PotentialModel& model);

enum class TransformDirection { Forward, Inverse };

// Orthogonal transform to the normal modes of the cyclic spring matrix.
//
// Mode 0 is the centroid mode (amplitude sqrt(N) * centroid). For
// 1 <= k < N/2 the mode vector is sqrt(2/N) cos(2 pi j k / N), for k > N/2 it
// is sqrt(2/N) sin(2 pi j k / N), and for even N the k = N/2 mode is
// (-1)^j / sqrt(N). Mode k has free frequency 2 w_N sin(k pi / N).
//
// Up to kMatrixLimit beads the transform is an explicit dense matrix; above
// it a real FFT is used. Both paths are exposed so they can be compared.
class NormalModeTransform {
public:
  static constexpr std::size_t kMatrixLimit = 64;

  enum class Backend { Auto, Matrix, Fft };

  explicit NormalModeTransform(std::size_t n_beads, Backend backend = Backend::Auto);

  std::size_t n_beads() const { return n_; }
  Backend backend() const { return backend_; }

  void forward(std::span<const double> in, std::span<double> out) const;
  void inverse(std::span<const double> in, std::span<double> out) const;

  std::vector<double> apply(std::span<const double> in, TransformDirection dir) const;

  // Column k of the orthogonal matrix evaluated at bead j.
  static double mode_vector(std::size_t n_beads, std::size_t bead, std::size_t mode);

private:
  std::size_t n_;
  Backend backend_;
  std::vector<double> matrix_;  // row-major: matrix_[j * n + k] = mode_vector(n, j, k)
  struct FftPlan;
  std::shared_ptr<const FftPlan> fft_;
};

std::vector<double> normal_mode_transform(std::span<const double> values, TransformDirection dir);

}  // namespace pimd_kubo
