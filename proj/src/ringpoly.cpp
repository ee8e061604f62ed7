#include "pimd_kubo/ringpoly.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "fftw_lock.hpp"
#include "pimd_kubo/errors.hpp"

namespace pimd_kubo {

RingPolymerState::RingPolymerState(std::vector<double> x, std::vector<double> p)
    : positions(std::move(x)), momenta(std::move(p)) {
  validate();
}

void RingPolymerState::validate() const {
  if (positions.empty()) throw ValidationError("ring polymer needs at least one bead");
  if (positions.size() != momenta.size())
    throw ValidationError("positions and momenta differ in length");
  for (double v : positions)
    if (!std::isfinite(v)) throw ValidationError("non-finite bead position");
  for (double v : momenta)
    if (!std::isfinite(v)) throw ValidationError("non-finite bead momentum");
}

// --- Observable -------------------------------------------------------------

Observable::Observable(Kind kind, std::string label, std::function<double(double)> f,
                       std::vector<double> coeffs)
    : kind_(kind), label_(std::move(label)), f_(std::move(f)), coeffs_(std::move(coeffs)) {}

Observable Observable::position_function(std::string label, std::function<double(double)> f) {
  if (!f) throw ValidationError("position function is empty");
  return {Kind::PositionFunction, std::move(label), std::move(f), {}};
}

Observable Observable::polynomial(std::string label, std::vector<double> coeffs) {
  if (coeffs.empty()) throw ValidationError("polynomial needs at least one coefficient");
  for (double c : coeffs)
    if (!std::isfinite(c)) throw ValidationError("non-finite polynomial coefficient");
  auto f = [c = coeffs](double q) {
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
    return acc;
  };
  return {Kind::PositionFunction, std::move(label), f, std::move(coeffs)};
}

Observable Observable::momentum() { return {Kind::Momentum, "p", {}, {}}; }

int Observable::parity() const {
  if (kind_ == Kind::Momentum) return -1;
  if (coeffs_.empty()) return 0;
  bool has_even = false;
  bool has_odd = false;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0.0) continue;
    (i % 2 == 0 ? has_even : has_odd) = true;
  }
  if (has_even && has_odd) return 0;
  return has_odd ? -1 : 1;
}

bool Observable::is_linear_position() const {
  if (kind_ != Kind::PositionFunction || coeffs_.size() < 2) return false;
  for (std::size_t i = 2; i < coeffs_.size(); ++i)
    if (coeffs_[i] != 0.0) return false;
  return coeffs_[0] == 0.0 && coeffs_[1] == 1.0;
}

double Observable::operator()(double q) const {
  if (kind_ != Kind::PositionFunction)
    throw UnsupportedObservable("momentum observable has no position representation");
  return f_(q);
}

// --- centroids ----------------------------------------------------------------

double centroid_position(std::span<const double> positions) {
  double sum = 0.0;
  for (double x : positions) sum += x;
  return sum / static_cast<double>(positions.size());
}

double centroid_position(const RingPolymerState& state) { return centroid_position(state.positions); }

double centroid_momentum(const RingPolymerState& state) { return centroid_position(state.momenta); }

double centroid_observable(const Observable& obs, std::span<const double> positions) {
  if (!obs.is_position())
    throw UnsupportedObservable("centroid_observable needs a position function; use centroid_momentum");
  double sum = 0.0;
  for (double x : positions) sum += obs(x);
  return sum / static_cast<double>(positions.size());
}

double centroid_observable(const Observable& obs, const RingPolymerState& state) {
  return centroid_observable(obs, state.positions);
}

double bond_midpoint_momentum_centroid(std::span<const double> momenta) {
  const std::size_t n = momenta.size();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += 0.5 * (momenta[k] + momenta[(k + 1) % n]);
  return sum / static_cast<double>(n);
}

// --- ring energetics ------------------------------------------------------------

double spring_energy(std::span<const double> positions, const ThermoParams& thermo,
                     const PotentialModel& model) {
  const std::size_t n = positions.size();
  if (n < 2) return 0.0;
  const double wn = thermo.spring_frequency();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = positions[k] - positions[(k + 1) % n];
    sum += d * d;
  }
  return 0.5 * model.mass() * wn * wn * sum;
}

double spring_energy(const RingPolymerState& state, const ThermoParams& thermo,
                     const PotentialModel& model) {
  return spring_energy(state.positions, thermo, model);
}

std::vector<double> spring_forces(std::span<const double> positions, const ThermoParams& thermo,
                                  const PotentialModel& model) {
  const std::size_t n = positions.size();
  std::vector<double> f(n, 0.0);
  if (n < 2) return f;
  const double k = model.mass() * thermo.spring_frequency() * thermo.spring_frequency();
  for (std::size_t j = 0; j < n; ++j) {
    const double prev = positions[(j + n - 1) % n];
    const double next = positions[(j + 1) % n];
    f[j] = -k * (2.0 * positions[j] - prev - next);
  }
  return f;
}

double ring_polymer_energy(const RingPolymerState& state, const ThermoParams& thermo,
                           const PotentialModel& model) {
  double kinetic = 0.0;
  double potential = 0.0;
  for (double p : state.momenta) kinetic += p * p;
  for (double x : state.positions) potential += model.value(x);
  return 0.5 * kinetic / model.mass() + spring_energy(state, thermo, model) + potential;
}

double log_ring_density(std::span<const double> positions, const ThermoParams& thermo,
                        const PotentialModel& model) {
  const auto n = static_cast<double>(positions.size());
  const double m = model.mass();
  const double prefactor =
      0.5 * n * std::log(m * n / (2.0 * std::numbers::pi * thermo.beta * thermo.hbar * thermo.hbar));
  double vsum = 0.0;
  for (double x : positions) vsum += model.value(x);
  double bond_sum = 0.0;
  const std::size_t nb = positions.size();
  for (std::size_t k = 0; k < nb; ++k) {
    const double d = positions[k] - positions[(k + 1) % nb];
    bond_sum += d * d;
  }
  return prefactor - thermo.beta / n * vsum -
         m * n / (2.0 * thermo.beta * thermo.hbar * thermo.hbar) * bond_sum;
}

std::vector<double> free_rp_frequencies(const ThermoParams& thermo, const PotentialModel&) {
  thermo.validate();
  const int n = thermo.n_beads;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    w[static_cast<std::size_t>(k)] =
        k == 0 ? 0.0 : 2.0 * thermo.spring_frequency() * std::sin(k * std::numbers::pi / n);
  return w;
}

// --- normal modes ---------------------------------------------------------------

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct NormalModeTransform::FftPlan {
  fftw_plan r2hc = nullptr;
  fftw_plan hc2r = nullptr;

  explicit FftPlan(std::size_t n) {
    std::vector<double> a(n), b(n);
    const int ni = static_cast<int>(n);
    std::lock_guard lock(detail::fftw_planner_mutex());
    r2hc = fftw_plan_r2r_1d(ni, a.data(), b.data(), FFTW_R2HC, FFTW_ESTIMATE | FFTW_UNALIGNED);
    hc2r = fftw_plan_r2r_1d(ni, a.data(), b.data(), FFTW_HC2R, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(r2hc);
    fftw_destroy_plan(hc2r);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

double NormalModeTransform::mode_vector(std::size_t n_beads, std::size_t bead, std::size_t mode) {
  const auto n = static_cast<double>(n_beads);
  if (mode == 0) return 1.0 / std::sqrt(n);
  if (2 * mode == n_beads) return (bead % 2 == 0 ? 1.0 : -1.0) / std::sqrt(n);
  const double phase = 2.0 * std::numbers::pi * static_cast<double>((bead * mode) % n_beads) / n;
  return std::sqrt(2.0 / n) * (2 * mode < n_beads ? std::cos(phase) : std::sin(phase));
}

NormalModeTransform::NormalModeTransform(std::size_t n_beads, Backend backend) : n_(n_beads) {
  if (n_beads == 0) throw ValidationError("normal-mode transform needs at least one bead");
  backend_ = backend == Backend::Auto ? (n_beads <= kMatrixLimit ? Backend::Matrix : Backend::Fft)
                                      : backend;
  if (backend_ == Backend::Matrix) {
    matrix_.resize(n_ * n_);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k) matrix_[j * n_ + k] = mode_vector(n_, j, k);
  } else {
    fft_ = std::make_shared<const FftPlan>(n_);
  }
}

void NormalModeTransform::forward(std::span<const double> in, std::span<double> out) const {
  if (in.size() != n_ || out.size() != n_) throw ValidationError("normal-mode transform size mismatch");
  if (backend_ == Backend::Matrix) {
    for (std::size_t k = 0; k < n_; ++k) out[k] = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double xj = in[j];
      const double* row = &matrix_[j * n_];
      for (std::size_t k = 0; k < n_; ++k) out[k] += row[k] * xj;
    }
    return;
  }
  thread_local std::vector<double> src, hc;
  src.assign(in.begin(), in.end());
  hc.resize(n_);
  fftw_execute_r2r(fft_->r2hc, src.data(), hc.data());
  const auto n = static_cast<double>(n_);
  const double s0 = 1.0 / std::sqrt(n);
  const double s = std::sqrt(2.0 / n);
  out[0] = s0 * hc[0];
  for (std::size_t k = 1; k < n_; ++k) {
    // For k > n/2, hc[k] = -sum_j x_j sin(2 pi j (n-k) / n) = sum_j x_j sin(2 pi j k / n).
    out[k] = (2 * k == n_) ? s0 * hc[k] : s * hc[k];
  }
}

void NormalModeTransform::inverse(std::span<const double> in, std::span<double> out) const {
  if (in.size() != n_ || out.size() != n_) throw ValidationError("normal-mode transform size mismatch");
  if (backend_ == Backend::Matrix) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double* row = &matrix_[j * n_];
      double acc = 0.0;
      for (std::size_t k = 0; k < n_; ++k) acc += row[k] * in[k];
      out[j] = acc;
    }
    return;
  }
  thread_local std::vector<double> hc, dst;
  hc.resize(n_);
  dst.resize(n_);
  const auto n = static_cast<double>(n_);
  const double s0 = 1.0 / std::sqrt(n);
  const double s = 0.5 * std::sqrt(2.0 / n);
  hc[0] = s0 * in[0];
  for (std::size_t k = 1; k < n_; ++k) hc[k] = (2 * k == n_) ? s0 * in[k] : s * in[k];
  fftw_execute_r2r(fft_->hc2r, hc.data(), dst.data());
  for (std::size_t j = 0; j < n_; ++j) out[j] = dst[j];
}

std::vector<double> NormalModeTransform::apply(std::span<const double> in, TransformDirection dir) const {
  std::vector<double> out(n_);
  if (dir == TransformDirection::Forward)
    forward(in, out);
  else
    inverse(in, out);
  return out;
}

std::vector<double> normal_mode_transform(std::span<const double> values, TransformDirection dir) {
  return NormalModeTransform(values.size()).apply(values, dir);
}

}  // namespace pimd_kubo
