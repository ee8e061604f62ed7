#include "pimd_kubo/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <numbers>
#include <string>

#include "pimd_kubo/stats.hpp"

namespace pimd_kubo {

namespace {

constexpr double kCompletenessTolerance = 1e-12;
constexpr double kBoundaryTolerance = 1e-8;
constexpr double kImagTolerance = 1e-10;

void require_harmonic(const PotentialModel& model, const char* what) {
  if (model.kind() != PotentialKind::Harmonic)
    throw ValidationError(std::string(what) + " is defined for the harmonic model only");
}

std::vector<double> legendre_nodes_and_weights(int n, std::vector<double>& weights) {
  const auto positive = boost::math::legendre_p_zeros<double>(n);
  std::vector<double> nodes;
  weights.clear();
  for (double x : positive) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    if (x == 0.0) {
      nodes.push_back(0.0);
      weights.push_back(w);
    } else {
      nodes.push_back(x);
      weights.push_back(w);
      nodes.push_back(-x);
      weights.push_back(w);
    }
  }
  return nodes;
}

}  // namespace

void GridSpec::validate() const {
  if (!(q_min < q_max)) throw ValidationError("grid needs q_min < q_max");
  if (n_points < 64) throw ValidationError("grid needs at least 64 points");
}

EigenSystem::EigenSystem(GridSpec grid, double mass, double hbar, Eigen::VectorXd energies,
                         Eigen::MatrixXd states, double max_residual)
    : grid_(grid),
      mass_(mass),
      hbar_(hbar),
      energies_(std::move(energies)),
      states_(std::move(states)),
      max_residual_(max_residual) {}

Eigen::MatrixXcd EigenSystem::operator_matrix(const Observable& obs) const {
  const double dq = grid_.spacing();
  const auto n = static_cast<Eigen::Index>(grid_.n_points);
  // Unit vectors on the grid.
  const Eigen::MatrixXd u = states_ * std::sqrt(dq);
  if (obs.is_position()) {
    Eigen::VectorXd f(n);
    for (Eigen::Index i = 0; i < n; ++i) f[i] = obs(grid_.point(static_cast<std::size_t>(i)));
    const Eigen::MatrixXd a = u.transpose() * f.asDiagonal() * u;
    return a.cast<std::complex<double>>();
  }
  // Sinc-DVR derivative: D_ij = (-1)^{i-j} / ((i - j) dq), p = -i hbar D.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j) d(i, j) = ((i - j) % 2 == 0 ? 1.0 : -1.0) / (static_cast<double>(i - j) * dq);
  const Eigen::MatrixXd ud = u.transpose() * d * u;
  return std::complex<double>(0.0, -hbar_) * ud.cast<std::complex<double>>();
}

double EigenSystem::max_boundary_amplitude() const {
  const Eigen::Index last = states_.rows() - 1;
  double amp = 0.0;
  for (Eigen::Index n = 0; n < states_.cols(); ++n)
    amp = std::max({amp, std::abs(states_(0, n)), std::abs(states_(last, n))});
  return amp;
}

EigenSystem diagonalize(const PotentialModel& model, const GridSpec& grid, std::size_t n_retained,
                        double hbar) {
  grid.validate();
  if (!(hbar > 0.0)) throw ValidationError("hbar must be > 0");
  if (n_retained == 0 || n_retained > grid.n_points)
    throw ValidationError("n_retained must lie in [1, n_points]");
  const auto n = static_cast<Eigen::Index>(grid.n_points);
  const double dq = grid.spacing();
  const double t0 = hbar * hbar / (2.0 * model.mass() * dq * dq);
  Eigen::MatrixXd h(n, n);
  double v_min = model.value(grid.point(0));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        const double v = model.value(grid.point(static_cast<std::size_t>(i)));
        v_min = std::min(v_min, v);
        h(i, j) = t0 * std::numbers::pi * std::numbers::pi / 3.0 + v;
      } else {
        const auto d = static_cast<double>(i - j);
        h(i, j) = t0 * ((i - j) % 2 == 0 ? 2.0 : -2.0) / (d * d);
      }
    }
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw Error("grid Hamiltonian diagonalisation failed");
  const auto keep = static_cast<Eigen::Index>(n_retained);
  Eigen::VectorXd energies = solver.eigenvalues().head(keep);
  Eigen::MatrixXd u = solver.eigenvectors().leftCols(keep);

  const double e_max = energies[keep - 1] - v_min;
  if (e_max > 0.0 && dq > 0.25 * std::numbers::pi * hbar / std::sqrt(2.0 * model.mass() * e_max))
    throw ValidationError("grid spacing " + std::to_string(dq) + " does not resolve the de Broglie scale at E=" +
                          std::to_string(e_max));

  double residual = 0.0;
  for (Eigen::Index k = 0; k < keep; ++k) {
    // Fix the arbitrary sign: first significant amplitude positive.
    const double scale = u.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(u(i, k)) > 1e-6 * scale) {
        if (u(i, k) < 0.0) u.col(k) *= -1.0;
        break;
      }
    }
    residual = std::max(residual, (h * u.col(k) - energies[k] * u.col(k)).norm());
  }
  EigenSystem eig(grid, model.mass(), hbar, std::move(energies), u / std::sqrt(dq), residual);
  const double leak = eig.max_boundary_amplitude();
  if (leak >= kBoundaryTolerance)
    throw BoundaryLeak("retained eigenstates reach the grid boundary (|psi| = " + std::to_string(leak) +
                       "); widen the grid or retain fewer states");
  return eig;
}

double kubo_weight(double e_n, double e_m, double beta) {
  const double delta = e_m - e_n;
  const double x = beta * delta;
  const double base = std::exp(-beta * e_n);
  if (std::abs(delta) < 1e-10 * std::max(1.0, std::abs(e_n)))
    return base * (1.0 - 0.5 * x + x * x / 6.0);
  return base * (-std::expm1(-x)) / x;
}

double partition_function(const EigenSystem& eig, double beta) {
  double z = 0.0;
  for (Eigen::Index n = 0; n < eig.energies().size(); ++n) z += std::exp(-beta * eig.energies()[n]);
  return z;
}

void check_spectral_completeness(const EigenSystem& eig, double beta) {
  const auto& e = eig.energies();
  double z = 0.0;
  for (Eigen::Index n = 0; n < e.size(); ++n) z += std::exp(-beta * (e[n] - e[0]));
  const double tail = std::exp(-beta * (e[e.size() - 1] - e[0])) / z;
  if (tail >= kCompletenessTolerance)
    throw SpectralIncomplete("highest retained level carries Boltzmann weight " + std::to_string(tail) +
                             " >= 1e-12; retain more states");
}

double thermal_average(const EigenSystem& eig, const Observable& obs, double beta) {
  check_spectral_completeness(eig, beta);
  const auto a = eig.operator_matrix(obs);
  const auto& e = eig.energies();
  double z = 0.0;
  double sum = 0.0;
  for (Eigen::Index n = 0; n < e.size(); ++n) {
    const double w = std::exp(-beta * (e[n] - e[0]));
    z += w;
    sum += w * a(n, n).real();
  }
  return sum / z;
}

CorrelationSeries exact_kubo_correlator(const EigenSystem& eig, const Observable& a, const Observable& b,
                                        double beta, const std::vector<double>& times) {
  if (!(beta > 0.0)) throw ValidationError("beta must be > 0");
  check_spectral_completeness(eig, beta);
  const auto am = eig.operator_matrix(a);
  const auto bm = eig.operator_matrix(b);
  const Eigen::VectorXd e = eig.energies().array() - eig.energies()[0];
  const Eigen::Index n = e.size();
  double z = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) z += std::exp(-beta * e[k]);

  Eigen::MatrixXcd g(n, n);
  double g_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      g(i, j) = kubo_weight(e[i], e[j], beta) * am(i, j) * bm(j, i) / z;
      g_norm += std::abs(g(i, j));
    }

  CorrelationSeries out;
  out.times = times;
  out.values.resize(times.size());
  out.std_errors.assign(times.size(), 0.0);
  double residue = 0.0;
  Eigen::VectorXcd phase_m(n);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k] / eig.hbar();
    for (Eigen::Index j = 0; j < n; ++j) phase_m[j] = std::polar(1.0, e[j] * t);
    const Eigen::VectorXcd gm = g * phase_m;
    std::complex<double> c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) c += std::polar(1.0, -e[i] * t) * gm[i];
    out.values[k] = c.real();
    residue = std::max(residue, std::abs(c.imag()));
  }
  if (residue > kImagTolerance * std::max(1.0, g_norm))
    throw Error("Kubo correlator has imaginary residue " + std::to_string(residue));
  out.metadata["method"] = "spectral";
  out.metadata["imag_residue"] = std::to_string(residue);
  out.metadata["A"] = a.label();
  out.metadata["B"] = b.label();
  return out;
}

double kubo_equal_time_by_quadrature(const EigenSystem& eig, const Observable& a, const Observable& b,
                                     double beta, int n_nodes) {
  check_spectral_completeness(eig, beta);
  const auto am = eig.operator_matrix(a);
  const auto bm = eig.operator_matrix(b);
  const Eigen::VectorXd e = eig.energies().array() - eig.energies()[0];
  double z = 0.0;
  for (Eigen::Index k = 0; k < e.size(); ++k) z += std::exp(-beta * e[k]);
  std::vector<double> weights;
  const auto nodes = legendre_nodes_and_weights(n_nodes, weights);
  std::complex<double> integral = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double lambda = 0.5 * beta * (1.0 + nodes[k]);
    const Eigen::VectorXcd left = (-(beta - lambda) * e).array().exp().cast<std::complex<double>>();
    const Eigen::VectorXcd right = (-lambda * e).array().exp().cast<std::complex<double>>();
    const Eigen::MatrixXcd m = left.asDiagonal() * am * right.asDiagonal() * bm;
    integral += 0.5 * beta * weights[k] * m.trace();
  }
  return integral.real() / (beta * z);
}

KuboOperator discrete_kubo_transform(const EigenSystem& eig, const Observable& a, double beta, int n_slices) {
  if (n_slices < 1) throw ValidationError("n_slices must be >= 1");
  check_spectral_completeness(eig, beta);
  const auto am = eig.operator_matrix(a);
  const auto& e = eig.energies();
  const Eigen::Index n = e.size();
  const double inv_n = 1.0 / n_slices;
  KuboOperator out;
  out.n_slices = n_slices;
  out.partition_function = partition_function(eig, beta);
  out.matrix.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double w = 0.5 * inv_n * (std::exp(-beta * e[i]) + std::exp(-beta * e[j]));
      for (int s = 1; s < n_slices; ++s) {
        const double frac = s * inv_n;
        w += inv_n * std::exp(-beta * frac * e[i] - beta * (1.0 - frac) * e[j]);
      }
      out.matrix(i, j) = w * am(i, j);
    }
  }
  return out;
}

CorrelationSeries correlate(const KuboOperator& kubo, const EigenSystem& eig, const Observable& b,
                            const std::vector<double>& times) {
  const auto bm = eig.operator_matrix(b);
  const auto& e = eig.energies();
  const Eigen::Index n = e.size();
  CorrelationSeries out;
  out.times = times;
  out.values.resize(times.size());
  out.std_errors.assign(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k] / eig.hbar();
    std::complex<double> c = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        c += kubo.matrix(i, j) * bm(j, i) * std::polar(1.0, (e[j] - e[i]) * t);
    out.values[k] = c.real() / kubo.partition_function;
  }
  out.metadata["method"] = "discrete_kubo";
  out.metadata["n_slices"] = std::to_string(kubo.n_slices);
  return out;
}

std::complex<double> harmonic_j_kernel(double /*x_k*/, double p_mid, double eta, const PotentialModel& model,
                                       const ThermoParams& thermo) {
  require_harmonic(model, "harmonic_j_kernel");
  thermo.validate();
  const double w = model.omega();
  const double damping = std::exp(-thermo.beta * model.mass() * w * w * eta * eta / (8.0 * thermo.n_beads));
  return std::polar(damping, eta * p_mid / thermo.hbar);
}

double harmonic_swarm_trace(std::span<const double> x, std::span<const double> p, double t,
                            const Observable& b, const PotentialModel& model, const ThermoParams& thermo) {
  require_harmonic(model, "harmonic_swarm_trace");
  thermo.validate();
  if (!b.is_position()) throw UnsupportedObservable("harmonic_swarm_trace needs a position observable");
  const std::size_t n = x.size();
  if (p.size() != n || n != static_cast<std::size_t>(thermo.n_beads))
    throw ValidationError("state size does not match n_beads");
  const double m = model.mass();
  const double w = model.omega();
  const double c = std::cos(w * t);
  const double s = std::sin(w * t);
  const double sigma = std::sqrt(thermo.beta / (4.0 * m * thermo.n_beads)) * thermo.hbar * std::abs(s);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double mu = x[k] * c + (p[k] + p[(k + 1) % n]) * s / (2.0 * m * w);
    if (s == 0.0) {
      total += b(mu);
      continue;
    }
    double error = 0.0;
    auto integrand = [&](double z) { return b(mu + sigma * z) * norm * std::exp(-0.5 * z * z); };
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, -8.0, 8.0, 20, 1e-13, &error);
    if (!(error <= 1e-8))
      throw QuadratureFailure("swarm-trace quadrature error " + std::to_string(error) + " above 1e-8");
    total += value;
  }
  return total / static_cast<double>(n);
}

CorrelationSeries harmonic_caq_reference(const PotentialModel& model, const Ensemble& ensemble,
                                         const Observable& a, const std::vector<double>& times,
                                         const Parallelism& par) {
  require_harmonic(model, "harmonic_caq_reference");
  if (!a.is_position()) throw UnsupportedObservable("harmonic_caq_reference needs a position observable A");
  const double m = model.mass();
  const double w = model.omega();
  const auto& thermo = ensemble.thermo();
  std::vector<double> cos_t(times.size()), sin_t(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    cos_t[k] = std::cos(w * times[k]);
    sin_t[k] = std::sin(w * times[k]);
  }
  const auto avg = block_series_average(
      ensemble.size(), times.size(),
      [&](std::size_t i, std::span<double> out) {
        const auto x = ensemble[i];
        const auto p = draw_momenta(thermo, model, ensemble.seed(), i, MomentumConvention::Bead);
        const double a0 = centroid_observable(a, x);
        const double x0 = centroid_position(x);
        const double p_mid = bond_midpoint_momentum_centroid(p);
        for (std::size_t k = 0; k < out.size(); ++k)
          out[k] = a0 * (x0 * cos_t[k] + p_mid * sin_t[k] / (m * w));
      },
      par, ensemble.n_blocks);
  CorrelationSeries out;
  out.times = times;
  out.values = avg.mean;
  out.std_errors = avg.std_error;
  out.metadata["method"] = "harmonic_reference";
  out.metadata["A"] = a.label();
  out.metadata["B"] = "q";
  out.warnings = ensemble.diagnostics.warnings;
  return out;
}

CorrelationSeries harmonic_caq_reference(const PotentialModel& model, const ThermoParams& thermo,
                                         const Observable& a, const std::vector<double>& times,
                                         const SamplerConfig& sampler_cfg, const Parallelism& par) {
  require_harmonic(model, "harmonic_caq_reference");
  const auto ensemble = sample_ring_positions(model, thermo, sampler_cfg, par);
  return harmonic_caq_reference(model, ensemble, a, times, par);
}

double CentroidDensityReference::position_density(double q_c) const {
  return std::exp(-0.5 * q_c * q_c / position_variance) / std::sqrt(2.0 * std::numbers::pi * position_variance);
}

double CentroidDensityReference::operator()(double q_c, double p_c) const {
  return position_density(q_c) * std::exp(-0.5 * p_c * p_c / momentum_variance) /
         std::sqrt(2.0 * std::numbers::pi * momentum_variance);
}

CentroidDensityReference centroid_density_reference(const PotentialModel& model, const ThermoParams& thermo) {
  require_harmonic(model, "centroid_density_reference");
  thermo.validate();
  const double m = model.mass();
  const double w = model.omega();
  return {1.0 / (thermo.beta * m * w * w), m / thermo.beta};
}

DensityTable centroid_density_reference(const PotentialModel& model, const ThermoParams& thermo,
                                        const std::vector<double>& centers) {
  const auto ref = centroid_density_reference(model, thermo);
  if (centers.size() < 2) throw ValidationError("density grid needs at least two points");
  DensityTable table;
  table.centers = centers;
  table.bin_width = centers[1] - centers[0];
  table.momentum_variance = ref.momentum_variance;
  table.density.resize(centers.size());
  table.std_errors.assign(centers.size(), 0.0);
  for (std::size_t i = 0; i < centers.size(); ++i) table.density[i] = ref.position_density(centers[i]);
  table.metadata["method"] = "analytic_harmonic_centroid";
  return table;
}

}  // namespace pimd_kubo
