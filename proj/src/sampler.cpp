#include "pimd_kubo/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace pimd_kubo {

namespace {

constexpr std::size_t kAdaptInterval = 50;

struct ChainCounters {
  std::size_t moves_tried = 0;
  std::size_t moves_accepted = 0;
  std::size_t translations_tried = 0;
  std::size_t translations_accepted = 0;
};

double adapt(double scale, std::size_t accepted, std::size_t tried, double target) {
  if (tried == 0) return scale;
  const double rate = static_cast<double>(accepted) / static_cast<double>(tried);
  return scale * std::clamp((rate + 0.01) / (target + 0.01), 0.5, 2.0);
}

bool metropolis_accept(double d_action, RandomStream& rng) {
  const double u = rng.uniform();
  return d_action <= 0.0 || u < std::exp(-d_action);
}

// Single-bead moves plus a whole-ring translation per sweep.
class FreeChain {
public:
  FreeChain(const PotentialModel& model, const ThermoParams& thermo, double scale)
      : model_(model),
        n_(static_cast<std::size_t>(thermo.n_beads)),
        bead_beta_(thermo.bead_beta()),
        spring_(model.mass() * thermo.n_beads / (2.0 * thermo.beta * thermo.hbar * thermo.hbar)),
        bead_scale_(scale),
        translation_scale_(scale),
        x_(n_, 0.0),
        v_(n_, model.value(0.0)),
        trial_(n_) {}

  void sweep(RandomStream& rng, ChainCounters& c) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double old = x_[j];
      const double proposed = old + bead_scale_ * (2.0 * rng.uniform() - 1.0);
      const double v_new = model_.value(proposed);
      double d_action = bead_beta_ * (v_new - v_[j]);
      if (n_ > 1) {
        const double prev = x_[j == 0 ? n_ - 1 : j - 1];
        const double next = x_[j + 1 == n_ ? 0 : j + 1];
        const double d_new = (proposed - prev) * (proposed - prev) + (proposed - next) * (proposed - next);
        const double d_old = (old - prev) * (old - prev) + (old - next) * (old - next);
        d_action += spring_ * (d_new - d_old);
      }
      ++c.moves_tried;
      if (metropolis_accept(d_action, rng)) {
        x_[j] = proposed;
        v_[j] = v_new;
        ++c.moves_accepted;
      }
    }
    const double shift = translation_scale_ * (2.0 * rng.uniform() - 1.0);
    double d_v = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      trial_[j] = model_.value(x_[j] + shift);
      d_v += trial_[j] - v_[j];
    }
    ++c.translations_tried;
    if (metropolis_accept(bead_beta_ * d_v, rng)) {
      for (std::size_t j = 0; j < n_; ++j) {
        x_[j] += shift;
        v_[j] = trial_[j];
      }
      ++c.translations_accepted;
    }
  }

  void adapt_scales(const ChainCounters& window, double target) {
    bead_scale_ = adapt(bead_scale_, window.moves_accepted, window.moves_tried, target);
    translation_scale_ =
        adapt(translation_scale_, window.translations_accepted, window.translations_tried, target);
  }

  std::span<const double> positions() const { return x_; }

private:
  const PotentialModel& model_;
  std::size_t n_;
  double bead_beta_;
  double spring_;  // m N / (2 beta hbar^2)
  double bead_scale_;
  double translation_scale_;
  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<double> trial_;
};

// Normal-mode moves with mode 0 pinned to sqrt(N) q_c.
class ConstrainedChain {
public:
  ConstrainedChain(const PotentialModel& model, const ThermoParams& thermo, double scale, double q_c)
      : model_(model),
        n_(static_cast<std::size_t>(thermo.n_beads)),
        bead_beta_(thermo.bead_beta()),
        q_c_(q_c),
        mode_scale_(scale),
        x_(n_, q_c),
        v_(n_, model.value(q_c)),
        trial_x_(n_),
        trial_v_(n_),
        modes_(n_ * n_),
        stiffness_(n_, 0.0),
        width_(n_, 0.0) {
    const auto freqs = free_rp_frequencies(thermo, model);
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k) modes_[k * n_ + j] = NormalModeTransform::mode_vector(n_, j, k);
    for (std::size_t k = 1; k < n_; ++k) {
      // Free-ring action of mode k: (beta/N) m w_k^2 a_k^2 / 2.
      stiffness_[k] = bead_beta_ * model.mass() * freqs[k] * freqs[k];
      width_[k] = 1.0 / std::sqrt(stiffness_[k]);
    }
  }

  void sweep(RandomStream& rng, ChainCounters& c) {
    for (std::size_t k = 1; k < n_; ++k) {
      const double* vec = &modes_[k * n_];
      const double delta = mode_scale_ * width_[k] * (2.0 * rng.uniform() - 1.0);
      double amplitude = 0.0;
      for (std::size_t j = 0; j < n_; ++j) amplitude += vec[j] * x_[j];
      double d_v = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        trial_x_[j] = x_[j] + delta * vec[j];
        trial_v_[j] = model_.value(trial_x_[j]);
        d_v += trial_v_[j] - v_[j];
      }
      const double d_spring = 0.5 * stiffness_[k] * ((amplitude + delta) * (amplitude + delta) - amplitude * amplitude);
      ++c.moves_tried;
      if (metropolis_accept(bead_beta_ * d_v + d_spring, rng)) {
        x_.swap(trial_x_);
        v_.swap(trial_v_);
        ++c.moves_accepted;
      }
    }
    repin();
  }

  void adapt_scales(const ChainCounters& window, double target) {
    mode_scale_ = adapt(mode_scale_, window.moves_accepted, window.moves_tried, target);
  }

  std::span<const double> positions() const { return x_; }

private:
  // Removes round-off drift of the centroid accumulated by mode moves.
  void repin() {
    const double drift = centroid_position(x_) - q_c_;
    if (drift == 0.0) return;
    for (std::size_t j = 0; j < n_; ++j) {
      x_[j] -= drift;
      v_[j] = model_.value(x_[j]);
    }
  }

  const PotentialModel& model_;
  std::size_t n_;
  double bead_beta_;
  double q_c_;
  double mode_scale_;
  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<double> trial_x_;
  std::vector<double> trial_v_;
  std::vector<double> modes_;  // modes_[k * n + j]
  std::vector<double> stiffness_;
  std::vector<double> width_;
};

template <class Chain, class MakeChain>
SamplerDiagnostics run_chains(const SamplerConfig& cfg, const MakeChain& make_chain,
                              const SampleVisitor& visit, const Parallelism& par) {
  cfg.validate();
  const std::size_t n_chains = std::min(cfg.n_chains, cfg.n_samples);
  const auto bounds = block_bounds(cfg.n_samples, n_chains);
  std::vector<ChainCounters> production(n_chains);

  parallel_for(n_chains, par, [&](std::size_t chain_index) {
    RandomStream rng(cfg.seed, StreamTag::ChainMoves, chain_index);
    Chain chain = make_chain();
    ChainCounters window;
    for (std::size_t s = 0; s < cfg.burn_in; ++s) {
      chain.sweep(rng, window);
      if ((s + 1) % kAdaptInterval == 0) {
        chain.adapt_scales(window, cfg.target_acceptance);
        window = {};
      }
    }
    ChainCounters& counters = production[chain_index];
    for (std::size_t i = bounds[chain_index]; i < bounds[chain_index + 1]; ++i) {
      for (std::size_t s = 0; s < cfg.decorrelation_stride; ++s) chain.sweep(rng, counters);
      visit(i, chain.positions());
    }
  });

  ChainCounters total;
  for (const auto& c : production) {
    total.moves_tried += c.moves_tried;
    total.moves_accepted += c.moves_accepted;
    total.translations_tried += c.translations_tried;
    total.translations_accepted += c.translations_accepted;
  }
  SamplerDiagnostics diag;
  auto rate = [](std::size_t a, std::size_t t) {
    return t == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(t);
  };
  diag.move_acceptance = rate(total.moves_accepted, total.moves_tried);
  diag.translation_acceptance = rate(total.translations_accepted, total.translations_tried);
  auto check = [&](double r, std::size_t tried, const char* what) {
    if (tried > 0 && (r < 0.05 || r > 0.95))
      diag.warnings.push_back({"NonErgodicWarning", std::string(what) + " acceptance rate " +
                                                        std::to_string(r) + " outside [0.05, 0.95]"});
  };
  check(diag.move_acceptance, total.moves_tried, "move");
  check(diag.translation_acceptance, total.translations_tried, "translation");
  return diag;
}

void check_model_bounded(const PotentialModel& model) {
  // All supported kinds are validated bounded below at construction; this
  // guards against future kinds.
  if (!std::isfinite(model.value(1e3))) throw ValidationError("potential is not finite on the sampled support");
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_samples == 0) throw ValidationError("n_samples must be > 0");
  if (decorrelation_stride == 0) throw ValidationError("decorrelation_stride must be > 0");
  if (!(move_scale > 0.0) || !std::isfinite(move_scale)) throw ValidationError("move_scale must be > 0");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw ValidationError("target_acceptance must lie in (0, 1)");
  if (n_chains == 0) throw ValidationError("n_chains must be > 0");
  if (n_blocks < 2) throw ValidationError("blocks must be >= 2");
}

Ensemble::Ensemble(std::size_t n_beads, std::size_t n_samples, ThermoParams thermo, double mass,
                   std::uint64_t seed)
    : n_beads_(n_beads),
      n_samples_(n_samples),
      thermo_(thermo),
      mass_(mass),
      seed_(seed),
      data_(n_beads * n_samples, 0.0) {}

SamplerDiagnostics visit_ring_samples(const PotentialModel& model, const ThermoParams& thermo,
                                      const SamplerConfig& cfg, const SampleVisitor& visit,
                                      const Parallelism& par) {
  thermo.validate();
  check_model_bounded(model);
  return run_chains<FreeChain>(
      cfg, [&] { return FreeChain(model, thermo, cfg.move_scale); }, visit, par);
}

SamplerDiagnostics visit_constrained_ring_samples(const PotentialModel& model,
                                                  const ThermoParams& thermo, const SamplerConfig& cfg,
                                                  double q_c, const SampleVisitor& visit,
                                                  const Parallelism& par) {
  thermo.validate();
  check_model_bounded(model);
  if (!std::isfinite(q_c)) throw ValidationError("non-finite centroid constraint");
  return run_chains<ConstrainedChain>(
      cfg, [&] { return ConstrainedChain(model, thermo, cfg.move_scale, q_c); }, visit, par);
}

Ensemble sample_ring_positions(const PotentialModel& model, const ThermoParams& thermo,
                               const SamplerConfig& cfg, const Parallelism& par) {
  thermo.validate();
  Ensemble ensemble(static_cast<std::size_t>(thermo.n_beads), cfg.n_samples, thermo, model.mass(),
                    cfg.seed);
  ensemble.n_blocks = cfg.n_blocks;
  ensemble.diagnostics = visit_ring_samples(
      model, thermo, cfg,
      [&](std::size_t i, std::span<const double> x) { std::ranges::copy(x, ensemble.sample(i).begin()); },
      par);
  return ensemble;
}

Ensemble sample_ring_positions_constrained(const PotentialModel& model, const ThermoParams& thermo,
                                           const SamplerConfig& cfg, double q_c,
                                           const Parallelism& par) {
  thermo.validate();
  Ensemble ensemble(static_cast<std::size_t>(thermo.n_beads), cfg.n_samples, thermo, model.mass(),
                    cfg.seed);
  ensemble.n_blocks = cfg.n_blocks;
  ensemble.diagnostics = visit_constrained_ring_samples(
      model, thermo, cfg, q_c,
      [&](std::size_t i, std::span<const double> x) { std::ranges::copy(x, ensemble.sample(i).begin()); },
      par);
  return ensemble;
}

namespace {

std::vector<double> draw_with_mass(const ThermoParams& thermo, double mass, RandomStream& rng,
                                   MomentumConvention convention) {
  thermo.validate();
  const auto n = static_cast<std::size_t>(thermo.n_beads);
  const double sigma = std::sqrt(mass * thermo.n_beads / thermo.beta);
  std::vector<double> p(n);
  for (auto& v : p) v = sigma * rng.normal();
  if (convention == MomentumConvention::BondMidpoint) {
    std::vector<double> mid(n);
    for (std::size_t k = 0; k < n; ++k) mid[k] = 0.5 * (p[k] + p[(k + 1) % n]);
    return mid;
  }
  return p;
}

}  // namespace

std::vector<double> draw_momenta(const ThermoParams& thermo, const PotentialModel& model,
                                 RandomStream& rng, MomentumConvention convention) {
  return draw_with_mass(thermo, model.mass(), rng, convention);
}

std::vector<double> draw_momenta(const ThermoParams& thermo, const PotentialModel& model,
                                 std::uint64_t seed, std::size_t index, MomentumConvention convention) {
  RandomStream rng(seed, StreamTag::Momenta, index);
  return draw_with_mass(thermo, model.mass(), rng, convention);
}

MeanWithError estimate_static_average(const Observable& obs, const Ensemble& ensemble,
                                      std::size_t n_blocks) {
  if (ensemble.size() == 0) throw InsufficientSamples("empty ensemble");
  std::vector<double> values(ensemble.size());
  if (obs.is_momentum()) {
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
      RandomStream rng(ensemble.seed(), StreamTag::Momenta, i);
      values[i] = centroid_position(
          draw_with_mass(ensemble.thermo(), ensemble.mass(), rng, MomentumConvention::Bead));
    }
  } else {
    for (std::size_t i = 0; i < ensemble.size(); ++i) values[i] = centroid_observable(obs, ensemble[i]);
  }
  return block_average(values, n_blocks);
}

VirialCvSample virial_cv_sample(const Observable& obs, std::span<const double> positions,
                                const PotentialModel& model, const ThermoParams& thermo) {
  double grad_sum = 0.0;
  for (double x : positions) grad_sum += model.gradient(x);
  const double x0 = centroid_position(positions);
  return {centroid_observable(obs, positions), x0 * thermo.bead_beta() * grad_sum - 1.0};
}

MeanWithError virial_cv_average(std::span<const VirialCvSample> samples, std::size_t n_blocks) {
  const std::size_t n = samples.size();
  if (n < 2 * n_blocks) throw InsufficientSamples("control-variate average needs at least 2 samples per block");
  std::vector<double> f(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = samples[i].value;
    y[i] = samples[i].control;
  }
  const double f_mean = pairwise_sum(f) / static_cast<double>(n);
  const double y_mean = pairwise_sum(y) / static_cast<double>(n);
  CompensatedSum cov;
  CompensatedSum var;
  for (std::size_t i = 0; i < n; ++i) {
    cov.add((f[i] - f_mean) * (y[i] - y_mean));
    var.add((y[i] - y_mean) * (y[i] - y_mean));
  }
  const double coeff = var.value() > 0.0 ? cov.value() / var.value() : 0.0;
  std::vector<double> adjusted(n);
  for (std::size_t i = 0; i < n; ++i) adjusted[i] = f[i] - coeff * y[i];
  return block_average(adjusted, n_blocks);
}

MeanWithError estimate_static_average_virial_cv(const Observable& obs, const Ensemble& ensemble,
                                                const PotentialModel& model, std::size_t n_blocks) {
  if (!obs.is_position()) throw UnsupportedObservable("virial control variate needs a position observable");
  std::vector<VirialCvSample> samples(ensemble.size());
  for (std::size_t i = 0; i < ensemble.size(); ++i)
    samples[i] = virial_cv_sample(obs, ensemble[i], model, ensemble.thermo());
  return virial_cv_average(samples, n_blocks);
}

}  // namespace pimd_kubo
