#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pimd_kubo/errors.hpp"
#include "pimd_kubo/model.hpp"
#include "pimd_kubo/parallel.hpp"
#include "pimd_kubo/ringpoly.hpp"
#include "pimd_kubo/rng.hpp"
#include "pimd_kubo/stats.hpp"

namespace pimd_kubo {

// Metropolis sampling of the ring-polymer position density R(x).
//
// Samples are produced by n_chains independent chains; chain c owns a fixed
// contiguous range of sample indices and its own random stream, so the
// ensemble is a pure function of (model, thermo, config) whatever the number
// of workers.
struct SamplerConfig {
  std::size_t n_samples = 1000;
  std::size_t burn_in = 1000;            // sweeps per chain, proposal widths adapt here only
  std::size_t decorrelation_stride = 1;  // sweeps between stored samples
  double move_scale = 0.5;               // initial proposal width
  std::uint64_t seed = 1;
  double target_acceptance = 0.4;
  std::size_t n_chains = 16;
  std::size_t n_blocks = kDefaultBlocks;  // error blocks for estimators built on the ensemble

  void validate() const;
};

struct SamplerDiagnostics {
  double move_acceptance = 0.0;         // single-bead or normal-mode moves, after burn-in
  double translation_acceptance = 0.0;  // whole-ring moves (unconstrained sampler only)
  Warnings warnings;
};

// n_samples configurations of n_beads positions, stored contiguously.
class Ensemble {
public:
  Ensemble() = default;
  Ensemble(std::size_t n_beads, std::size_t n_samples, ThermoParams thermo, double mass,
           std::uint64_t seed);

  std::size_t size() const { return n_samples_; }
  std::size_t n_beads() const { return n_beads_; }
  const ThermoParams& thermo() const { return thermo_; }
  double mass() const { return mass_; }
  std::uint64_t seed() const { return seed_; }

  std::span<const double> operator[](std::size_t i) const {
    return {data_.data() + i * n_beads_, n_beads_};
  }
  std::span<double> sample(std::size_t i) { return {data_.data() + i * n_beads_, n_beads_}; }

  SamplerDiagnostics diagnostics;
  std::size_t n_blocks = kDefaultBlocks;

private:
  std::size_t n_beads_ = 0;
  std::size_t n_samples_ = 0;
  ThermoParams thermo_;
  double mass_ = 1.0;
  std::uint64_t seed_ = 0;
  std::vector<double> data_;
};

// Called once per stored sample, possibly concurrently for different indices.
using SampleVisitor = std::function<void(std::size_t sample_index, std::span<const double> positions)>;

SamplerDiagnostics visit_ring_samples(const PotentialModel& model, const ThermoParams& thermo,
                                      const SamplerConfig& cfg, const SampleVisitor& visit,
                                      const Parallelism& par = {});

// Centroid pinned at q_c: only non-zero normal modes move.
SamplerDiagnostics visit_constrained_ring_samples(const PotentialModel& model,
                                                  const ThermoParams& thermo, const SamplerConfig& cfg,
                                                  double q_c, const SampleVisitor& visit,
                                                  const Parallelism& par = {});

Ensemble sample_ring_positions(const PotentialModel& model, const ThermoParams& thermo,
                               const SamplerConfig& cfg, const Parallelism& par = {});

Ensemble sample_ring_positions_constrained(const PotentialModel& model, const ThermoParams& thermo,
                                           const SamplerConfig& cfg, double q_c,
                                           const Parallelism& par = {});

enum class MomentumConvention { Bead, BondMidpoint };

// i.i.d. Gaussian bead momenta with variance m N / beta. BondMidpoint returns
// (p_k + p_{k+1}) / 2 of such a draw.
std::vector<double> draw_momenta(const ThermoParams& thermo, const PotentialModel& model,
                                 RandomStream& rng, MomentumConvention convention);

// Momenta for trajectory / sample `index` under `seed`; the same draw is used
// by every estimator that pairs momenta with ensemble member `index`.
std::vector<double> draw_momenta(const ThermoParams& thermo, const PotentialModel& model,
                                 std::uint64_t seed, std::size_t index, MomentumConvention convention);

// Ensemble mean of the centroid observable (or centroid momentum) with a
// block-averaged standard error.
MeanWithError estimate_static_average(const Observable& obs, const Ensemble& ensemble,
                                      std::size_t n_blocks = kDefaultBlocks);

// Same quantity with the centroid-virial control variate
//   Y = x0 (beta / N) sum_k V'(x_k) - 1,   <Y> = 0 under R(x),
// which follows from translating the whole ring (springs are invariant).
// The regression coefficient is fitted on the ensemble.
MeanWithError estimate_static_average_virial_cv(const Observable& obs, const Ensemble& ensemble,
                                                const PotentialModel& model,
                                                std::size_t n_blocks = kDefaultBlocks);

// Per-sample value and control variate, for streaming use.
struct VirialCvSample {
  double value;
  double control;
};
VirialCvSample virial_cv_sample(const Observable& obs, std::span<const double> positions,
                                const PotentialModel& model, const ThermoParams& thermo);
MeanWithError virial_cv_average(std::span<const VirialCvSample> samples,
                                std::size_t n_blocks = kDefaultBlocks);

}  // namespace pimd_kubo
