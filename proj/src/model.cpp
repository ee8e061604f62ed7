#include "pimd_kubo/model.hpp"

#include <cmath>
#include <string>

#include "pimd_kubo/errors.hpp"

namespace pimd_kubo {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ValidationError(std::string("non-finite ") + what);
}

}  // namespace

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::Harmonic: return "harmonic";
    case PotentialKind::MildlyAnharmonic: return "mildly_anharmonic";
    case PotentialKind::Quartic: return "quartic";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(std::string_view name) {
  if (name == "harmonic") return PotentialKind::Harmonic;
  if (name == "mildly_anharmonic") return PotentialKind::MildlyAnharmonic;
  if (name == "quartic") return PotentialKind::Quartic;
  throw ValidationError("unknown potential kind '" + std::string(name) + "'");
}

PotentialModel::PotentialModel(PotentialKind kind, double mass, double omega, double c3, double c4,
                               double a4)
    : kind_(kind), mass_(mass), omega_(omega), c3_(c3), c4_(c4), a4_(a4) {
  require_finite(mass, "mass");
  require_finite(omega, "omega");
  require_finite(c3, "c3");
  require_finite(c4, "c4");
  require_finite(a4, "a4");
  if (mass <= 0.0) throw ValidationError("mass must be > 0");
  switch (kind) {
    case PotentialKind::Harmonic:
      if (omega <= 0.0) throw ValidationError("omega must be > 0");
      break;
    case PotentialKind::MildlyAnharmonic:
      if (omega <= 0.0) throw ValidationError("omega must be > 0");
      if (c4 < 0.0) throw ValidationError("c4 must be >= 0");
      // With c4 == 0 a cubic term makes V unbounded below.
      if (c4 == 0.0 && c3 != 0.0)
        throw ValidationError("mildly_anharmonic with c3 != 0 needs c4 > 0 to be bounded below");
      break;
    case PotentialKind::Quartic:
      if (a4 <= 0.0) throw ValidationError("a4 must be > 0");
      break;
  }
}

PotentialModel PotentialModel::harmonic(double mass, double omega) {
  return {PotentialKind::Harmonic, mass, omega, 0.0, 0.0, 0.0};
}

PotentialModel PotentialModel::mildly_anharmonic(double mass, double omega, double c3, double c4) {
  return {PotentialKind::MildlyAnharmonic, mass, omega, c3, c4, 0.0};
}

PotentialModel PotentialModel::quartic(double mass, double a4) {
  return {PotentialKind::Quartic, mass, 0.0, 0.0, 0.0, a4};
}

bool PotentialModel::is_symmetric() const {
  return kind_ != PotentialKind::MildlyAnharmonic || c3_ == 0.0;
}

double PotentialModel::small_oscillation_frequency() const {
  return kind_ == PotentialKind::Quartic ? 0.0 : omega_;
}

double PotentialModel::value(double q) const {
  switch (kind_) {
    case PotentialKind::Harmonic: return 0.5 * mass_ * omega_ * omega_ * q * q;
    case PotentialKind::MildlyAnharmonic: {
      const double q2 = q * q;
      return 0.5 * mass_ * omega_ * omega_ * q2 + c3_ * q2 * q + c4_ * q2 * q2;
    }
    case PotentialKind::Quartic: {
      const double q2 = q * q;
      return 0.25 * a4_ * q2 * q2;
    }
  }
  return 0.0;
}

double PotentialModel::gradient(double q) const {
  switch (kind_) {
    case PotentialKind::Harmonic: return mass_ * omega_ * omega_ * q;
    case PotentialKind::MildlyAnharmonic:
      return mass_ * omega_ * omega_ * q + 3.0 * c3_ * q * q + 4.0 * c4_ * q * q * q;
    case PotentialKind::Quartic: return a4_ * q * q * q;
  }
  return 0.0;
}

void ThermoParams::validate() const {
  if (!std::isfinite(beta) || beta <= 0.0) throw ValidationError("beta must be finite and > 0");
  if (!std::isfinite(hbar) || hbar <= 0.0) throw ValidationError("hbar must be finite and > 0");
  if (n_beads < 1) throw ValidationError("n_beads must be >= 1");
}

double potential_eval(const PotentialModel& model, double q) {
  require_finite(q, "position");
  return model.value(q);
}

double potential_grad(const PotentialModel& model, double q) {
  require_finite(q, "position");
  return model.gradient(q);
}

double delta_v(const PotentialModel& model, double q, double eta) {
  require_finite(q, "position");
  require_finite(eta, "eta");
  return 0.5 * (model.value(q + 0.5 * eta) + model.value(q - 0.5 * eta)) - model.value(q);
}

}  // namespace pimd_kubo
