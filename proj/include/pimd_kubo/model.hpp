#pragma once

#include <string>
#include <string_view>

namespace pimd_kubo {

enum class PotentialKind { Harmonic, MildlyAnharmonic, Quartic };

std::string_view to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(std::string_view name);

// One-dimensional potential energy model.
//
//   Harmonic:          V = m w^2 q^2 / 2
//   MildlyAnharmonic:  V = m w^2 q^2 / 2 + c3 q^3 + c4 q^4
//   Quartic:           V = a4 q^4 / 4
//
// Parameters not used by a kind are ignored. Instances are immutable once
// validated; use the named constructors.
class PotentialModel {
public:
  static PotentialModel harmonic(double mass, double omega);
  static PotentialModel mildly_anharmonic(double mass, double omega, double c3, double c4);
  static PotentialModel quartic(double mass, double a4);

  PotentialKind kind() const { return kind_; }
  double mass() const { return mass_; }
  double omega() const { return omega_; }
  double c3() const { return c3_; }
  double c4() const { return c4_; }
  double a4() const { return a4_; }

  // True when V(q) = V(-q).
  bool is_symmetric() const;

  // sqrt(V''(0)/m); zero for the pure quartic.
  double small_oscillation_frequency() const;

  double value(double q) const;
  double gradient(double q) const;

private:
  PotentialModel(PotentialKind kind, double mass, double omega, double c3, double c4, double a4);

  PotentialKind kind_;
  double mass_;
  double omega_;
  double c3_;
  double c4_;
  double a4_;
};

// Inverse temperature, Trotter number and Planck constant.
struct ThermoParams {
  double beta = 1.0;
  int n_beads = 1;
  double hbar = 1.0;

  // Throws ValidationError when an invariant is violated.
  void validate() const;

  // Ring-polymer spring frequency N / (beta hbar).
  double spring_frequency() const { return n_beads / (beta * hbar); }
  // Bead inverse temperature beta / N.
  double bead_beta() const { return beta / n_beads; }
};

double potential_eval(const PotentialModel& model, double q);
double potential_grad(const PotentialModel& model, double q);

// (V(q + eta/2) + V(q - eta/2)) / 2 - V(q)
double delta_v(const PotentialModel& model, double q, double eta);

}  // namespace pimd_kubo
