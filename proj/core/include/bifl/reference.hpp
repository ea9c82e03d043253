#pragma once

// Exact electrostatic field of a single Born-Infeld point charge.

namespace bifl {

struct PointChargeSolution {
  double q = 1.0;
  double b = 1.0;

  /// Throws PreconditionError unless q != 0 and b > 0.
  void validate() const;
  /// Radius at which |D| = b.
  double r0() const;
};

/// |D| = q / r^2 (signed radial component). Throws PreconditionError for r <= 0.
double born_D(double r, const PointChargeSolution& sol);

/// Radial E = q / sqrt(r^4 + q^2/b^2); |E(0)| = b.
double born_E(double r, const PointChargeSolution& sol);

/// phi(r) = integral of born_E from r to infinity. Throws ConvergenceError if
/// the adaptive quadrature misses its tolerance.
double born_potential(double r, const PointChargeSolution& sol);

/// phi(0) / sqrt(|q| b): Gamma(1/4)^2 / (4 sqrt(pi)) in exact arithmetic.
double born_potential_constant();

/// Total field energy b^2 int_0^inf [sqrt(1 + q^2/(b^2 s^4)) - 1] s^2 ds.
double born_field_energy(const PointChargeSolution& sol);

/// Field energy in the spherical shell r_inner <= r <= r_outer.
double born_shell_energy(const PointChargeSolution& sol, double r_inner, double r_outer);

}  // namespace bifl
