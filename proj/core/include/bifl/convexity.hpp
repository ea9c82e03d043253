#pragma once

// Second-order analysis of the energy density.

#include <array>

#include <Eigen/Core>

#include "bifl/fields.hpp"

namespace bifl {

/// Hessian of energy_density with respect to (B1, B2, B3, D1, D2, D3).
using Hessian6 = Eigen::Matrix<double, 6, 6>;

struct SpectrumReport {
  std::array<double, 6> eigenvalues{};  ///< ascending
  int n_pos = 0;
  int n_neg = 0;
  int n_zero = 0;
  double zero_tol = 0.0;
};

/// Nested central differences with one Richardson step, symmetrized.
Hessian6 energy_hessian(const FieldPoint& p, const ModelParams& m);

/// Symmetrizes, eigensolves and counts signs. A negative zero_tol selects
/// the default 1e-6 * max|lambda|. Throws ConvergenceError if the solver fails.
SpectrumReport eigen_signature(const Hessian6& h, double zero_tol = -1.0);

/// Renders the signature as "4+ 2\u2212 0z" (U+2212 minus sign).
std::string signature_string(const SpectrumReport& s);

struct LegendreResult {
  double value = 0.0;  ///< max over E of the dual integrand, divided by 4 pi
  Vec3 maximizer;
  int iterations = 0;
};

/// Maximizes b^2[sqrt(R(E,B)) - 1] + D.E over E by damped Newton, starting
/// from the closed-form B = 0 maximizer. The result equals energy_density.
LegendreResult legendre_maximize(const FieldPoint& p, const ModelParams& m);
double legendre_pointwise(const FieldPoint& p, const ModelParams& m);

/// Hdot.Bdot + Edot.Ddot at parameter lambda on the straight line between two
/// MB field points. Throws ModelError for MBI.
double line_second_derivative(const FieldPoint& p0, const FieldPoint& p1, double lambda,
                              const ModelParams& m);

/// (B1-B0).(H1-H0) + (E1-E0).(D1-D0) with MB constitutive fields.
/// Throws ModelError for MBI.
double theorem4_bilinear_density(const FieldPoint& p0, const FieldPoint& p1,
                                 const ModelParams& m);

}  // namespace bifl
