#pragma once

// Pointwise algebra of Born-Infeld electrodynamics in Gaussian units.
//
// All maps take the canonical pair (B, D) and a ModelParams. The MBI model is
// the full Born-Infeld law; the MB model drops every B x D coupling term.

#include <numbers>
#include <string_view>

#include "bifl/vec3.hpp"

namespace bifl {

inline constexpr double kFourPi = 4.0 * std::numbers::pi;

enum class Model { MBI, MB };

std::string_view to_string(Model model);
/// Parses "MBI" or "MB"; throws PreconditionError otherwise.
Model parse_model(std::string_view name);

struct ModelParams {
  double b = 1.0;  ///< Born's field strength
  Model model = Model::MBI;
  double c = 1.0;  ///< vacuum speed of light

  /// Throws PreconditionError unless b > 0 and c > 0 (both finite).
  void validate() const;
};

struct FieldPoint {
  Vec3 B;
  Vec3 D;
};

struct AuxPoint {
  Vec3 E;
  Vec3 H;
};

/// Invariants of a FieldPoint that every constitutive formula shares.
struct PointInvariants {
  double b2 = 0.0;      ///< |B|^2
  double d2 = 0.0;      ///< |D|^2
  double cross2 = 0.0;  ///< |B x D|^2, zero for MB
  double root = 1.0;    ///< sqrt(1 + (|B|^2+|D|^2)/b^2 + |B x D|^2/b^4)
};

PointInvariants point_invariants(const FieldPoint& p, const ModelParams& m);

Vec3 e_of_bd(const FieldPoint& p, const ModelParams& m);
Vec3 h_of_bd(const FieldPoint& p, const ModelParams& m);
AuxPoint aux_of_bd(const FieldPoint& p, const ModelParams& m);

/// Field energy density (b^2/4pi)[sqrt(1 + ...) - 1]. Nonnegative.
double energy_density(const FieldPoint& p, const ModelParams& m);

/// Field part of the Lagrangian density as a function of (E, B).
///
/// MBI uses the radicand 1 - (|E|^2-|B|^2)/b^2 - (E.B)^2/b^4. MB uses the
/// Legendre dual of the MB energy, whose radicand is (1+|B|^2/b^2)(1-|E|^2/b^2).
/// Throws InfeasiblePointError when the radicand is negative.
double lagrangian_density(const Vec3& E, const Vec3& B, const ModelParams& m);

/// Radicand of lagrangian_density; negative means infeasible.
double lagrangian_radicand(const Vec3& E, const Vec3& B, const ModelParams& m);

/// B.H in closed form.
double bh_dot(const FieldPoint& p, const ModelParams& m);
/// E.D in closed form.
double ed_dot(const FieldPoint& p, const ModelParams& m);

/// d/dlambda of energy_density(lambda B, lambda D) at lambda = 1.
double scaling_derivative_density(const FieldPoint& p, const ModelParams& m);

}  // namespace bifl
