#include "bifl/fields.hpp"

#include <cmath>
#include <string>

#include "bifl/errors.hpp"

namespace bifl {

std::string_view to_string(Model model) { return model == Model::MBI ? "MBI" : "MB"; }

Model parse_model(std::string_view name) {
  if (name == "MBI") return Model::MBI;
  if (name == "MB") return Model::MB;
  throw PreconditionError("unknown model '" + std::string(name) + "' (expected MBI or MB)");
}

void ModelParams::validate() const {
  if (!(std::isfinite(b) && b > 0.0)) throw PreconditionError("model.b must be positive");
  if (!(std::isfinite(c) && c > 0.0)) throw PreconditionError("model.c must be positive");
}

PointInvariants point_invariants(const FieldPoint& p, const ModelParams& m) {
  PointInvariants inv;
  inv.b2 = norm2(p.B);
  inv.d2 = norm2(p.D);
  inv.cross2 = m.model == Model::MBI ? norm2(cross(p.B, p.D)) : 0.0;
  const double ib2 = 1.0 / (m.b * m.b);
  inv.root = std::sqrt(1.0 + (inv.b2 + inv.d2) * ib2 + inv.cross2 * ib2 * ib2);
  return inv;
}

namespace {

// sqrt(1 + u) - 1 without cancellation for small u.
double sqrt1pm1(double u) { return u / (std::sqrt(1.0 + u) + 1.0); }

// (num - B x (B x D)/b^2) / root, with the cross term omitted for MB.
Vec3 constitutive(const Vec3& num, const Vec3& other, const PointInvariants& inv,
                  const ModelParams& m) {
  Vec3 out = num;
  if (m.model == Model::MBI) {
    // other x (other x num) = other (other.num) - num |other|^2
    const Vec3 dbl = other * dot(other, num) - num * norm2(other);
    out -= dbl / (m.b * m.b);
  }
  return out / inv.root;
}

}  // namespace

Vec3 e_of_bd(const FieldPoint& p, const ModelParams& m) {
  return constitutive(p.D, p.B, point_invariants(p, m), m);
}

Vec3 h_of_bd(const FieldPoint& p, const ModelParams& m) {
  return constitutive(p.B, p.D, point_invariants(p, m), m);
}

AuxPoint aux_of_bd(const FieldPoint& p, const ModelParams& m) {
  const PointInvariants inv = point_invariants(p, m);
  return {constitutive(p.D, p.B, inv, m), constitutive(p.B, p.D, inv, m)};
}

double energy_density(const FieldPoint& p, const ModelParams& m) {
  const PointInvariants inv = point_invariants(p, m);
  const double ib2 = 1.0 / (m.b * m.b);
  const double u = (inv.b2 + inv.d2) * ib2 + inv.cross2 * ib2 * ib2;
  return m.b * m.b / kFourPi * sqrt1pm1(u);
}

namespace {

// 1 - radicand, formed without cancellation.
double lagrangian_deficit(const Vec3& E, const Vec3& B, const ModelParams& m) {
  const double ib2 = 1.0 / (m.b * m.b);
  const double e2 = norm2(E) * ib2;
  const double bb = norm2(B) * ib2;
  if (m.model == Model::MB) return e2 - bb + bb * e2;
  const double eb = dot(E, B) * ib2;
  return e2 - bb + eb * eb;
}

}  // namespace

double lagrangian_radicand(const Vec3& E, const Vec3& B, const ModelParams& m) {
  return 1.0 - lagrangian_deficit(E, B, m);
}

double lagrangian_density(const Vec3& E, const Vec3& B, const ModelParams& m) {
  const double deficit = lagrangian_deficit(E, B, m);
  const double radicand = 1.0 - deficit;
  if (!(radicand >= 0.0)) {
    throw InfeasiblePointError("Lagrangian radicand is negative (|E| too large relative to b)");
  }
  // 1 - sqrt(R) = (1 - R) / (1 + sqrt(R))
  return m.b * m.b / kFourPi * deficit / (1.0 + std::sqrt(radicand));
}

double bh_dot(const FieldPoint& p, const ModelParams& m) {
  const PointInvariants inv = point_invariants(p, m);
  return (inv.b2 + inv.cross2 / (m.b * m.b)) / inv.root;
}

double ed_dot(const FieldPoint& p, const ModelParams& m) {
  const PointInvariants inv = point_invariants(p, m);
  return (inv.d2 + inv.cross2 / (m.b * m.b)) / inv.root;
}

double scaling_derivative_density(const FieldPoint& p, const ModelParams& m) {
  const PointInvariants inv = point_invariants(p, m);
  const double ib2 = 1.0 / (m.b * m.b);
  const double num = (inv.b2 + inv.d2) * ib2 + 2.0 * inv.cross2 * ib2 * ib2;
  return m.b * m.b / kFourPi * num / inv.root;
}

}  // namespace bifl
