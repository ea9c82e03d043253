#include "bifl/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bifl/errors.hpp"

namespace bifl {

namespace {

constexpr double kAbsTol = 1e-12;
constexpr unsigned kMaxDepth = 15;
constexpr double kRelTol = 1e-14;

template <typename F>
double integrate(F f, double a, double b, const char* what) {
  if (b <= a) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double err = 0.0;
  double l1 = 0.0;
  // A relative target below the per-panel round-off floor (~1e-15 absolute)
  // would force bisection to full depth, so cap it at a tenth of kAbsTol.
  (void)GK::integrate(f, a, b, 0, kRelTol, &err, &l1);
  const double rel = l1 > 0.0 ? std::clamp(0.1 * kAbsTol / l1, kRelTol, 1e-8) : kRelTol;
  const double value = GK::integrate(f, a, b, kMaxDepth, rel, &err, &l1);
  if (!(err <= std::max(kAbsTol, 10 * kRelTol * l1)) || !std::isfinite(value)) {
    std::ostringstream os;
    os << what << ": quadrature error estimate " << err << " above tolerance on [" << a << ", " << b << "]";
    throw ConvergenceError(os.str());
  }
  return value;
}

}  // namespace

void PointChargeSolution::validate() const {
  if (!(q != 0.0 && std::isfinite(q))) throw PreconditionError("point charge q must be nonzero");
  if (!(b > 0.0 && std::isfinite(b))) throw PreconditionError("Born constant b must be positive");
}

double PointChargeSolution::r0() const { return std::sqrt(std::abs(q) / b); }

double born_D(double r, const PointChargeSolution& sol) {
  if (!(r > 0.0)) throw PreconditionError("born_D requires r > 0");
  return sol.q / (r * r);
}

double born_E(double r, const PointChargeSolution& sol) {
  if (r < 0.0) throw PreconditionError("born_E requires r >= 0");
  const double qb = sol.q / sol.b;
  return sol.q / std::sqrt(r * r * r * r + qb * qb);
}

double born_potential(double r, const PointChargeSolution& sol) {
  sol.validate();
  if (r < 0.0) throw PreconditionError("born_potential requires r >= 0");
  const double r0 = sol.r0();
  const double c = sol.q / sol.b;
  // Near part directly in r; far part with x = 1/s, where the integrand
  // q / sqrt(1 + c^2 x^4) is smooth on [0, 1/max(r, r0)].
  const double split = std::max(r, r0);
  const double near = integrate([&](double s) { return born_E(s, sol); }, r, split, "born_potential");
  const double far = integrate([&](double x) { return sol.q / std::sqrt(1.0 + c * c * x * x * x * x); },
                               0.0, 1.0 / split, "born_potential");
  return near + far;
}

double born_potential_constant() {
  return born_potential(0.0, PointChargeSolution{1.0, 1.0});
}

double born_shell_energy(const PointChargeSolution& sol, double r_inner, double r_outer) {
  sol.validate();
  if (r_inner < 0.0 || r_outer < r_inner) throw PreconditionError("invalid shell radii");
  const double b2 = sol.b * sol.b;
  const double c = sol.q / sol.b;
  const double r0 = sol.r0();
  // b^2 [sqrt(s^4 + c^2) - s^2] is regular at s = 0.
  auto near = [&](double s) {
    const double s2 = s * s;
    return b2 * c * c / (std::sqrt(s2 * s2 + c * c) + s2);
  };
  // x = 1/s: b^2 [sqrt(1 + c^2 x^4) - 1] / x^4, regular at x = 0.
  auto far = [&](double x) {
    const double x2 = x * x;
    return b2 * c * c / (std::sqrt(1.0 + c * c * x2 * x2) + 1.0);
  };
  double total = 0.0;
  const double a = r_inner;
  const double mid = std::clamp(r0, r_inner, r_outer);
  total += integrate(near, a, mid, "born_field_energy");
  if (std::isinf(r_outer)) {
    total += integrate(far, 0.0, 1.0 / mid, "born_field_energy");
  } else if (r_outer > mid) {
    total += integrate(far, 1.0 / r_outer, 1.0 / mid, "born_field_energy");
  }
  return total;
}

double born_field_energy(const PointChargeSolution& sol) {
  return born_shell_energy(sol, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace bifl
