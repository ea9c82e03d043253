#include "bifl/convexity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "bifl/errors.hpp"

namespace bifl {

namespace {

using Vector6 = Eigen::Matrix<double, 6, 1>;

FieldPoint from_vector(const Vector6& x) {
  return {{x[0], x[1], x[2]}, {x[3], x[4], x[5]}};
}

Hessian6 central_hessian(const Vector6& x, const Vector6& step, const ModelParams& m) {
  auto f = [&](const Vector6& y) { return energy_density(from_vector(y), m); };
  Hessian6 h;
  const double f0 = f(x);
  for (int i = 0; i < 6; ++i) {
    Vector6 xp = x;
    Vector6 xm = x;
    xp[i] += step[i];
    xm[i] -= step[i];
    h(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (step[i] * step[i]);
    for (int j = i + 1; j < 6; ++j) {
      Vector6 pp = xp;
      Vector6 pm = xp;
      Vector6 mp = xm;
      Vector6 mm = xm;
      pp[j] += step[j];
      pm[j] -= step[j];
      mp[j] += step[j];
      mm[j] -= step[j];
      h(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step[i] * step[j]);
      h(j, i) = h(i, j);
    }
  }
  return h;
}

}  // namespace

Hessian6 energy_hessian(const FieldPoint& p, const ModelParams& m) {
  Vector6 x;
  x << p.B.x, p.B.y, p.B.z, p.D.x, p.D.y, p.D.z;
  Vector6 step;
  for (int i = 0; i < 6; ++i) step[i] = 1e-4 * std::max(1.0, std::abs(x[i]));
  const Hessian6 fine = central_hessian(x, step, m);
  const Hessian6 coarse = central_hessian(x, 2.0 * step, m);
  const Hessian6 h = (4.0 * fine - coarse) / 3.0;
  return 0.5 * (h + h.transpose());
}

SpectrumReport eigen_signature(const Hessian6& h, double zero_tol) {
  const Hessian6 sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Hessian6> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("symmetric eigensolve did not converge");
  }
  SpectrumReport report;
  const auto& ev = solver.eigenvalues();
  double max_abs = 0.0;
  for (int i = 0; i < 6; ++i) {
    report.eigenvalues[static_cast<size_t>(i)] = ev[i];
    max_abs = std::max(max_abs, std::abs(ev[i]));
  }
  std::sort(report.eigenvalues.begin(), report.eigenvalues.end());
  report.zero_tol = zero_tol < 0.0 ? 1e-6 * max_abs : zero_tol;
  for (double lambda : report.eigenvalues) {
    if (std::abs(lambda) <= report.zero_tol) {
      ++report.n_zero;
    } else if (lambda > 0.0) {
      ++report.n_pos;
    } else {
      ++report.n_neg;
    }
  }
  return report;
}

std::string signature_string(const SpectrumReport& s) {
  return std::to_string(s.n_pos) + "+ " + std::to_string(s.n_neg) + "− " +
         std::to_string(s.n_zero) + "z";
}

// Dual integrand F(E) = b^2 (sqrt(R) - 1) + D.E with R = 1 + |B|^2/b^2 - E^T M E / b^2.
// MBI: M = I + B B^T / b^2.  MB: R = (1 + |B|^2/b^2)(1 - |E|^2/b^2), M = (1 + |B|^2/b^2) I.
LegendreResult legendre_maximize(const FieldPoint& p, const ModelParams& m) {
  using Vector3 = Eigen::Vector3d;
  using Matrix3 = Eigen::Matrix3d;
  const double b2 = m.b * m.b;
  const Vector3 Bv(p.B.x, p.B.y, p.B.z);
  const Vector3 Dv(p.D.x, p.D.y, p.D.z);
  Matrix3 M = Matrix3::Identity();
  if (m.model == Model::MBI) {
    M += Bv * Bv.transpose() / b2;
  } else {
    M *= 1.0 + Bv.squaredNorm() / b2;
  }
  const double bb = Bv.squaredNorm() / b2;
  auto radicand_minus_one = [&](const Vector3& E) { return bb - E.dot(M * E) / b2; };
  auto radicand = [&](const Vector3& E) { return 1.0 + radicand_minus_one(E); };
  auto objective = [&](const Vector3& E) {
    const double Rm1 = radicand_minus_one(E);
    // b^2 (sqrt(R) - 1) written to avoid cancellation when R is near 1.
    return b2 * Rm1 / (std::sqrt(1.0 + Rm1) + 1.0) + Dv.dot(E);
  };

  constexpr double kMinRadicand = 1e-12;
  Vector3 E = Dv / std::sqrt(1.0 + Dv.squaredNorm() / b2);
  LegendreResult result;
  for (int it = 0; it < 200; ++it) {
    const double R = radicand(E);
    const double sR = std::sqrt(R);
    const Vector3 ME = M * E;
    const Vector3 grad = Dv - ME / sR;
    if (grad.norm() <= 1e-15 * std::max(1.0, Dv.norm())) break;
    const Matrix3 hess = -M / sR - ME * ME.transpose() / (b2 * R * sR);
    const Vector3 dir = hess.ldlt().solve(-grad);
    const double f0 = objective(E);
    double alpha = 1.0;
    Vector3 trial = E + dir;
    for (int k = 0; k < 60; ++k) {
      trial = E + alpha * dir;
      if (radicand(trial) > kMinRadicand && objective(trial) >= f0 - 1e-15 * std::abs(f0)) break;
      alpha *= 0.5;
    }
    const double step = (trial - E).norm();
    E = trial;
    result.iterations = it + 1;
    if (step <= 1e-16 * std::max(1.0, E.norm())) break;
  }
  if (!(radicand(E) > 0.0)) {
    throw InvariantError("Legendre maximizer left the feasible set");
  }
  result.value = objective(E) / kFourPi;
  result.maximizer = {E[0], E[1], E[2]};
  return result;
}

double legendre_pointwise(const FieldPoint& p, const ModelParams& m) {
  return legendre_maximize(p, m).value;
}

namespace {

void require_mb(const ModelParams& m, const char* what) {
  if (m.model != Model::MB) {
    throw ModelError(std::string(what) + " is only defined for the MB model");
  }
}

}  // namespace

double line_second_derivative(const FieldPoint& p0, const FieldPoint& p1, double lambda,
                              const ModelParams& m) {
  require_mb(m, "line_second_derivative");
  const double b2 = m.b * m.b;
  const Vec3 B = lambda * p1.B + (1.0 - lambda) * p0.B;
  const Vec3 D = lambda * p1.D + (1.0 - lambda) * p0.D;
  const Vec3 dB = p1.B - p0.B;
  const Vec3 dD = p1.D - p0.D;
  const double S = std::sqrt(1.0 + (norm2(B) + norm2(D)) / b2);
  const double proj = dot(B, dB) + dot(D, dD);
  return (norm2(dB) + norm2(dD)) / S - proj * proj / (b2 * S * S * S);
}

double theorem4_bilinear_density(const FieldPoint& p0, const FieldPoint& p1,
                                 const ModelParams& m) {
  require_mb(m, "theorem4_bilinear_density");
  const AuxPoint a0 = aux_of_bd(p0, m);
  const AuxPoint a1 = aux_of_bd(p1, m);
  return dot(p1.B - p0.B, a1.H - a0.H) + dot(a1.E - a0.E, p1.D - p0.D);
}

}  // namespace bifl
