#include "identities.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "bifl/convexity.hpp"
#include "bifl/fields.hpp"

namespace bifl::cli {

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::vector<IdentityCheck> run_identity_suite(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  constexpr std::array<double, 3> kB = {0.5, 1.0, 2.0};

  auto draw_model = [&](Model model) {
    ModelParams m;
    m.b = kB[static_cast<std::size_t>(pick(rng))];
    m.model = model;
    return m;
  };
  auto draw_point = [&](double b) {
    auto v = [&] { return Vec3{3 * b * unit(rng), 3 * b * unit(rng), 3 * b * unit(rng)}; };
    const Vec3 B = v();
    const Vec3 D = v();
    return FieldPoint{B, D};
  };
  // B and D uniform in the ball of radius b. The line integrand has complex
  // singularities at distance ~ b/|p1 - p0| from the real axis, so a fixed
  // 16-node rule is only accurate on that scale.
  auto draw_ball_point = [&](double b) {
    auto v = [&] {
      Vec3 w;
      do {
        w = {unit(rng), unit(rng), unit(rng)};
      } while (norm2(w) > 1.0);
      return b * w;
    };
    const Vec3 B = v();
    const Vec3 D = v();
    return FieldPoint{B, D};
  };

  IdentityCheck legendre{"legendre_duality", 0.0, 1e-9, false};
  IdentityCheck bh{"bh_dot_closed_form", 0.0, 1e-12, false};
  IdentityCheck ed{"ed_dot_closed_form", 0.0, 1e-12, false};
  IdentityCheck grad_e{"E_is_4pi_dU_dD", 0.0, 1e-6, false};
  IdentityCheck grad_h{"H_is_4pi_dU_dB", 0.0, 1e-6, false};
  IdentityCheck scaling{"scaling_derivative", 0.0, 1e-6, false};
  IdentityCheck line_min{"mb_line_second_derivative_min", 0.0, 1e-12, false};
  IdentityCheck line_fd{"mb_line_second_derivative_fd", 0.0, 1e-6, false};
  IdentityCheck bilinear{"mb_bilinear_quadrature", 0.0, 1e-8, false};
  double min_second = INFINITY;

  for (int s = 0; s < samples; ++s) {
    for (Model model : {Model::MBI, Model::MB}) {
      const ModelParams m = draw_model(model);
      const FieldPoint p = draw_point(m.b);
      const double u = energy_density(p, m);
      legendre.max_deviation = std::max(legendre.max_deviation, rel(legendre_pointwise(p, m), u));
      const AuxPoint a = aux_of_bd(p, m);
      bh.max_deviation = std::max(bh.max_deviation, rel(bh_dot(p, m), dot(p.B, a.H)));
      ed.max_deviation = std::max(ed.max_deviation, rel(ed_dot(p, m), dot(a.E, p.D)));
      // Central differences of the energy along each coordinate.
      const double step = 1e-5 * m.b;
      double err_e = 0.0;
      double err_h = 0.0;
      for (int c = 0; c < 3; ++c) {
        FieldPoint dp = p;
        FieldPoint dm = p;
        dp.D[c] += step;
        dm.D[c] -= step;
        const double fd_e = kFourPi * (energy_density(dp, m) - energy_density(dm, m)) / (2 * step);
        err_e = std::max(err_e, std::abs(fd_e - a.E[c]) / std::max(norm(a.E), 1e-300));
        dp = p;
        dm = p;
        dp.B[c] += step;
        dm.B[c] -= step;
        const double fd_h = kFourPi * (energy_density(dp, m) - energy_density(dm, m)) / (2 * step);
        err_h = std::max(err_h, std::abs(fd_h - a.H[c]) / std::max(norm(a.H), 1e-300));
      }
      grad_e.max_deviation = std::max(grad_e.max_deviation, err_e);
      grad_h.max_deviation = std::max(grad_h.max_deviation, err_h);
      const double dl = 1e-5;
      const FieldPoint up{(1 + dl) * p.B, (1 + dl) * p.D};
      const FieldPoint dn{(1 - dl) * p.B, (1 - dl) * p.D};
      const double fd = (energy_density(up, m) - energy_density(dn, m)) / (2 * dl);
      scaling.max_deviation = std::max(scaling.max_deviation, rel(scaling_derivative_density(p, m), fd));
    }
    // Straight lines between MB field points.
    const ModelParams m = draw_model(Model::MB);
    const FieldPoint p0 = draw_ball_point(m.b);
    const FieldPoint p1 = draw_ball_point(m.b);
    const double l = lam(rng);
    const double second = line_second_derivative(p0, p1, l, m);
    min_second = std::min(min_second, second);
    auto first = [&](double x) {
      const FieldPoint px{x * p1.B + (1 - x) * p0.B, x * p1.D + (1 - x) * p0.D};
      const AuxPoint ax = aux_of_bd(px, m);
      return dot(ax.H, p1.B - p0.B) + dot(ax.E, p1.D - p0.D);
    };
    const double h = 1e-5;
    line_fd.max_deviation = std::max(line_fd.max_deviation, rel(second, (first(l + h) - first(l - h)) / (2 * h)));
    const double quad = boost::math::quadrature::gauss<double, 16>::integrate(
        [&](double x) { return line_second_derivative(p0, p1, x, m); }, 0.0, 1.0);
    bilinear.max_deviation = std::max(bilinear.max_deviation, rel(quad, theorem4_bilinear_density(p0, p1, m)));
  }
  line_min.max_deviation = std::max(0.0, -min_second);

  std::vector<IdentityCheck> out = {legendre, bh, ed, grad_e, grad_h, scaling, line_min, line_fd, bilinear};
  for (auto& c : out) c.pass = c.max_deviation <= c.threshold;
  return out;
}

}  // namespace bifl::cli
