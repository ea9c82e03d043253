#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "bifl/errors.hpp"
#include "bifl/solvers.hpp"
#include "bifl/spectral_poisson.hpp"

namespace bifl {

namespace {

constexpr int kMaxOrder = 2;

// Power series in eps = 1/b^2, truncated after `order`.
struct Series {
  std::array<double, kMaxOrder + 1> c{};
  int order = 0;

  double at(double eps) const {
    double v = 0.0;
    for (int k = order; k >= 0; --k) v = v * eps + c[static_cast<std::size_t>(k)];
    return v;
  }
};

Series mul(const Series& a, const Series& b) {
  Series r;
  r.order = std::min(a.order, b.order);
  for (int i = 0; i <= r.order; ++i)
    for (int j = 0; i + j <= r.order; ++j)
      r.c[static_cast<std::size_t>(i + j)] += a.c[static_cast<std::size_t>(i)] * b.c[static_cast<std::size_t>(j)];
  return r;
}

// a^{-1/2} for a series with a.c[0] = 1.
Series rsqrt_unit(const Series& a) {
  Series u = a;
  u.c[0] = 0.0;
  Series r;
  r.order = a.order;
  Series power;
  power.order = a.order;
  power.c[0] = 1.0;
  double binom = 1.0;  // binomial(-1/2, k)
  for (int k = 0; k <= a.order; ++k) {
    for (int i = 0; i <= r.order; ++i) r.c[static_cast<std::size_t>(i)] += binom * power.c[static_cast<std::size_t>(i)];
    power = mul(power, u);
    binom *= (-0.5 - k) / (k + 1);
  }
  return r;
}

Series linear(double c0, double c1, int order) {
  Series s;
  s.order = order;
  s.c[0] = c0;
  if (order >= 1) s.c[1] = c1;
  return s;
}

// Cell partials minus their linear-theory values, with every coefficient
// expanded in eps and truncated after `order`.
CellPartials truncated_remainder(const CellInvariants& c, const ModelParams& m, int order) {
  const double eps = 1.0 / (m.b * m.b);
  const double k = 1.0 / (2.0 * kFourPi);
  Series R;
  R.order = order;
  R.c[0] = 1.0;
  Series f_e2;
  Series f_b2;
  Series f_s;
  if (m.model == Model::MBI) {
    if (order >= 1) R.c[1] = c.b2 - c.e2;
    if (order >= 2) R.c[2] = -c.s * c.s;
    const Series r = rsqrt_unit(R);
    f_e2 = r;
    f_b2 = r;
    // eps s R^{-1/2}: shift by one power.
    f_s.order = order;
    for (int i = 1; i <= order; ++i) f_s.c[static_cast<std::size_t>(i)] = r.c[static_cast<std::size_t>(i - 1)];
    return {k * (f_e2.at(eps) - 1.0), -k * (f_b2.at(eps) - 1.0), 2.0 * k * c.s * f_s.at(eps)};
  }
  R = mul(linear(1.0, c.b2, order), linear(1.0, -c.e2, order));
  const Series r = rsqrt_unit(R);
  f_e2 = mul(linear(1.0, c.b2, order), r);
  f_b2 = mul(linear(1.0, -c.e2, order), r);
  return {k * (f_e2.at(eps) - 1.0), -k * (f_b2.at(eps) - 1.0), 0.0};
}

double max_difference(const EdgeField& a, const EdgeField& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto va = a.c[c].values();
    const auto vb = b.c[c].values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  }
  return m;
}

double max_difference(const FaceField& a, const FaceField& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto va = a.c[c].values();
    const auto vb = b.c[c].values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
  }
  return m;
}

}  // namespace

PerturbativeResult perturbative_series(const SourceSpec& src, const GridSpec& g, const ModelParams& m, int order) {
  if (order < 0 || order > kMaxOrder) throw PreconditionError("perturb.order must be 0, 1 or 2");
  m.validate();
  const DepositedSources dep = deposit_sources(src, g, m.c);
  require_divergence_free(dep);
  SpectralPoisson poisson(g);
  const double h3 = g.cell_volume();
  const double s = kFourPi / h3;

  Potentials x = Potentials::zeros(g);
  Array3 rhs_phi(placement_dims(Placement::Node, g.n));
  EdgeField rhs_A = EdgeField::zeros(g);
  EdgeField NE = EdgeField::zeros(g);
  FaceField NB = FaceField::zeros(g);
  EdgeField E = EdgeField::zeros(g);
  FaceField B = FaceField::zeros(g);
  Array3 divN(placement_dims(Placement::Node, g.n));
  EdgeField curlN = EdgeField::zeros(g);

  auto fields_of = [&](const Potentials& p, EdgeField& e, FaceField& b) {
    grad_into(g, p.phi.values, e);
    for (auto& a : e.c)
      for (double& v : a.values()) v = -v;
    curl_e2f_into(g, p.A, b);
  };

  PerturbativeResult out{FieldState::zeros(g), Potentials::zeros(g), EdgeField::zeros(g), {}, 0.0};
  for (int k = 0; k <= order; ++k) {
    // (-Laplace) phi = (4 pi / h^3)(h^3 rho - div N_E)
    // curl^T curl A = (4 pi / h^3)(h^3 j / c + curl^T N_B)
    if (k > 0) {
      field_gradients(E, B, [&](const CellInvariants& c) { return truncated_remainder(c, m, k); }, NE, NB);
      div_into(g, NE, divN);
      curl_f2e_into(g, NB, curlN);
    }
    const double* rho = dep.rho.values.data();
    double* rp = rhs_phi.data();
    for (std::size_t i = 0; i < rhs_phi.size(); ++i) rp[i] = s * (h3 * rho[i] - (k > 0 ? divN.data()[i] : 0.0));
    for (int a = 0; a < 3; ++a) {
      const double* ja = dep.j.c[a].data();
      const double* cn = curlN.c[a].data();
      double* ra = rhs_A.c[a].data();
      for (std::size_t i = 0; i < rhs_A.c[a].size(); ++i)
        ra[i] = s * (h3 * ja[i] / m.c + (k > 0 ? cn[i] : 0.0));
    }
    Potentials next = Potentials::zeros(g);
    poisson.solve_nodes(rhs_phi, next.phi.values);
    poisson.solve_edges(rhs_A, next.A);
    coulomb_project(poisson, next.A);
    EdgeField E_next = EdgeField::zeros(g);
    FaceField B_next = FaceField::zeros(g);
    fields_of(next, E_next, B_next);
    if (k == 0) {
      const auto [e, b] = max_cell_fields(E_next, B_next);
      out.max_linear_field = std::max(e, b);
      if (out.max_linear_field > 0.1 * m.b) {
        std::ostringstream os;
        os << "linear field " << out.max_linear_field << " exceeds 0.1 b; the series is not trusted";
        throw PreconditionError(os.str());
      }
      out.correction_norms.push_back(std::max(E_next.max_abs(), B_next.max_abs()));
    } else {
      out.correction_norms.push_back(std::max(max_difference(E_next, E), max_difference(B_next, B)));
    }
    x = std::move(next);
    E = std::move(E_next);
    B = std::move(B_next);
  }
  out.state = state_from_potentials(dep, m, x);
  out.potentials = std::move(x);
  out.E = std::move(E);
  return out;
}

}  // namespace bifl
