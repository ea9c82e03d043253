#include "bifl/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bifl/errors.hpp"
#include "bifl/parallel.hpp"
#include "bifl/spectral_poisson.hpp"

namespace bifl {

namespace {

// Flat indices of the 12 edges and 6 faces of a cell, grouped by axis.
struct CellRefs {
  std::size_t e[3][4];
  std::size_t f[3][2];
};

CellRefs cell_refs(const EdgeField& E, const FaceField& B, int i, int j, int k) {
  CellRefs r{};
  const auto& ex = E.c[0];
  const auto& ey = E.c[1];
  const auto& ez = E.c[2];
  r.e[0][0] = ex.index(i, j, k);
  r.e[0][1] = ex.index(i, j + 1, k);
  r.e[0][2] = ex.index(i, j, k + 1);
  r.e[0][3] = ex.index(i, j + 1, k + 1);
  r.e[1][0] = ey.index(i, j, k);
  r.e[1][1] = ey.index(i + 1, j, k);
  r.e[1][2] = ey.index(i, j, k + 1);
  r.e[1][3] = ey.index(i + 1, j, k + 1);
  r.e[2][0] = ez.index(i, j, k);
  r.e[2][1] = ez.index(i + 1, j, k);
  r.e[2][2] = ez.index(i, j + 1, k);
  r.e[2][3] = ez.index(i + 1, j + 1, k);
  r.f[0][0] = B.c[0].index(i, j, k);
  r.f[0][1] = B.c[0].index(i + 1, j, k);
  r.f[1][0] = B.c[1].index(i, j, k);
  r.f[1][1] = B.c[1].index(i, j + 1, k);
  r.f[2][0] = B.c[2].index(i, j, k);
  r.f[2][1] = B.c[2].index(i, j, k + 1);
  return r;
}

struct CellValues {
  double e[3][4];
  double f[3][2];
};

CellValues gather(const EdgeField& E, const FaceField& B, const CellRefs& r) {
  CellValues v{};
  for (int a = 0; a < 3; ++a) {
    const double* ed = E.c[a].data();
    for (int q = 0; q < 4; ++q) v.e[a][q] = ed[r.e[a][q]];
    const double* fd = B.c[a].data();
    for (int q = 0; q < 2; ++q) v.f[a][q] = fd[r.f[a][q]];
  }
  return v;
}

CellInvariants invariants_of(const CellValues& v) {
  CellInvariants c;
  double ec[3];
  double bc[3];
  for (int a = 0; a < 3; ++a) {
    double sum = 0.0;
    for (int q = 0; q < 4; ++q) {
      c.e2 += v.e[a][q] * v.e[a][q];
      sum += v.e[a][q];
    }
    ec[a] = 0.25 * sum;
    c.b2 += v.f[a][0] * v.f[a][0] + v.f[a][1] * v.f[a][1];
    bc[a] = 0.5 * (v.f[a][0] + v.f[a][1]);
  }
  c.e2 *= 0.25;
  c.b2 *= 0.5;
  c.Ec = {ec[0], ec[1], ec[2]};
  c.Bc = {bc[0], bc[1], bc[2]};
  c.s = dot(c.Ec, c.Bc);
  return c;
}

// 1 - R, computed without cancellation for weak fields.
double radicand_deficit(const CellInvariants& c, const ModelParams& m) {
  const double eps = 1.0 / (m.b * m.b);
  if (m.model == Model::MBI) return eps * (c.e2 - c.b2) + eps * eps * c.s * c.s;
  return eps * (c.e2 - c.b2) + eps * eps * c.e2 * c.b2;
}

struct CellSecond {
  CellPartials first;
  double h[3][3] = {};  // second partials in (e2, b2, s)
};

CellSecond cell_second(const CellInvariants& c, const ModelParams& m) {
  const double eps = 1.0 / (m.b * m.b);
  const double R = 1.0 - radicand_deficit(c, m);
  const double sq = std::sqrt(R);
  const double pre = m.b * m.b / kFourPi;
  double Ru[3];
  double Ruw[3][3] = {};
  if (m.model == Model::MBI) {
    Ru[0] = -eps;
    Ru[1] = eps;
    Ru[2] = -2.0 * eps * eps * c.s;
    Ruw[2][2] = -2.0 * eps * eps;
  } else {
    Ru[0] = -eps * (1.0 + eps * c.b2);
    Ru[1] = eps * (1.0 - eps * c.e2);
    Ru[2] = 0.0;
    Ruw[0][1] = Ruw[1][0] = -eps * eps;
  }
  CellSecond out;
  out.first.f_e2 = -pre * Ru[0] / (2.0 * sq);
  out.first.f_b2 = -pre * Ru[1] / (2.0 * sq);
  out.first.f_s = -pre * Ru[2] / (2.0 * sq);
  const double r32 = R * sq;
  for (int u = 0; u < 3; ++u)
    for (int w = 0; w < 3; ++w)
      out.h[u][w] = -pre * (Ruw[u][w] / (2.0 * sq) - Ru[u] * Ru[w] / (4.0 * r32));
  return out;
}

template <typename CellBody>
void for_cells_two_color(int n, CellBody&& body) {
  parallel_for_two_color(n, [&](int k) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) body(i, j, k);
  });
}

template <typename CellFn>
double sum_cells(int n, CellFn&& fn) {
  return ordered_sum(n, [&](int k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) s += fn(i, j, k);
    return s;
  });
}

void zero_field(EdgeField& u) {
  for (auto& a : u.c) a.fill(0.0);
}
void zero_field(FaceField& w) {
  for (auto& a : w.c) a.fill(0.0);
}

// Scatters first-order cell gradients for partials p.
void scatter_gradient(const CellRefs& r, const CellValues& v, const CellInvariants& c,
                      const CellPartials& p, double h3, EdgeField& gE, FaceField& gB) {
  const double ec[3] = {c.Ec.x, c.Ec.y, c.Ec.z};
  const double bc[3] = {c.Bc.x, c.Bc.y, c.Bc.z};
  for (int a = 0; a < 3; ++a) {
    double* ge = gE.c[a].data();
    for (int q = 0; q < 4; ++q) ge[r.e[a][q]] += h3 * (0.5 * p.f_e2 * v.e[a][q] + 0.25 * p.f_s * bc[a]);
    double* gb = gB.c[a].data();
    for (int q = 0; q < 2; ++q) gb[r.f[a][q]] += h3 * (p.f_b2 * v.f[a][q] + 0.5 * p.f_s * ec[a]);
  }
}

}  // namespace

Potentials Potentials::zeros(const GridSpec& g) { return {ScalarGrid::zeros(g), EdgeField::zeros(g)}; }

namespace {

template <typename Op>
void for_blocks(Potentials& y, const Potentials* x, Blocks blocks, Op&& op) {
  auto apply = [&](Array3& ya, const Array3* xa) {
    double* yd = ya.data();
    const double* xd = xa ? xa->data() : nullptr;
    const std::size_t size = ya.size();
    for (std::size_t i = 0; i < size; ++i) op(yd[i], xd ? xd[i] : 0.0);
  };
  if (blocks.phi) apply(y.phi.values, x ? &x->phi.values : nullptr);
  if (blocks.A)
    for (int a = 0; a < 3; ++a) apply(y.A.c[a], x ? &x->A.c[a] : nullptr);
}

}  // namespace

double dot(const Potentials& a, const Potentials& b, Blocks blocks) {
  double s = 0.0;
  if (blocks.phi) s += inner(a.phi.values, b.phi.values);
  if (blocks.A) s += inner(a.A, b.A);
  return s;
}

void axpy(double alpha, const Potentials& x, Potentials& y, Blocks blocks) {
  for_blocks(y, &x, blocks, [alpha](double& yi, double xi) { yi += alpha * xi; });
}

void scale(Potentials& x, double alpha, Blocks blocks) {
  for_blocks(x, nullptr, blocks, [alpha](double& xi, double) { xi *= alpha; });
}

void set_zero(Potentials& x, Blocks blocks) {
  for_blocks(x, nullptr, blocks, [](double& xi, double) { xi = 0.0; });
}

void mask_boundary(Potentials& x) {
  apply_dirichlet(x.phi.values);
  apply_dirichlet(x.A);
}

CellInvariants cell_invariants(const EdgeField& E, const FaceField& B, int i, int j, int k) {
  return invariants_of(gather(E, B, cell_refs(E, B, i, j, k)));
}

std::pair<double, double> max_cell_fields(const EdgeField& E, const FaceField& B) {
  const int n = E.grid.n;
  std::vector<double> me(static_cast<std::size_t>(n), 0.0);
  std::vector<double> mb(static_cast<std::size_t>(n), 0.0);
  parallel_for(0, n, [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const CellInvariants c = cell_invariants(E, B, i, j, k);
          me[static_cast<std::size_t>(k)] = std::max(me[static_cast<std::size_t>(k)], c.e2);
          mb[static_cast<std::size_t>(k)] = std::max(mb[static_cast<std::size_t>(k)], c.b2);
        }
  });
  return {std::sqrt(*std::max_element(me.begin(), me.end())), std::sqrt(*std::max_element(mb.begin(), mb.end()))};
}

CellPartials cell_partials(const CellInvariants& c, const ModelParams& m) {
  const double eps = 1.0 / (m.b * m.b);
  const double sq = std::sqrt(1.0 - radicand_deficit(c, m));
  const double k = 1.0 / (2.0 * kFourPi * sq);
  if (m.model == Model::MBI) return {k, -k, 2.0 * eps * c.s * k};
  return {(1.0 + eps * c.b2) * k, -(1.0 - eps * c.e2) * k, 0.0};
}

double cell_radicand(const CellInvariants& c, const ModelParams& m) { return 1.0 - radicand_deficit(c, m); }

double cell_density(const CellInvariants& c, const ModelParams& m) {
  const double deficit = radicand_deficit(c, m);
  const double R = 1.0 - deficit;
  if (R < 0.0) throw InfeasiblePointError("cell radicand is negative");
  return m.b * m.b / kFourPi * deficit / (1.0 + std::sqrt(R));
}

void field_gradients(const EdgeField& E, const FaceField& B, const CellPartialsFn& rule,
                     EdgeField& gE, FaceField& gB) {
  const GridSpec& g = E.grid;
  const double h3 = g.cell_volume();
  zero_field(gE);
  zero_field(gB);
  for_cells_two_color(g.n, [&](int i, int j, int k) {
    const CellRefs r = cell_refs(E, B, i, j, k);
    const CellValues v = gather(E, B, r);
    const CellInvariants c = invariants_of(v);
    scatter_gradient(r, v, c, rule(c), h3, gE, gB);
  });
}

DiscreteLagrangian::DiscreteLagrangian(const DepositedSources& sources, const ModelParams& m)
    : grid_(sources.grid),
      model_(m),
      sources_(sources),
      x_(Potentials::zeros(grid_)),
      E_(EdgeField::zeros(grid_)),
      B_(FaceField::zeros(grid_)),
      gE_(EdgeField::zeros(grid_)),
      gB_(FaceField::zeros(grid_)),
      dE_(EdgeField::zeros(grid_)),
      dB_(FaceField::zeros(grid_)),
      outE_(EdgeField::zeros(grid_)),
      outB_(FaceField::zeros(grid_)) {
  m.validate();
  set_point(x_);
}

void DiscreteLagrangian::set_point(const Potentials& x) {
  x_ = x;
  grad_into(grid_, x_.phi.values, E_);
  for (auto& a : E_.c)
    for (double& v : a.values()) v = -v;
  curl_e2f_into(grid_, x_.A, B_);
  const int n = grid_.n;
  std::vector<double> slab_min(static_cast<std::size_t>(n), 1.0);
  parallel_for(0, n, [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k) {
      double mn = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) mn = std::min(mn, cell_radicand(cell_invariants(E_, B_, i, j, k), model_));
      slab_min[static_cast<std::size_t>(k)] = mn;
    }
  });
  min_radicand_ = *std::min_element(slab_min.begin(), slab_min.end());
  have_gradients_ = false;
}

double DiscreteLagrangian::field_part() const {
  if (!(min_radicand_ >= 0.0)) throw InfeasiblePointError("discrete Lagrangian evaluated at an infeasible point");
  return grid_.cell_volume() *
         sum_cells(grid_.n, [&](int i, int j, int k) { return cell_density(cell_invariants(E_, B_, i, j, k), model_); });
}

double DiscreteLagrangian::value() const {
  const double h3 = grid_.cell_volume();
  double coupling = -h3 * inner(sources_.rho.values, x_.phi.values);
  if (sources_.j_max > 0.0) coupling += h3 / model_.c * inner(sources_.j, x_.A);
  return field_part() + coupling;
}

void DiscreteLagrangian::ensure_field_gradients() const {
  if (have_gradients_) return;
  if (!(min_radicand_ > 0.0)) throw InfeasiblePointError("gradient requested at an infeasible point");
  const double h3 = grid_.cell_volume();
  zero_field(gE_);
  zero_field(gB_);
  for_cells_two_color(grid_.n, [&](int i, int j, int k) {
    const CellRefs r = cell_refs(E_, B_, i, j, k);
    const CellValues v = gather(E_, B_, r);
    const CellInvariants c = invariants_of(v);
    scatter_gradient(r, v, c, cell_partials(c, model_), h3, gE_, gB_);
  });
  have_gradients_ = true;
}

void DiscreteLagrangian::gradient(Potentials& g) const {
  ensure_field_gradients();
  const double h3 = grid_.cell_volume();
  if (g.phi.values.size() != x_.phi.values.size()) g = Potentials::zeros(grid_);
  div_into(grid_, gE_, g.phi.values);
  {
    double* gp = g.phi.values.data();
    const double* rho = sources_.rho.values.data();
    const std::size_t size = g.phi.values.size();
    for (std::size_t i = 0; i < size; ++i) gp[i] -= h3 * rho[i];
  }
  curl_f2e_into(grid_, gB_, g.A);
  if (sources_.j_max > 0.0) {
    const double w = h3 / model_.c;
    for (int a = 0; a < 3; ++a) {
      double* ga = g.A.c[a].data();
      const double* ja = sources_.j.c[a].data();
      const std::size_t size = g.A.c[a].size();
      for (std::size_t i = 0; i < size; ++i) ga[i] += w * ja[i];
    }
  }
  mask_boundary(g);
}

void DiscreteLagrangian::apply_hessian(const Potentials& v, Potentials& out, Blocks blocks) const {
  if (!(min_radicand_ > 0.0)) throw InfeasiblePointError("Hessian requested at an infeasible point");
  const double h3 = grid_.cell_volume();
  if (out.phi.values.size() != x_.phi.values.size()) out = Potentials::zeros(grid_);
  if (blocks.phi) {
    grad_into(grid_, v.phi.values, dE_);
    for (auto& a : dE_.c)
      for (double& d : a.values()) d = -d;
  } else {
    zero_field(dE_);
  }
  if (blocks.A) {
    curl_e2f_into(grid_, v.A, dB_);
  } else {
    zero_field(dB_);
  }
  zero_field(outE_);
  zero_field(outB_);
  const bool want_e = blocks.phi;
  const bool want_b = blocks.A;
  for_cells_two_color(grid_.n, [&](int i, int j, int k) {
    const CellRefs r = cell_refs(E_, B_, i, j, k);
    const CellValues x = gather(E_, B_, r);
    const CellValues d = gather(dE_, dB_, r);
    const CellInvariants c = invariants_of(x);
    const CellSecond s = cell_second(c, model_);
    const double ec[3] = {c.Ec.x, c.Ec.y, c.Ec.z};
    const double bc[3] = {c.Bc.x, c.Bc.y, c.Bc.z};
    double dec[3];
    double dbc[3];
    double du[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
      double se = 0.0;
      for (int q = 0; q < 4; ++q) {
        du[0] += 0.5 * x.e[a][q] * d.e[a][q];
        se += d.e[a][q];
      }
      dec[a] = 0.25 * se;
      du[1] += x.f[a][0] * d.f[a][0] + x.f[a][1] * d.f[a][1];
      dbc[a] = 0.5 * (d.f[a][0] + d.f[a][1]);
    }
    du[2] = dec[0] * bc[0] + dec[1] * bc[1] + dec[2] * bc[2] + ec[0] * dbc[0] + ec[1] * dbc[1] + ec[2] * dbc[2];
    double t[3];
    for (int u = 0; u < 3; ++u) t[u] = s.h[u][0] * du[0] + s.h[u][1] * du[1] + s.h[u][2] * du[2];
    const CellPartials& p = s.first;
    for (int a = 0; a < 3; ++a) {
      if (want_e) {
        double* oe = outE_.c[a].data();
        const double common = 0.25 * (p.f_s * dbc[a] + t[2] * bc[a]);
        for (int q = 0; q < 4; ++q) oe[r.e[a][q]] += h3 * (0.5 * (p.f_e2 * d.e[a][q] + t[0] * x.e[a][q]) + common);
      }
      if (want_b) {
        double* ob = outB_.c[a].data();
        const double common = 0.5 * (p.f_s * dec[a] + t[2] * ec[a]);
        for (int q = 0; q < 2; ++q) ob[r.f[a][q]] += h3 * (p.f_b2 * d.f[a][q] + t[1] * x.f[a][q] + common);
      }
    }
  });
  if (blocks.phi) {
    div_into(grid_, outE_, out.phi.values);
    apply_dirichlet(out.phi.values);
  }
  if (blocks.A) {
    curl_f2e_into(grid_, outB_, out.A);
    apply_dirichlet(out.A);
  }
}

void DiscreteLagrangian::constitutive_fields(EdgeField& D, FaceField& H) const {
  ensure_field_gradients();
  const double s = kFourPi / grid_.cell_volume();
  D = gE_;
  H = gB_;
  for (auto& a : D.c)
    for (double& v : a.values()) v *= s;
  for (auto& a : H.c)
    for (double& v : a.values()) v *= -s;
}

void coulomb_project(const SpectralPoisson& poisson, EdgeField& A) {
  const GridSpec& g = A.grid;
  Array3 rhs(placement_dims(Placement::Node, g.n));
  div_into(g, A, rhs);
  for (double& v : rhs.values()) v = -v;
  Array3 u(placement_dims(Placement::Node, g.n));
  poisson.solve_nodes(rhs, u);
  EdgeField gu = EdgeField::zeros(g);
  grad_into(g, u, gu);
  for (int a = 0; a < 3; ++a) {
    double* ad = A.c[a].data();
    const double* gd = gu.c[a].data();
    const std::size_t size = A.c[a].size();
    for (std::size_t i = 0; i < size; ++i) ad[i] -= gd[i];
  }
  apply_dirichlet(A);
}

}  // namespace bifl
