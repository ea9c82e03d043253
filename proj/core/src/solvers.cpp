#include "bifl/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "bifl/errors.hpp"
#include "bifl/spectral_poisson.hpp"
#include "krylov.hpp"

namespace bifl {

void SolveConfig::validate() const {
  if (!(tol > 0.0)) throw PreconditionError("solve.tol must be positive");
  if (max_iter < 1) throw PreconditionError("solve.max_iter must be at least 1");
  if (!(feasibility_margin >= 0.0 && feasibility_margin < 1.0))
    throw PreconditionError("solve.feasibility_margin must lie in [0, 1)");
  if (!(inner_tol > 0.0 && inner_tol < 1.0)) throw PreconditionError("solve.inner_tol must lie in (0, 1)");
  if (max_inner_iter < 1) throw PreconditionError("solve.max_inner_iter must be at least 1");
  if (!(line_search.armijo > 0.0 && line_search.armijo < 0.5))
    throw PreconditionError("solve.line_search.armijo must lie in (0, 0.5)");
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
    throw PreconditionError("solve.line_search.shrink must lie in (0, 1)");
  if (line_search.max_backtracks < 1) throw PreconditionError("solve.line_search.max_backtracks must be at least 1");
}

namespace {

// Block-diagonal preconditioner: the inverse Hessian of the linear theory,
// (4 pi / h^3) (-Laplace)^{-1} on both blocks.
class Preconditioner {
 public:
  Preconditioner(const SpectralPoisson& poisson, Blocks blocks)
      : poisson_(poisson), blocks_(blocks), s_(kFourPi / poisson.grid().cell_volume()) {}

  void operator()(const Potentials& r, Potentials& z) const {
    if (blocks_.phi) {
      poisson_.solve_nodes(r.phi.values, z.phi.values);
      for (double& v : z.phi.values.values()) v *= s_;
    }
    if (blocks_.A) {
      poisson_.solve_edges(r.A, z.A);
      for (auto& a : z.A.c)
        for (double& v : a.values()) v *= s_;
    }
  }

 private:
  const SpectralPoisson& poisson_;
  Blocks blocks_;
  double s_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

FieldState state_from_potentials(const DepositedSources& sources, const ModelParams& m, const Potentials& x) {
  DiscreteLagrangian lag(sources, m);
  lag.set_point(x);
  FieldState s = FieldState::zeros(sources.grid);
  s.phi = x.phi;
  s.A = x.A;
  s.B = lag.B();
  FaceField H = FaceField::zeros(sources.grid);
  lag.constitutive_fields(s.D, H);
  return s;
}

ConstraintResidual constraint_residuals(const FieldState& state, const FaceField& H,
                                        const DepositedSources& sources, const ModelParams& m) {
  const GridSpec& g = state.grid;
  const int n = g.n;
  ConstraintResidual out;
  Array3 divD(placement_dims(Placement::Node, n));
  div_into(g, state.D, divD);
  for (int k = 1; k < n; ++k)
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i)
        out.gauss = std::max(out.gauss, std::abs(divD(i, j, k) - kFourPi * sources.rho.values(i, j, k)));
  const double rho_scale = kFourPi * sources.rho.values.max_abs();
  out.gauss_relative = rho_scale > 0.0 ? out.gauss / rho_scale : out.gauss;
  out.div_B = discrete_div_faces(state.B).values.max_abs();
  EdgeField curlH = EdgeField::zeros(g);
  curl_f2e_into(g, H, curlH);
  for (int a = 0; a < 3; ++a) {
    const Array3& ch = curlH.c[a];
    const Array3& ja = sources.j.c[a];
    for (int k = 0; k < ch.nz(); ++k)
      for (int j = 0; j < ch.ny(); ++j)
        for (int i = 0; i < ch.nx(); ++i) {
          if (is_tangential_boundary_edge(g, a, i, j, k)) continue;
          out.ampere = std::max(out.ampere, std::abs(ch(i, j, k) - kFourPi * ja(i, j, k) / m.c));
        }
  }
  const double j_scale = kFourPi * sources.j_max / m.c;
  out.ampere_relative = j_scale > 0.0 ? out.ampere / j_scale : out.ampere;
  return out;
}

SolveResult solve_variational(const DepositedSources& sources, const ModelParams& m, SolveMode mode,
                              const SolveConfig& cfg, const std::optional<Potentials>& x0) {
  cfg.validate();
  m.validate();
  const auto t0 = Clock::now();
  const GridSpec& g = sources.grid;
  const Blocks blocks{mode != SolveMode::Maximize, mode != SolveMode::Minimize};
  const Blocks phi_only{true, false};
  const Blocks a_only{false, true};
  SpectralPoisson poisson(g);
  const Preconditioner prec(poisson, blocks);

  Potentials x = Potentials::zeros(g);
  if (x0) {
    if (!(x0->phi.grid == g) || !(x0->A.grid == g)) throw PreconditionError("initial potentials live on a different grid");
    x = *x0;
    x.phi.grid = g;
    x.A.grid = g;
  }
  if (!blocks.phi) set_zero(x, phi_only);
  if (!blocks.A) set_zero(x, a_only);
  mask_boundary(x);
  if (blocks.A) coulomb_project(poisson, x.A);

  DiscreteLagrangian lag(sources, m);
  lag.set_point(x);
  if (!(lag.min_radicand() > cfg.feasibility_margin)) {
    std::ostringstream os;
    os << "starting point is infeasible: minimum radicand " << lag.min_radicand();
    throw InfeasiblePointError(os.str());
  }

  auto restrict = [&](Potentials& v) {
    if (!blocks.phi) set_zero(v, phi_only);
    if (!blocks.A) set_zero(v, a_only);
  };
  Potentials grad = Potentials::zeros(g);
  Potentials z = Potentials::zeros(g);
  auto evaluate_gradient = [&](Potentials& out) {
    lag.gradient(out);
    restrict(out);
  };
  auto merit_of = [&](const Potentials& gr) {
    prec(gr, z);
    return std::sqrt(std::max(dot(gr, z, blocks), 0.0));
  };

  evaluate_gradient(grad);
  const double h3 = g.cell_volume();
  double ref_phi = h3 * sources.rho.values.max_abs();
  double ref_A = h3 * sources.j_max / m.c;
  if (!(ref_phi > 0.0)) ref_phi = grad.phi.values.max_abs();
  if (!(ref_A > 0.0)) ref_A = grad.A.max_abs();
  if (!(ref_phi > 0.0)) ref_phi = ref_A;
  if (!(ref_A > 0.0)) ref_A = ref_phi;

  SolveReport report;
  auto residuals = [&](const Potentials& gr) {
    const double rp = blocks.phi ? (ref_phi > 0.0 ? gr.phi.values.max_abs() / ref_phi : 0.0) : 0.0;
    const double ra = blocks.A ? (ref_A > 0.0 ? gr.A.max_abs() / ref_A : 0.0) : 0.0;
    return std::pair{rp, ra};
  };

  double merit = merit_of(grad);
  const double merit0 = merit;
  double L = lag.value();
  report.residual_history.push_back(merit0 > 0.0 ? 1.0 : 0.0);
  report.lagrangian_history.push_back(L);

  Potentials p = Potentials::zeros(g);
  Potentials rhs = Potentials::zeros(g);
  Potentials trial = Potentials::zeros(g);
  Potentials grad_trial = Potentials::zeros(g);

  const auto& ls = cfg.line_search;
  report.status = "max_iter reached";
  for (int it = 0;; ++it) {
    const auto [rp, ra] = residuals(grad);
    report.residual_phi = rp;
    report.residual_A = ra;
    if (rp <= cfg.tol && ra <= cfg.tol) {
      report.converged = true;
      report.status = "converged";
      break;
    }
    if (it >= cfg.max_iter) break;

    const double eta = std::min(cfg.inner_tol, merit0 > 0.0 ? merit / merit0 : cfg.inner_tol);
    detail::KrylovResult kr;
    rhs = grad;
    // Round-off leaves a gradient component in dL/dA that lies in the gauge
    // null space; removing it keeps the singular Krylov system consistent.
    if (blocks.A) coulomb_project(poisson, rhs.A);
    if (mode == SolveMode::Minimize) {
      scale(rhs, -1.0, blocks);
      kr = detail::pcg([&](const Potentials& v, Potentials& out) { lag.apply_hessian(v, out, phi_only); }, prec,
                       rhs, p, blocks, eta, cfg.max_inner_iter);
    } else if (mode == SolveMode::Maximize) {
      // (-H_AA) p = g is a positive semidefinite system.
      kr = detail::pcg(
          [&](const Potentials& v, Potentials& out) {
            lag.apply_hessian(v, out, a_only);
            scale(out, -1.0, a_only);
          },
          prec, rhs, p, blocks, eta, cfg.max_inner_iter);
    } else {
      scale(rhs, -1.0, blocks);
      kr = detail::minres([&](const Potentials& v, Potentials& out) { lag.apply_hessian(v, out, blocks); }, prec,
                          rhs, p, blocks, eta, cfg.max_inner_iter);
    }
    report.krylov_iterations += kr.iterations;
    restrict(p);
    mask_boundary(p);
    if (blocks.A) coulomb_project(poisson, p.A);

    const double slope = dot(grad, p, blocks);
    const double noise = 1e-13 * std::max({std::abs(L), std::abs(lag.field_part()), 1e-300});
    double t = 1.0;
    bool accepted = false;
    double L_trial = L;
    double merit_trial = merit;
    for (int bt = 0; bt <= ls.max_backtracks; ++bt, t *= ls.shrink) {
      trial = x;
      axpy(t, p, trial, blocks);
      lag.set_point(trial);
      if (!(lag.min_radicand() > cfg.feasibility_margin)) continue;
      evaluate_gradient(grad_trial);
      merit_trial = merit_of(grad_trial);
      if (!(merit_trial <= (1.0 - ls.armijo * t) * merit)) continue;
      L_trial = lag.value();
      if (mode == SolveMode::Minimize) {
        const bool armijo = L_trial <= L + ls.armijo * t * slope;
        const bool flat = std::abs(t * slope) <= noise && L_trial <= L + noise;
        if (!armijo && !flat) continue;
      } else if (mode == SolveMode::Maximize) {
        const bool armijo = L_trial >= L + ls.armijo * t * slope;
        const bool flat = std::abs(t * slope) <= noise && L_trial >= L - noise;
        if (!armijo && !flat) continue;
      }
      accepted = true;
      break;
    }
    if (!accepted) {
      lag.set_point(x);
      report.status = "line search failed";
      break;
    }
    std::swap(x, trial);
    std::swap(grad, grad_trial);
    merit = merit_trial;
    L = L_trial;
    report.iterations = it + 1;
    report.residual_history.push_back(merit0 > 0.0 ? merit / merit0 : 0.0);
    report.lagrangian_history.push_back(L);
  }

  SolveResult result{FieldState::zeros(g), lag.E(), FaceField::zeros(g), {}};
  result.state.phi = x.phi;
  result.state.A = x.A;
  result.state.B = lag.B();
  lag.constitutive_fields(result.state.D, result.H);
  report.lagrangian = L;
  report.min_radicand = lag.min_radicand();
  report.final_energy = total_energy(result.state, m);
  report.constraint_residual = constraint_residuals(result.state, result.H, sources, m);
  report.wall_time = seconds_since(t0);
  result.report = std::move(report);
  return result;
}

SolveResult solve_electrostatic(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg) {
  if (src.has_current()) throw PreconditionError("solve_electrostatic requires a source without current");
  const DepositedSources dep = deposit_sources(src, g, m.c);
  return solve_variational(dep, m, SolveMode::Minimize, cfg);
}

SolveResult solve_magnetostatic(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg) {
  if (src.has_charge()) throw PreconditionError("solve_magnetostatic requires a source without charge");
  const DepositedSources dep = deposit_sources(src, g, m.c);
  require_divergence_free(dep);
  return solve_variational(dep, m, SolveMode::Maximize, cfg);
}

SolveResult solve_mb_stationary(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg) {
  if (m.model != Model::MB) throw ModelError("solve_mb_stationary requires the MB model");
  return solve_coupled(src, g, m, cfg);
}

SolveResult solve_coupled(const SourceSpec& src, const GridSpec& g, const ModelParams& m, const SolveConfig& cfg,
                          const std::optional<Potentials>& x0) {
  const DepositedSources dep = deposit_sources(src, g, m.c);
  require_divergence_free(dep);
  return solve_variational(dep, m, SolveMode::Saddle, cfg, x0);
}

double scaling_probe(const FieldState& state, const ModelParams& m) {
  double sum = 0.0;
  for (const FieldPoint& p : average_to_centers(state)) sum += scaling_derivative_density(p, m);
  return state.grid.cell_volume() * sum;
}

std::pair<double, double> theorem23_vanishing_check(const FieldState& state, const ModelParams& m) {
  double bh = 0.0;
  double ed = 0.0;
  for (const FieldPoint& p : average_to_centers(state)) {
    bh += bh_dot(p, m);
    ed += ed_dot(p, m);
  }
  const double h3 = state.grid.cell_volume();
  return {h3 * bh, h3 * ed};
}

}  // namespace bifl
