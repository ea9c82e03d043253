#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "bifl/errors.hpp"
#include "bifl/lagrangian.hpp"
#include "bifl/solvers.hpp"
#include "bifl/sources.hpp"
#include "bifl/spectral_poisson.hpp"

using namespace bifl;

namespace {

const ModelParams kMBI{1.0, Model::MBI, 1.0};
const ModelParams kMB{1.0, Model::MB, 1.0};

SourceSpec charge(double q, Vec3 pos = {}) {
  SourceSpec s;
  s.point_charges.push_back({q, pos});
  return s;
}

SourceSpec loop(double moment, double width = 0.2) {
  SourceSpec s;
  s.current_loops.push_back({moment, {0.0, 0.0, 0.0}, width, 2});
  return s;
}

double max_diff(const EdgeField& a, const EdgeField& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto u = a.c[static_cast<size_t>(c)].values();
    const auto w = b.c[static_cast<size_t>(c)].values();
    for (size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - w[i]));
  }
  return m;
}

double max_diff(const FaceField& a, const FaceField& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto u = a.c[static_cast<size_t>(c)].values();
    const auto w = b.c[static_cast<size_t>(c)].values();
    for (size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - w[i]));
  }
  return m;
}

double max_diff(const Array3& a, const Array3& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

bool nonincreasing(const std::vector<double>& v, double slack = 0.0) {
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + slack) return false;
  return true;
}

// Linear electrostatics: (-div grad) phi = 4 pi rho.
Array3 linear_phi(const DepositedSources& dep) {
  SpectralPoisson sp(dep.grid);
  Array3 rhs = dep.rho.values;
  for (double& v : rhs.values()) v *= kFourPi;
  Array3 u(rhs.dims());
  sp.solve_nodes(rhs, u);
  return u;
}

// Linear magnetostatics in Coulomb gauge: curl^T curl A = 4 pi j / c.
EdgeField linear_A(const DepositedSources& dep, double c) {
  SpectralPoisson sp(dep.grid);
  EdgeField rhs = dep.j;
  for (auto& a : rhs.c)
    for (double& v : a.values()) v *= kFourPi / c;
  EdgeField A = EdgeField::zeros(dep.grid);
  sp.solve_edges(rhs, A);
  return A;
}

// Loop whose linear field peaks at `peak` (b = 1). Since |H| < b, Ampere's
// law has no solution once the linear field is much larger than b.
SourceSpec scaled_loop(const GridSpec& g, double peak) {
  const DepositedSources unit = deposit_sources(loop(1.0), g);
  const double b_unit = discrete_curl_e2f(linear_A(unit, 1.0)).max_abs();
  return loop(peak / b_unit);
}

}  // namespace

TEST(SolveConfig, Validation) {
  SolveConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.tol = 0.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.inner_tol = 1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.line_search.shrink = 1.0;
  EXPECT_THROW(cfg.validate(), PreconditionError);
  try {
    SolveConfig bad;
    bad.tol = -1.0;
    bad.validate();
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_STREQ(e.what(), "solve.tol must be positive");
  }
}

TEST(SolveElectrostatic, NoChargeGivesTheTrivialField) {
  const GridSpec g{16, 0.25};
  const SolveResult r = solve_electrostatic(SourceSpec{}, g, kMBI, SolveConfig{});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.state.phi.values.max_abs(), 0.0);
  const double L = g.half_width();
  EXPECT_LE(r.report.final_energy, 1e-12 * 8 * L * L * L);
}

TEST(SolveElectrostatic, NoChargeFromARandomStartDecaysToZero) {
  const GridSpec g{16, 0.25};
  const DepositedSources dep = deposit_sources(SourceSpec{}, g);
  const SolveResult r = solve_variational(dep, kMBI, SolveMode::Minimize, SolveConfig{},
                                          random_potentials(g, 1, 0.5, 0.0));
  EXPECT_TRUE(r.report.converged) << r.report.status;
  EXPECT_LE(r.state.D.max_abs(), 1e-8);
  EXPECT_LE(r.report.final_energy, 1e-14);
}

TEST(SolveElectrostatic, WeakSourceMatchesLinearPoisson) {
  const GridSpec g{32, 0.25};
  // Scale q so the linear field peaks at 1e-3 b.
  const DepositedSources unit = deposit_sources(charge(1.0), g);
  const double e_unit = discrete_grad(ScalarGrid{g, linear_phi(unit)}).max_abs();
  const double q = 1e-3 / e_unit;
  const DepositedSources dep = deposit_sources(charge(q), g);
  const Array3 ref = linear_phi(dep);
  const SolveResult r = solve_electrostatic(charge(q), g, kMBI, SolveConfig{});
  ASSERT_TRUE(r.report.converged) << r.report.status;
  EXPECT_LE(r.state.D.max_abs(), 1.1e-3);
  EXPECT_LE(max_diff(r.state.phi.values, ref), 1e-5 * ref.max_abs());
}

TEST(SolveElectrostatic, PointChargeConvergesWithMonotoneHistories) {
  const GridSpec g{32, 0.25};
  const SolveResult r = solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{});
  const SolveReport& rep = r.report;
  ASSERT_TRUE(rep.converged) << rep.status;
  EXPECT_EQ(rep.residual_history.size(), static_cast<size_t>(rep.iterations) + 1);
  EXPECT_EQ(rep.residual_history.front(), 1.0);
  EXPECT_TRUE(nonincreasing(rep.residual_history));
  EXPECT_TRUE(nonincreasing(rep.lagrangian_history, 1e-13 * std::abs(rep.lagrangian)));
  EXPECT_LE(rep.residual_phi, 1e-10);
  EXPECT_LE(rep.constraint_residual.gauss_relative, SolveConfig{}.tol);
  EXPECT_EQ(rep.constraint_residual.div_B, 0.0);
  EXPECT_GT(rep.min_radicand, 0.0);
  EXPECT_GT(rep.final_energy, 0.0);
  // E stays below b on every edge away from the charge.
  EXPECT_LT(r.E.max_abs(), 1.0);
}

TEST(SolveElectrostatic, CubicSymmetry) {
  const GridSpec g{24, 0.25};
  const SolveResult r = solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{});
  ASSERT_TRUE(r.report.converged);
  const int n = g.n;
  const auto pts = average_to_centers(r.state);
  auto dnorm = [&](int i, int j, int k) { return norm(pts[static_cast<size_t>(i + n * (j + n * k))].D); };
  double scale = 0.0;
  for (const FieldPoint& p : pts) scale = std::max(scale, norm(p.D));
  const std::array<std::array<int, 3>, 6> perms{{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  double worst = 0.0;
  for (const auto& perm : perms)
    for (int flips = 0; flips < 8; ++flips)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) {
            const int src[3] = {i, j, k};
            int dst[3];
            for (int a = 0; a < 3; ++a) {
              const int v = src[perm[static_cast<size_t>(a)]];
              dst[a] = (flips >> a) & 1 ? n - 1 - v : v;
            }
            worst = std::max(worst, std::abs(dnorm(i, j, k) - dnorm(dst[0], dst[1], dst[2])));
          }
  EXPECT_LE(worst, 1e-10 * scale);
}

TEST(SolveElectrostatic, Preconditions) {
  const GridSpec g{16, 0.25};
  SourceSpec both = charge(1.0);
  both.current_loops.push_back({1.0, {}, 0.2, 2});
  EXPECT_THROW(solve_electrostatic(both, g, kMBI, SolveConfig{}), PreconditionError);
  EXPECT_THROW(solve_electrostatic(charge(1.0, {1.6, 0, 0}), g, kMBI, SolveConfig{}), PreconditionError);
  const DepositedSources dep = deposit_sources(charge(1.0), g);
  EXPECT_THROW(solve_variational(dep, kMBI, SolveMode::Minimize, SolveConfig{}, random_potentials(g, 2, 3.0, 0.0)),
               InfeasiblePointError);
  EXPECT_THROW(solve_variational(dep, kMBI, SolveMode::Minimize, SolveConfig{}, Potentials::zeros(GridSpec{8, 0.5})),
               PreconditionError);
}

TEST(SolveElectrostatic, IterationCapReportsNonConvergence) {
  const GridSpec g{16, 0.25};
  SolveConfig cfg;
  cfg.max_iter = 1;
  const SolveResult r = solve_electrostatic(charge(1.0), g, kMBI, cfg);
  EXPECT_FALSE(r.report.converged);
  EXPECT_EQ(r.report.status, "max_iter reached");
  EXPECT_EQ(r.report.iterations, 1);
}

TEST(SolveElectrostatic, Deterministic) {
  const GridSpec g{16, 0.25};
  const SolveResult a = solve_electrostatic(charge(0.7, {0.25, 0, 0}), g, kMBI, SolveConfig{});
  const SolveResult b = solve_electrostatic(charge(0.7, {0.25, 0, 0}), g, kMBI, SolveConfig{});
  EXPECT_EQ(a.state.phi.values, b.state.phi.values);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(a.state.D.c[static_cast<size_t>(c)], b.state.D.c[static_cast<size_t>(c)]);
}

TEST(SolveMagnetostatic, NoCurrentGivesZeroB) {
  const GridSpec g{16, 0.25};
  const SolveResult r = solve_magnetostatic(SourceSpec{}, g, kMBI, SolveConfig{});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.state.B.max_abs(), 0.0);
  EXPECT_EQ(r.state.A.max_abs(), 0.0);
}

TEST(SolveMagnetostatic, WeakLoopMatchesLinearSolve) {
  const GridSpec g{24, 0.25};
  const DepositedSources unit = deposit_sources(loop(1.0), g);
  const double b_unit = discrete_curl_e2f(linear_A(unit, 1.0)).max_abs();
  const double moment = 1e-3 / b_unit;
  const DepositedSources dep = deposit_sources(loop(moment), g);
  const FaceField ref = discrete_curl_e2f(linear_A(dep, 1.0));
  const SolveResult r = solve_magnetostatic(loop(moment), g, kMBI, SolveConfig{});
  ASSERT_TRUE(r.report.converged) << r.report.status;
  EXPECT_LE(max_diff(r.state.B, ref), 1e-5 * ref.max_abs());
}

TEST(SolveMagnetostatic, StrongLoopSatisfiesAmpereAndKeepsDivBZero) {
  const GridSpec g{24, 0.25};
  const SolveResult r = solve_magnetostatic(scaled_loop(g, 0.8), g, kMBI, SolveConfig{});
  const SolveReport& rep = r.report;
  ASSERT_TRUE(rep.converged) << rep.status;
  EXPECT_GT(r.state.B.max_abs(), 0.5);
  EXPECT_LE(rep.constraint_residual.div_B, 1e-12 * r.state.B.max_abs() / g.h);
  EXPECT_LE(rep.constraint_residual.ampere_relative, 1e-9);
  EXPECT_TRUE(nonincreasing(rep.residual_history));
  // Concave maximization: L is nondecreasing.
  for (size_t i = 1; i < rep.lagrangian_history.size(); ++i)
    EXPECT_GE(rep.lagrangian_history[i], rep.lagrangian_history[i - 1] - 1e-13 * std::abs(rep.lagrangian));
  EXPECT_EQ(r.state.D.max_abs(), 0.0);
}

TEST(SolveMagnetostatic, GaugeInvariance) {
  const GridSpec g{16, 0.25};
  const DepositedSources dep = deposit_sources(scaled_loop(g, 0.5), g);
  const Potentials a0 = random_potentials(g, 3, 0.0, 0.4);
  Potentials a1 = a0;
  const EdgeField gchi = discrete_grad(random_potentials(g, 4, 0.5, 0.0).phi);
  for (int a = 0; a < 3; ++a) {
    auto dst = a1.A.c[static_cast<size_t>(a)].values();
    const auto src = gchi.c[static_cast<size_t>(a)].values();
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  const SolveResult r0 = solve_variational(dep, kMBI, SolveMode::Maximize, SolveConfig{}, a0);
  const SolveResult r1 = solve_variational(dep, kMBI, SolveMode::Maximize, SolveConfig{}, a1);
  ASSERT_TRUE(r0.report.converged && r1.report.converged);
  EXPECT_LE(max_diff(r0.state.B, r1.state.B), 1e-10 * r0.state.B.max_abs());
}

TEST(SolveMagnetostatic, Preconditions) {
  const GridSpec g{16, 0.25};
  EXPECT_THROW(solve_magnetostatic(charge(1.0), g, kMBI, SolveConfig{}), PreconditionError);
  SourceSpec leaky;
  leaky.smooth_j = [](const Vec3& p) { return Vec3{std::exp(-4 * norm2(p)), 0, 0}; };
  EXPECT_THROW(solve_magnetostatic(leaky, g, kMBI, SolveConfig{}), PreconditionError);
}

TEST(SolveMbStationary, RejectsMbi) {
  EXPECT_THROW(solve_mb_stationary(charge(1.0), GridSpec{16, 0.25}, kMBI, SolveConfig{}), ModelError);
}

TEST(SolveMbStationary, DecoupledChargeAgreesWithElectrostatics) {
  const GridSpec g{24, 0.25};
  const SolveResult a = solve_mb_stationary(charge(1.0), g, kMB, SolveConfig{});
  const SolveResult b = solve_electrostatic(charge(1.0), g, kMB, SolveConfig{});
  ASSERT_TRUE(a.report.converged && b.report.converged);
  EXPECT_LE(max_diff(a.state.D, b.state.D), 1e-8 * b.state.D.max_abs());
  EXPECT_EQ(a.state.B.max_abs(), 0.0);
}

TEST(SolveMbStationary, DecoupledCurrentAgreesWithMagnetostatics) {
  const GridSpec g{24, 0.25};
  const SourceSpec src = scaled_loop(g, 0.8);
  const SolveResult a = solve_mb_stationary(src, g, kMB, SolveConfig{});
  const SolveResult b = solve_magnetostatic(src, g, kMB, SolveConfig{});
  ASSERT_TRUE(a.report.converged && b.report.converged);
  EXPECT_LE(max_diff(a.state.B, b.state.B), 1e-8 * b.state.B.max_abs());
  EXPECT_EQ(a.state.D.max_abs(), 0.0);
}

TEST(SolveMbStationary, CoupledProblemSatisfiesBothConstraints) {
  const GridSpec g{24, 0.25};
  SourceSpec src = charge(1.0, {0.25, 0.0, 0.0});
  src.current_loops.push_back(scaled_loop(g, 0.8).current_loops.front());
  const SolveResult r = solve_mb_stationary(src, g, kMB, SolveConfig{});
  const SolveReport& rep = r.report;
  ASSERT_TRUE(rep.converged) << rep.status;
  EXPECT_LE(rep.constraint_residual.gauss_relative, 1e-9);
  EXPECT_LE(rep.constraint_residual.ampere_relative, 1e-9);
  EXPECT_TRUE(nonincreasing(rep.residual_history));
}

TEST(ScalingProbe, ZeroStateAndFiniteDifference) {
  const GridSpec g{16, 0.25};
  EXPECT_EQ(scaling_probe(FieldState::zeros(g), kMBI), 0.0);
  const DepositedSources dep = deposit_sources(SourceSpec{}, g);
  const FieldState s = state_from_potentials(dep, kMBI, random_potentials(g, 5, 0.6, 0.6));
  for (const ModelParams& m : {kMBI, kMB}) {
    const double step = 1e-5;
    auto scaled = [&](double lam) {
      FieldState t = s;
      for (auto& c : t.B.c)
        for (double& v : c.values()) v *= lam;
      for (auto& c : t.D.c)
        for (double& v : c.values()) v *= lam;
      return total_energy(t, m);
    };
    const double fd = (scaled(1 + step) - scaled(1 - step)) / (2 * step);
    const double probe = scaling_probe(s, m);
    EXPECT_GT(probe, 0.0);
    EXPECT_NEAR(probe, fd, 1e-6 * probe);
  }
}

TEST(ScalingProbe, PositiveOnConvergedSolutions) {
  const GridSpec g{16, 0.25};
  EXPECT_GT(scaling_probe(solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{}).state, kMBI), 0.0);
  EXPECT_GT(scaling_probe(solve_magnetostatic(scaled_loop(g, 0.5), g, kMBI, SolveConfig{}).state, kMBI), 0.0);
}

TEST(VanishingIntegrals, VanishesExactlyOnPureSolutions) {
  const GridSpec g{16, 0.25};
  const auto [bh_e, ed_e] = theorem23_vanishing_check(solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{}).state, kMBI);
  EXPECT_EQ(bh_e, 0.0);
  EXPECT_GT(ed_e, 0.0);
  const auto [bh_m, ed_m] =
      theorem23_vanishing_check(solve_magnetostatic(scaled_loop(g, 0.5), g, kMBI, SolveConfig{}).state, kMBI);
  EXPECT_EQ(ed_m, 0.0);
  EXPECT_GT(bh_m, 0.0);
}

TEST(VanishingIntegrals, HandBuiltStateWithSpuriousBIsPositive) {
  // An electrostatic D together with a B that no current supports.
  const GridSpec g{16, 0.25};
  FieldState s = solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{}).state;
  s.B = discrete_curl_e2f(random_potentials(g, 6, 0.0, 0.3).A);
  const auto [bh, ed] = theorem23_vanishing_check(s, kMBI);
  EXPECT_GT(bh, 0.0);
  // Matches a direct quadrature of the closed form.
  double direct = 0.0;
  for (const FieldPoint& p : average_to_centers(s)) direct += dot(p.B, h_of_bd(p, kMBI));
  direct *= g.cell_volume();
  EXPECT_NEAR(bh, direct, 1e-12 * direct);
  EXPECT_GT(ed, 0.0);
}

TEST(ContaminatedStart, ChargeProblemLosesItsMagneticField) {
  const GridSpec g{16, 0.25};
  const DepositedSources dep = deposit_sources(charge(1.0), g);
  const Potentials x0 = random_potentials(g, 7, 0.5, 0.5);
  const SolveResult r = solve_variational(dep, kMBI, SolveMode::Saddle, SolveConfig{}, x0);
  ASSERT_TRUE(r.report.converged) << r.report.status;
  EXPECT_LE(r.state.B.max_abs(), 1e-6);
  const SolveResult ref = solve_electrostatic(charge(1.0), g, kMBI, SolveConfig{});
  EXPECT_LE(max_diff(r.state.D, ref.state.D), 1e-6);
}

TEST(ProbeUniqueness, SourceFreeStartsAllReachZero) {
  const ProbeProblem problem{SourceSpec{}, GridSpec{16, 0.25}, kMBI};
  const ProbeReport rep = probe_uniqueness(problem, 3, SolveConfig{});
  ASSERT_EQ(rep.starts.size(), 3u);
  EXPECT_TRUE(rep.all_converged);
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.experimental);
  EXPECT_LE(rep.spread_D, 1e-8);
  EXPECT_LE(rep.spread_B, 1e-8);
  for (const ProbeStart& s : rep.starts) {
    EXPECT_NEAR(s.start_E_max, 0.5, 1e-12);
    EXPECT_NEAR(s.start_B_max, 0.5, 1e-12);
    EXPECT_LE(s.D_max, 1e-8);
  }
}

TEST(ProbeUniqueness, StartsDependOnTheSeed) {
  const GridSpec g{16, 0.25};
  const Potentials a = random_potentials(g, 1, 0.5, 0.5);
  const Potentials b = random_potentials(g, 2, 0.5, 0.5);
  EXPECT_NE(a.phi.values, b.phi.values);
  EXPECT_EQ(random_potentials(g, 1, 0.5, 0.5).phi.values, a.phi.values);
  EXPECT_EQ(random_potentials(g, 1, 0.0, 0.5).phi.values.max_abs(), 0.0);
}

TEST(ProbeUniqueness, Preconditions) {
  const ProbeProblem problem{SourceSpec{}, GridSpec{16, 0.25}, kMBI};
  EXPECT_THROW(probe_uniqueness(problem, 1, SolveConfig{}), PreconditionError);
}

TEST(ProbeUniqueness, MbiWithChargeAndCurrentIsExperimental) {
  SourceSpec src = charge(0.5);
  src.current_loops.push_back({0.5, {}, 0.2, 2});
  const ProbeProblem problem{src, GridSpec{16, 0.25}, kMBI};
  SolveConfig cfg;
  cfg.max_iter = 2;
  const ProbeReport rep = probe_uniqueness(problem, 2, cfg);
  EXPECT_TRUE(rep.experimental);
}
