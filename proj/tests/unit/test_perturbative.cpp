#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "bifl/errors.hpp"
#include "bifl/solvers.hpp"
#include "bifl/spectral_poisson.hpp"

using namespace bifl;

namespace {

const GridSpec kGrid{32, 0.25};

SourceSpec blob(double q) {
  SourceSpec s;
  s.charge_blobs.push_back({q, {0.0, 0.0, 0.0}, 0.5});
  return s;
}

SourceSpec loop(double moment) {
  SourceSpec s;
  s.current_loops.push_back({moment, {0.0, 0.0, 0.0}, 0.5, 2});
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

// Charge giving a linear field of `peak` (b = 1).
double charge_for_peak(double peak) {
  return peak / perturbative_series(blob(1e-3), kGrid, {1.0, Model::MBI, 1.0}, 0).max_linear_field * 1e-3;
}

SolveConfig tight() {
  SolveConfig cfg;
  cfg.tol = 1e-13;
  return cfg;
}

}  // namespace

TEST(PerturbativeSeries, OrderZeroIsTheLinearSolution) {
  const double q = charge_for_peak(0.05);
  const PerturbativeResult r = perturbative_series(blob(q), kGrid, {1.0, Model::MBI, 1.0}, 0);
  EXPECT_NEAR(r.max_linear_field, 0.05, 1e-12);
  ASSERT_EQ(r.correction_norms.size(), 1u);
  const DepositedSources dep = deposit_sources(blob(q), kGrid);
  SpectralPoisson sp(kGrid);
  Array3 rhs = dep.rho.values;
  for (double& v : rhs.values()) v *= kFourPi;
  Array3 phi(rhs.dims());
  sp.solve_nodes(rhs, phi);
  double diff = 0.0;
  for (size_t i = 0; i < phi.size(); ++i) diff = std::max(diff, std::abs(phi.values()[i] - r.potentials.phi.values.values()[i]));
  EXPECT_LE(diff, 1e-14 * phi.max_abs());
  // The state carries the model D at the linear E, which differs by O(E^2 / b^2).
  EXPECT_GT(max_diff(r.state.D, r.E), 0.0);
  EXPECT_LE(max_diff(r.state.D, r.E), 0.05 * 0.05 * r.E.max_abs());
}

TEST(PerturbativeSeries, FirstCorrectionScalesAsInverseBSquared) {
  const double q = charge_for_peak(0.05);
  for (const Model model : {Model::MBI, Model::MB}) {
    const PerturbativeResult r1 = perturbative_series(blob(q), kGrid, {1.0, model, 1.0}, 1);
    const PerturbativeResult r2 = perturbative_series(blob(q), kGrid, {2.0, model, 1.0}, 1);
    ASSERT_EQ(r1.correction_norms.size(), 2u);
    EXPECT_EQ(r1.correction_norms[0], r2.correction_norms[0]);
    EXPECT_NEAR(r1.correction_norms[1] / r2.correction_norms[1], 4.0, 1e-10);
    // The nonlinear response weakens the field.
    EXPECT_LT(r1.E.max_abs(), r1.correction_norms[0]);
  }
}

TEST(PerturbativeSeries, ConvergesToTheNewtonSolution) {
  const double q = charge_for_peak(0.05);
  const ModelParams m{1.0, Model::MBI, 1.0};
  const SolveResult ref = solve_electrostatic(blob(q), kGrid, m, tight());
  ASSERT_TRUE(ref.report.converged) << ref.report.status;
  double prev = 1.0;
  for (int order = 0; order <= 2; ++order) {
    const PerturbativeResult r = perturbative_series(blob(q), kGrid, m, order);
    const double err = max_diff(r.state.D, ref.state.D) / ref.state.D.max_abs();
    // Each order gains a factor of roughly (0.05)^2.
    EXPECT_LT(err, 0.02 * prev) << "order " << order;
    prev = err;
  }
}

TEST(PerturbativeSeries, ErrorOfOrderOneScalesAsInverseBFourth) {
  const double q = charge_for_peak(0.05);
  double err[2];
  for (int i = 0; i < 2; ++i) {
    const ModelParams m{i == 0 ? 1.0 : 2.0, Model::MBI, 1.0};
    const SolveResult ref = solve_electrostatic(blob(q), kGrid, m, tight());
    ASSERT_TRUE(ref.report.converged);
    err[i] = max_diff(perturbative_series(blob(q), kGrid, m, 1).state.D, ref.state.D);
  }
  const double ratio = err[0] / err[1];
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(PerturbativeSeries, MagnetostaticSeriesTracksNewton) {
  const ModelParams m{1.0, Model::MBI, 1.0};
  const double unit = perturbative_series(loop(1.0), kGrid, {100.0, Model::MBI, 1.0}, 0).max_linear_field;
  const SourceSpec src = loop(0.05 / unit);
  const SolveResult ref = solve_magnetostatic(src, kGrid, m, tight());
  ASSERT_TRUE(ref.report.converged);
  const double e0 = max_diff(perturbative_series(src, kGrid, m, 0).state.B, ref.state.B);
  const double e2 = max_diff(perturbative_series(src, kGrid, m, 2).state.B, ref.state.B);
  EXPECT_LT(e2, 1e-4 * e0);
}

TEST(PerturbativeSeries, Preconditions) {
  const ModelParams m{1.0, Model::MBI, 1.0};
  EXPECT_THROW(perturbative_series(blob(1e-3), kGrid, m, 3), PreconditionError);
  EXPECT_THROW(perturbative_series(blob(1e-3), kGrid, m, -1), PreconditionError);
  const double q = charge_for_peak(0.2);
  try {
    perturbative_series(blob(q), kGrid, m, 1);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("exceeds 0.1 b"), std::string::npos);
  }
}
