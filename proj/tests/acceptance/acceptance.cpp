// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "bifl/convexity.hpp"
#include "bifl/fields.hpp"
#include "bifl/grid.hpp"
#include "bifl/lagrangian.hpp"
#include "bifl/reference.hpp"
#include "bifl/solvers.hpp"
#include "bifl/sources.hpp"

using namespace bifl;

namespace {

constexpr double kZeroTol = 1e-6;          // 1: relative eigenvalue zero tolerance
constexpr double kHessianSeconds = 1.0;    // 1: runtime bound
constexpr double kDualityTol = 1e-9;       // 2
constexpr double kProfileTol = 2e-2;       // 3: relative L2 error of |D| and |E|
constexpr double kProbeTol = 1e-6;         // 4-7: in units of b
constexpr int kStarts = 8;                 // 4-7
constexpr double kLineNegTol = -1e-12;     // 8
constexpr double kLineFdTol = 1e-6;        // 8
constexpr double kQuadTol = 1e-8;          // 8
constexpr double kScalingFdTol = 1e-6;     // 9
constexpr double kGradientFdTol = 1e-6;    // 10
constexpr double kComplexTol = 1e-13;      // 11
constexpr double kSeriesRatioLo = 50.0;    // 12
constexpr double kSeriesRatioHi = 80.0;    // 12

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("%s  %2d  %-28s %s (%.2f s)\n", pass ? "PASS" : "FAIL", id, name, detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

class Sampler {
 public:
  explicit Sampler(unsigned seed) : rng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  Vec3 cube(double a) { return {uniform(-a, a), uniform(-a, a), uniform(-a, a)}; }
  Vec3 ball(double r) {
    Vec3 w;
    do {
      w = cube(1.0);
    } while (norm2(w) > 1.0);
    return r * w;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

template <typename Field>
double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (int c = 0; c < 3; ++c) {
    const auto u = a.c[static_cast<size_t>(c)].values();
    const auto w = b.c[static_cast<size_t>(c)].values();
    for (size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - w[i]));
  }
  return m;
}

// Relative L2 errors of |D| and |E| against the exact point-charge profiles
// over cell centers with rmin <= r <= rmax.
std::pair<double, double> profile_error(const SolveResult& r, const PointChargeSolution& sol, double rmin,
                                        double rmax) {
  const GridSpec& g = r.state.grid;
  double nd = 0.0, dd = 0.0, ne = 0.0, de = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        const double rr = norm(g.cell_center(i, j, k));
        if (rr < rmin || rr > rmax) continue;
        const double D = norm(edge_average(r.state.D, i, j, k));
        const double E = norm(edge_average(r.E, i, j, k));
        const double Dr = born_D(rr, sol);
        const double Er = born_E(rr, sol);
        nd += (D - Dr) * (D - Dr);
        dd += Dr * Dr;
        ne += (E - Er) * (E - Er);
        de += Er * Er;
      }
  return {std::sqrt(nd / dd), std::sqrt(ne / de)};
}

// Relative mismatch between scaling_probe and a central difference of
// total_energy under (B, D) -> lambda (B, D).
double scaling_fd_mismatch(const FieldState& s, const ModelParams& m) {
  const double step = 1e-5;
  auto energy_at = [&](double lam) {
    FieldState t = s;
    for (auto& c : t.B.c)
      for (double& v : c.values()) v *= lam;
    for (auto& c : t.D.c)
      for (double& v : c.values()) v *= lam;
    return total_energy(t, m);
  };
  const double fd = (energy_at(1 + step) - energy_at(1 - step)) / (2 * step);
  const double probe = scaling_probe(s, m);
  return std::abs(probe - fd) / std::abs(probe);
}

struct ScalingCase {
  std::string label;
  FieldState state;
  ModelParams model;
};
std::vector<ScalingCase> scaling_cases;

void criterion_hessian() {
  const auto t0 = Clock::now();
  const FieldPoint p{{1, 2, 3}, {4, 5, 6}};
  const SpectrumReport s = eigen_signature(energy_hessian(p, {1.0, Model::MBI, 1.0}), kZeroTol);
  const SpectrumReport t = eigen_signature(energy_hessian(p, {1.0, Model::MB, 1.0}), kZeroTol);
  const double secs = seconds_since(t0);
  const bool pass = s.n_pos == 4 && s.n_neg == 2 && s.n_zero == 0 && t.n_pos == 6 && secs < kHessianSeconds;
  report(1, "hessian-signature", pass, "MBI " + signature_string(s) + ", MB " + signature_string(t), secs);
}

void criterion_duality() {
  const auto t0 = Clock::now();
  Sampler s(2);
  double worst = 0.0;
  for (double b : {0.5, 1.0, 2.0})
    for (int i = 0; i < 1000; ++i) {
      const FieldPoint p{s.cube(3 * b), s.cube(3 * b)};
      for (const Model model : {Model::MBI, Model::MB}) {
        const ModelParams m{b, model, 1.0};
        const double u = energy_density(p, m);
        worst = std::max(worst, std::abs(legendre_pointwise(p, m) - u) / u);
      }
    }
  report(2, "legendre-duality", worst <= kDualityTol, fmt("max rel err %.2e", worst), seconds_since(t0));
}

void criterion_point_charge() {
  const auto t0 = Clock::now();
  const ModelParams m{1.0, Model::MBI, 1.0};
  const PointChargeSolution sol{1.0, 1.0};
  SourceSpec src;
  src.point_charges.push_back({1.0, {0, 0, 0}});
  struct Run {
    int n;
    double h;
    double err_D, err_E;
    bool converged;
  };
  std::vector<Run> runs{{64, 0.25, 0, 0, false}, {128, 0.125, 0, 0, false}, {128, 0.25, 0, 0, false}};
  for (Run& run : runs) {
    const GridSpec g{run.n, run.h};
    const SolveResult r = solve_electrostatic(src, g, m, SolveConfig{});
    const double rmin = std::max(6 * mollifier_width(g), sol.r0() / 4);
    const auto [eD, eE] = profile_error(r, sol, rmin, g.half_width() / 2);
    run.err_D = eD;
    run.err_E = eE;
    run.converged = r.report.converged;
    scaling_cases.push_back({"point charge n=" + std::to_string(run.n), r.state, m});
  }
  const Run& base = runs[0];
  bool pass = base.converged && base.err_D <= kProfileTol && base.err_E <= kProfileTol;
  for (size_t i = 1; i < runs.size(); ++i)
    pass = pass && runs[i].converged && runs[i].err_D < base.err_D && runs[i].err_E < base.err_E;
  char buf[256];
  std::snprintf(buf, sizeof buf, "D/E err n=64,L=8: %.2e/%.2e; n=128,L=8: %.2e/%.2e; n=128,L=16: %.2e/%.2e",
                base.err_D, base.err_E, runs[1].err_D, runs[1].err_E, runs[2].err_D, runs[2].err_E);
  report(3, "point-charge-oracle", pass, buf, seconds_since(t0));
}

struct ProbeSummary {
  bool converged;
  double D_max;  // largest ||D||_inf over starts
  double B_max;
  double spread_D;
  double spread_B;
};

ProbeSummary run_probe(const SourceSpec& src, const ModelParams& m, const std::string& label) {
  const GridSpec g{32, 0.25};
  const ProbeReport rep = probe_uniqueness({src, g, m}, kStarts, SolveConfig{}, true);
  ProbeSummary out{rep.all_converged, 0.0, 0.0, rep.spread_D, rep.spread_B};
  for (const ProbeStart& s : rep.starts) {
    out.D_max = std::max(out.D_max, s.D_max);
    out.B_max = std::max(out.B_max, s.B_max);
  }
  for (size_t i = 0; i < rep.states.size(); ++i)
    scaling_cases.push_back({label + " start " + std::to_string(i), rep.states[i], m});
  return out;
}

std::string probe_detail(const ProbeSummary& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "max|D| %.1e max|B| %.1e spread D %.1e B %.1e%s", p.D_max, p.B_max, p.spread_D,
                p.spread_B, p.converged ? "" : " (not converged)");
  return buf;
}

// Loop moment whose linear field peaks at `peak` on the probe grid.
double loop_moment_for_peak(double peak) {
  SourceSpec unit;
  unit.current_loops.push_back({1.0, {0, 0, 0}, 0.5, 2});
  const PerturbativeResult lin = perturbative_series(unit, GridSpec{32, 0.25}, {1e6, Model::MBI, 1.0}, 0);
  return peak / lin.max_linear_field;
}

void criteria_probes() {
  const ModelParams mbi{1.0, Model::MBI, 1.0};
  const ModelParams mb{1.0, Model::MB, 1.0};
  const double b = 1.0;
  {
    const auto t0 = Clock::now();
    const ProbeSummary p = run_probe(SourceSpec{}, mbi, "source-free");
    const bool pass = p.converged && p.D_max <= kProbeTol * b && p.B_max <= kProbeTol * b;
    report(4, "source-free-uniqueness", pass, probe_detail(p), seconds_since(t0));
  }
  SourceSpec charge;
  charge.point_charges.push_back({1.0, {0, 0, 0}});
  SourceSpec loop;
  loop.current_loops.push_back({loop_moment_for_peak(0.5), {0, 0, 0}, 0.5, 2});
  {
    const auto t0 = Clock::now();
    const ProbeSummary p = run_probe(charge, mbi, "charge");
    const bool pass = p.converged && p.B_max <= kProbeTol * b && p.spread_D <= kProbeTol * b;
    report(5, "charge-contaminated-A", pass, probe_detail(p), seconds_since(t0));
  }
  {
    const auto t0 = Clock::now();
    const ProbeSummary p = run_probe(loop, mbi, "loop");
    const bool pass = p.converged && p.D_max <= kProbeTol * b && p.spread_B <= kProbeTol * b;
    report(6, "loop-contaminated-phi", pass, probe_detail(p), seconds_since(t0));
  }
  {
    const auto t0 = Clock::now();
    SourceSpec both = charge;
    both.current_loops = loop.current_loops;
    const ProbeSummary p = run_probe(both, mb, "MB charge and loop");
    const bool pass = p.converged && p.spread_D <= kProbeTol * b && p.spread_B <= kProbeTol * b;
    report(7, "mb-charge-and-loop", pass, probe_detail(p), seconds_since(t0));
  }
}

// b^2 [sqrt(1 + (|B|^2 + |D|^2)/b^2) - 1] along the line p0 + t (p1 - p0).
double mb_root_term(const FieldPoint& p0, const FieldPoint& p1, double t, double b) {
  const Vec3 B = p0.B + (p1.B - p0.B) * t;
  const Vec3 D = p0.D + (p1.D - p0.D) * t;
  const double u = (norm2(B) + norm2(D)) / (b * b);
  return b * b * u / (std::sqrt(1.0 + u) + 1.0);
}

void criterion_line_identity() {
  const auto t0 = Clock::now();
  Sampler s(8);
  const double b = 1.0;
  const ModelParams m{b, Model::MB, 1.0};
  const double step = 1e-4;
  double min_value = INFINITY, fd_err = 0.0, quad_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const FieldPoint p0{s.ball(b), s.ball(b)};
    const FieldPoint p1{s.ball(b), s.ball(b)};
    const double t = s.uniform(0.0, 1.0);
    const double v = line_second_derivative(p0, p1, t, m);
    min_value = std::min(min_value, v);
    const double fd =
        (mb_root_term(p0, p1, t + step, b) - 2 * mb_root_term(p0, p1, t, b) + mb_root_term(p0, p1, t - step, b)) /
        (step * step);
    fd_err = std::max(fd_err, std::abs(fd - v) / std::abs(v));
    const double quad = boost::math::quadrature::gauss<double, 16>::integrate(
        [&](double x) { return line_second_derivative(p0, p1, x, m); }, 0.0, 1.0);
    const double exact = theorem4_bilinear_density(p0, p1, m);
    quad_err = std::max(quad_err, std::abs(quad - exact) / std::abs(exact));
  }
  const bool pass = min_value >= kLineNegTol && fd_err <= kLineFdTol && quad_err <= kQuadTol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "min %.2e, fd rel err %.2e, quadrature rel err %.2e", min_value, fd_err, quad_err);
  report(8, "line-second-derivative", pass, buf, seconds_since(t0));
}

void criterion_scaling() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  double smallest = INFINITY;
  int used = 0;
  for (const ScalingCase& c : scaling_cases) {
    if (c.state.D.max_abs() == 0.0 && c.state.B.max_abs() == 0.0) continue;
    // Source-free probe states are trivial up to the solver tolerance.
    if (std::max(c.state.D.max_abs(), c.state.B.max_abs()) <= kProbeTol) continue;
    smallest = std::min(smallest, scaling_probe(c.state, c.model));
    worst = std::max(worst, scaling_fd_mismatch(c.state, c.model));
    ++used;
  }
  const bool pass = used > 0 && smallest > 0.0 && worst <= kScalingFdTol;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d solutions, min probe %.3e, fd rel err %.2e", used, smallest, worst);
  report(9, "scaling-probe", pass, buf, seconds_since(t0));
}

void criterion_gradient() {
  const auto t0 = Clock::now();
  const GridSpec g{16, 0.25};
  SourceSpec src;
  src.point_charges.push_back({1.0, {0.1, 0.0, 0.0}});
  src.current_loops.push_back({0.5, {0.0, 0.0, 0.1}, 0.2, 2});
  const DepositedSources dep = deposit_sources(src, g);
  double worst = 0.0;
  for (const Model model : {Model::MBI, Model::MB}) {
    DiscreteLagrangian lag(dep, {1.0, model, 1.0});
    const Potentials x = random_potentials(g, 10, 0.4, 0.4);
    lag.set_point(x);
    Potentials grad = Potentials::zeros(g);
    lag.gradient(grad);
    const double step = 1e-4;
    for (int t = 0; t < 20; ++t) {
      const Potentials v = random_potentials(g, 1000 + static_cast<unsigned>(t), 0.3, 0.3);
      Potentials xp = x;
      Potentials xm = x;
      axpy(step, v, xp, {});
      axpy(-step, v, xm, {});
      lag.set_point(xp);
      const double up = lag.value();
      lag.set_point(xm);
      const double dn = lag.value();
      const double fd = (up - dn) / (2 * step);
      worst = std::max(worst, std::abs(dot(grad, v, {}) - fd) / std::abs(fd));
    }
  }
  report(10, "gradient-finite-difference", worst <= kGradientFdTol, fmt("max rel err %.2e", worst),
         seconds_since(t0));
}

void criterion_complex() {
  const auto t0 = Clock::now();
  Sampler s(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto randomize = [&](Array3& a) {
    for (double& v : a.values()) v = u(s.rng());
  };
  double worst = 0.0;
  for (int n : {16, 32}) {
    const GridSpec g{n, 2.0 / n};
    ScalarGrid phi = ScalarGrid::zeros(g);
    randomize(phi.values);
    const EdgeField gp = discrete_grad(phi);
    worst = std::max(worst, discrete_curl_e2f(gp).max_abs() / (gp.max_abs() / g.h));
    EdgeField a = EdgeField::zeros(g);
    for (auto& c : a.c) randomize(c);
    const FaceField ca = discrete_curl_e2f(a);
    worst = std::max(worst, discrete_div_faces(ca).values.max_abs() / (ca.max_abs() / g.h));
  }
  report(11, "discrete-complex", worst <= kComplexTol, fmt("max rel residual %.2e", worst), seconds_since(t0));
}

void criterion_series() {
  const auto t0 = Clock::now();
  const GridSpec g{32, 0.25};
  auto blob = [](double q) {
    SourceSpec s;
    s.charge_blobs.push_back({q, {0, 0, 0}, 0.5});
    return s;
  };
  const double unit = perturbative_series(blob(1e-3), g, {1.0, Model::MBI, 1.0}, 0).max_linear_field;
  const SourceSpec src = blob(1e-3 * 0.05 / unit);
  SolveConfig tight;
  tight.tol = 1e-13;
  double err[2];
  bool converged = true;
  for (int i = 0; i < 2; ++i) {
    const ModelParams m{i == 0 ? 1.0 : 2.0, Model::MBI, 1.0};
    const SolveResult ref = solve_electrostatic(src, g, m, tight);
    converged = converged && ref.report.converged;
    err[i] = max_diff(perturbative_series(src, g, m, 2).state.D, ref.state.D);
  }
  const double ratio = err[0] / err[1];
  const bool pass = converged && ratio >= kSeriesRatioLo && ratio <= kSeriesRatioHi;
  char buf[160];
  std::snprintf(buf, sizeof buf, "err b=1 %.3e, b=2 %.3e, ratio %.2f", err[0], err[1], ratio);
  report(12, "perturbative-series", pass, buf, seconds_since(t0));
}

}  // namespace

int main() {
  criterion_hessian();
  criterion_duality();
  criterion_point_charge();
  criteria_probes();
  criterion_line_identity();
  criterion_scaling();
  criterion_gradient();
  criterion_complex();
  criterion_series();
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
