#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include "bifl/errors.hpp"
#include "bifl/solvers.hpp"

namespace bifl {

namespace {

struct Mode {
  int k[3];
  double amplitude;
};

constexpr int kModes = 6;
constexpr int kMaxWave = 3;

std::vector<Mode> draw_modes(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> wave(1, kMaxWave);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<Mode> modes(kModes);
  for (Mode& md : modes) {
    for (int& k : md.k) k = wave(rng);
    md.amplitude = amp(rng);
  }
  return modes;
}

// Sum of sine products evaluated at offsets (in cells) off[a] from the node lattice.
void fill_modes(Array3& arr, const std::vector<Mode>& modes, int n, const double off[3]) {
  arr.fill(0.0);
  std::vector<double> sx(static_cast<std::size_t>(arr.nx()));
  std::vector<double> sy(static_cast<std::size_t>(arr.ny()));
  std::vector<double> sz(static_cast<std::size_t>(arr.nz()));
  const double pi = std::numbers::pi;
  for (const Mode& md : modes) {
    for (int i = 0; i < arr.nx(); ++i) sx[static_cast<std::size_t>(i)] = std::sin(md.k[0] * pi * (i + off[0]) / n);
    for (int j = 0; j < arr.ny(); ++j) sy[static_cast<std::size_t>(j)] = std::sin(md.k[1] * pi * (j + off[1]) / n);
    for (int k = 0; k < arr.nz(); ++k) sz[static_cast<std::size_t>(k)] = std::sin(md.k[2] * pi * (k + off[2]) / n);
    for (int k = 0; k < arr.nz(); ++k)
      for (int j = 0; j < arr.ny(); ++j) {
        const double yz = md.amplitude * sy[static_cast<std::size_t>(j)] * sz[static_cast<std::size_t>(k)];
        for (int i = 0; i < arr.nx(); ++i) arr(i, j, k) += yz * sx[static_cast<std::size_t>(i)];
      }
  }
}

double spread(const std::vector<EdgeField>& f) {
  double s = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b)
      for (int c = 0; c < 3; ++c) {
        const auto va = f[a].c[c].values();
        const auto vb = f[b].c[c].values();
        for (std::size_t i = 0; i < va.size(); ++i) s = std::max(s, std::abs(va[i] - vb[i]));
      }
  return s;
}

double spread(const std::vector<FaceField>& f) {
  double s = 0.0;
  for (std::size_t a = 0; a < f.size(); ++a)
    for (std::size_t b = a + 1; b < f.size(); ++b)
      for (int c = 0; c < 3; ++c) {
        const auto va = f[a].c[c].values();
        const auto vb = f[b].c[c].values();
        for (std::size_t i = 0; i < va.size(); ++i) s = std::max(s, std::abs(va[i] - vb[i]));
      }
  return s;
}

}  // namespace

Potentials random_potentials(const GridSpec& g, std::uint64_t seed, double e_max, double b_max) {
  g.validate();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::mt19937_64 rng(seq);
  Potentials x = Potentials::zeros(g);
  const int n = g.n;
  const double node_off[3] = {0.0, 0.0, 0.0};
  fill_modes(x.phi.values, draw_modes(rng), n, node_off);
  for (int a = 0; a < 3; ++a) {
    double off[3] = {0.0, 0.0, 0.0};
    off[a] = 0.5;
    fill_modes(x.A.c[a], draw_modes(rng), n, off);
  }
  mask_boundary(x);
  EdgeField E = EdgeField::zeros(g);
  grad_into(g, x.phi.values, E);
  FaceField B = FaceField::zeros(g);
  curl_e2f_into(g, x.A, B);
  const auto [e, b] = max_cell_fields(E, B);
  scale(x, e > 0.0 ? e_max / e : 0.0, {true, false});
  scale(x, b > 0.0 ? b_max / b : 0.0, {false, true});
  return x;
}

ProbeReport probe_uniqueness(const ProbeProblem& problem, int n_starts, const SolveConfig& cfg, bool keep_states) {
  if (n_starts < 2) throw PreconditionError("probe.n_starts must be at least 2");
  cfg.validate();
  problem.model.validate();
  const GridSpec& g = problem.grid;
  const DepositedSources dep = deposit_sources(problem.sources, g, problem.model.c);
  require_divergence_free(dep);
  const double b = problem.model.b;

  ProbeReport report;
  report.experimental =
      problem.model.model == Model::MBI && problem.sources.has_charge() && problem.sources.has_current();
  report.all_converged = true;
  std::vector<EdgeField> Ds;
  std::vector<FaceField> Bs;
  for (int s = 0; s < n_starts; ++s) {
    ProbeStart st;
    st.index = s;
    const auto t0 = std::chrono::steady_clock::now();
    const Potentials x0 = random_potentials(g, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(s), 0.5 * b, 0.5 * b);
    {
      EdgeField E = EdgeField::zeros(g);
      grad_into(g, x0.phi.values, E);
      FaceField B = FaceField::zeros(g);
      curl_e2f_into(g, x0.A, B);
      std::tie(st.start_E_max, st.start_B_max) = max_cell_fields(E, B);
    }
    try {
      SolveResult r = solve_variational(dep, problem.model, SolveMode::Saddle, cfg, x0);
      st.converged = r.report.converged;
      st.status = r.report.status;
      st.iterations = r.report.iterations;
      st.D_max = r.state.D.max_abs();
      st.B_max = r.state.B.max_abs();
      st.scaling = scaling_probe(r.state, problem.model);
      Ds.push_back(r.state.D);
      Bs.push_back(r.state.B);
      if (keep_states) report.states.push_back(std::move(r.state));
    } catch (const Error& e) {
      st.converged = false;
      st.status = e.what();
    }
    st.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.all_converged = report.all_converged && st.converged;
    report.field_scale = std::max({report.field_scale, st.D_max, st.B_max});
    report.starts.push_back(std::move(st));
  }
  report.spread_D = spread(Ds);
  report.spread_B = spread(Bs);
  report.threshold = 10.0 * cfg.tol * (b + report.field_scale);
  report.pass = report.all_converged && report.spread_D <= report.threshold && report.spread_B <= report.threshold;
  return report;
}

}  // namespace bifl
