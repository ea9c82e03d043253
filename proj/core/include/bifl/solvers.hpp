#pragma once

// Variational solvers for the stationary field equations.
//
// The discrete Lagrangian is minimized over phi (electrostatics), maximized
// over A (magnetostatics) or driven to its saddle point over (phi, A) by
// damped Newton with matrix-free Krylov inner solves preconditioned by the
// exact inverse Laplacians of the linear theory.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bifl/fields.hpp"
#include "bifl/grid.hpp"
#include "bifl/lagrangian.hpp"
#include "bifl/sources.hpp"

namespace bifl {

struct LineSearchConfig {
  double armijo = 1e-4;  ///< sufficient-decrease constant
  double shrink = 0.5;   ///< step reduction per backtrack
  int max_backtracks = 60;
};

struct SolveConfig {
  double tol = 1e-10;  ///< relative gradient tolerance per potential block
  int max_iter = 100;
  LineSearchConfig line_search;
  double feasibility_margin = 1e-12;  ///< minimum cell radicand for an accepted iterate
  std::uint64_t seed = 0;
  double inner_tol = 1e-2;  ///< Krylov tolerance relative to the outer residual
  int max_inner_iter = 2000;

  /// Throws PreconditionError naming the offending field.
  void validate() const;
};

struct ConstraintResidual {
  double gauss = 0.0;           ///< ||div D - 4 pi rho||_inf over interior nodes
  double gauss_relative = 0.0;  ///< gauss / ||4 pi rho||_inf (absolute if rho = 0)
  double div_B = 0.0;           ///< ||div B||_inf over cells
  double ampere = 0.0;          ///< ||curl H - 4 pi j / c||_inf over interior edges
  double ampere_relative = 0.0;
};

struct SolveReport {
  bool converged = false;
  std::string status;
  int iterations = 0;
  int krylov_iterations = 0;
  /// Preconditioned gradient norm relative to the starting point, one entry
  /// per accepted iterate (entry 0 is the start).
  std::vector<double> residual_history;
  /// Discrete Lagrangian after each accepted iterate.
  std::vector<double> lagrangian_history;
  double final_energy = 0.0;
  double lagrangian = 0.0;
  double residual_phi = 0.0;  ///< final ||dL/dphi||_inf / reference
  double residual_A = 0.0;
  double min_radicand = 1.0;
  ConstraintResidual constraint_residual;
  double wall_time = 0.0;  ///< seconds
};

struct SolveResult {
  FieldState state;
  EdgeField E;  ///< -grad phi
  FaceField H;  ///< constitutive H recovered from the variational derivative
  SolveReport report;
};

enum class SolveMode { Minimize, Maximize, Saddle };

/// Newton driver on already deposited sources. x0 defaults to zero potentials.
/// Minimize varies phi only, Maximize varies A only, Saddle varies both.
/// Throws InfeasiblePointError if x0 is infeasible.
SolveResult solve_variational(const DepositedSources& sources, const ModelParams& m, SolveMode mode,
                              const SolveConfig& cfg, const std::optional<Potentials>& x0 = std::nullopt);

/// Minimum over phi with A = 0. Throws PreconditionError if src carries current.
SolveResult solve_electrostatic(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg);
/// Maximum over A in Coulomb gauge with phi = 0. Throws PreconditionError if
/// src carries charge or the deposited current is not divergence-free.
SolveResult solve_magnetostatic(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg);
/// Saddle over (phi, A) for the MB model. Throws ModelError for MBI.
SolveResult solve_mb_stationary(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                const SolveConfig& cfg);
/// Saddle over (phi, A) for either model from an optional start.
SolveResult solve_coupled(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                          const SolveConfig& cfg, const std::optional<Potentials>& x0 = std::nullopt);

/// FieldState for given potentials: B = curl A, D from the variational derivative.
FieldState state_from_potentials(const DepositedSources& sources, const ModelParams& m, const Potentials& x);

/// Constraint residuals of a state against deposited sources.
ConstraintResidual constraint_residuals(const FieldState& state, const FaceField& H,
                                        const DepositedSources& sources, const ModelParams& m);

/// h^3 sum over cells of scaling_derivative_density at the collocated fields.
double scaling_probe(const FieldState& state, const ModelParams& m);

/// (h^3 sum B.H, h^3 sum E.D) over cells with the pointwise closed forms.
std::pair<double, double> theorem23_vanishing_check(const FieldState& state, const ModelParams& m);

// Multi-start uniqueness probes.

struct ProbeProblem {
  SourceSpec sources;
  GridSpec grid;
  ModelParams model;
};

struct ProbeStart {
  int index = 0;
  bool converged = false;
  std::string status;
  int iterations = 0;
  double start_E_max = 0.0;  ///< max cell |E| of the start
  double start_B_max = 0.0;
  double D_max = 0.0;        ///< ||D||_inf of the converged state
  double B_max = 0.0;
  double scaling = 0.0;      ///< scaling_probe of the converged state
  double wall_time = 0.0;
};

struct ProbeReport {
  std::vector<ProbeStart> starts;
  double spread_D = 0.0;  ///< max pairwise ||D_i - D_j||_inf
  double spread_B = 0.0;
  double field_scale = 0.0;
  double threshold = 0.0;  ///< 10 tol (b + field_scale)
  bool all_converged = false;
  /// MBI with both charge and current: uniqueness is not established, so the
  /// spread is reported but pass is never asserted.
  bool experimental = false;
  bool pass = false;
  std::vector<FieldState> states;  ///< filled when requested
};

/// Smooth random Dirichlet potentials. The phi part is scaled so the largest
/// cell |E| equals e_max and the A part so the largest cell |B| equals b_max;
/// a zero cap leaves that block zero.
Potentials random_potentials(const GridSpec& g, std::uint64_t seed, double e_max, double b_max);

/// Runs solve_coupled from n_starts random starts with |E|, |B| capped at b/2.
/// Throws PreconditionError if n_starts < 2.
ProbeReport probe_uniqueness(const ProbeProblem& problem, int n_starts, const SolveConfig& cfg,
                             bool keep_states = false);

// Perturbative series in 1/b^2.

struct PerturbativeResult {
  FieldState state;
  Potentials potentials;
  EdgeField E;
  /// Entry 0: ||(E, B)||_inf of the linear solution; entry k: of the k-th correction.
  std::vector<double> correction_norms;
  double max_linear_field = 0.0;  ///< max cell |E|, |B| of the linear solution
};

/// Order 0 solves linear electro/magnetostatics; order k re-solves the linear
/// problem with the nonlinear remainder of the constitutive coefficients,
/// truncated at b^{-2k}, evaluated at the order k-1 fields.
/// Throws PreconditionError unless order is 0, 1 or 2 and the linear field
/// stays below 0.1 b.
PerturbativeResult perturbative_series(const SourceSpec& src, const GridSpec& g, const ModelParams& m,
                                       int order);

}  // namespace bifl
