#pragma once

// Discrete Lagrangian of the potentials on the Yee grid:
//
//   L(phi, A) = h^3 sum_c ell(e2_c, b2_c, s_c) - h^3 sum rho phi + (h^3/c) sum j.A
//
// with E = -grad phi on edges and B = curl A on faces. Per cell,
//   e2 = (1/4) sum of E^2 over the 12 cell edges,
//   b2 = (1/2) sum of B^2 over the 6 cell faces,
//   s  = Ec . Bc with Ec, Bc the edge/face averages at the cell center.
// Averaging squares rather than squaring averages keeps the functional
// strictly convex in phi and concave in A on the whole grid (no checkerboard
// null modes).

#include <functional>
#include <utility>

#include "bifl/fields.hpp"
#include "bifl/grid.hpp"
#include "bifl/sources.hpp"

namespace bifl {

struct Potentials {
  ScalarGrid phi;
  EdgeField A;

  static Potentials zeros(const GridSpec& g);
};

/// Selects the potential blocks an operation acts on.
struct Blocks {
  bool phi = true;
  bool A = true;
};

double dot(const Potentials& a, const Potentials& b, Blocks blocks);
/// y += alpha x on the selected blocks.
void axpy(double alpha, const Potentials& x, Potentials& y, Blocks blocks);
void scale(Potentials& x, double alpha, Blocks blocks);
void set_zero(Potentials& x, Blocks blocks);
/// Zeroes boundary nodes of phi and tangential boundary edges of A.
void mask_boundary(Potentials& x);

struct CellInvariants {
  double e2 = 0.0;
  double b2 = 0.0;
  double s = 0.0;
  Vec3 Ec;
  Vec3 Bc;
};

CellInvariants cell_invariants(const EdgeField& E, const FaceField& B, int i, int j, int k);

/// Largest cell values of sqrt(e2) and sqrt(b2).
std::pair<double, double> max_cell_fields(const EdgeField& E, const FaceField& B);

/// Partial derivatives of the cell density with respect to (e2, b2, s).
struct CellPartials {
  double f_e2 = 0.0;
  double f_b2 = 0.0;
  double f_s = 0.0;
};

using CellPartialsFn = std::function<CellPartials(const CellInvariants&)>;

/// Exact partials of the model density.
CellPartials cell_partials(const CellInvariants& c, const ModelParams& m);
/// Radicand R of the model density ell = (b^2/4pi)(1 - sqrt(R)).
double cell_radicand(const CellInvariants& c, const ModelParams& m);
double cell_density(const CellInvariants& c, const ModelParams& m);

/// gE = d/dE and gB = d/dB of h^3 sum_c ell_c, where ell has the given partials.
void field_gradients(const EdgeField& E, const FaceField& B, const CellPartialsFn& rule,
                     EdgeField& gE, FaceField& gB);

class DiscreteLagrangian {
 public:
  DiscreteLagrangian(const DepositedSources& sources, const ModelParams& m);

  const GridSpec& grid() const { return grid_; }
  const ModelParams& model() const { return model_; }
  const DepositedSources& sources() const { return sources_; }

  /// Evaluates E, B and the cell radicands at x.
  void set_point(const Potentials& x);
  const Potentials& point() const { return x_; }
  const EdgeField& E() const { return E_; }
  const FaceField& B() const { return B_; }

  double min_radicand() const { return min_radicand_; }

  /// L at the current point. Throws InfeasiblePointError if a radicand is negative.
  double value() const;
  /// h^3 sum_c ell_c alone.
  double field_part() const;

  /// dL/dphi and dL/dA with Dirichlet entries zeroed.
  void gradient(Potentials& g) const;

  /// Second derivative of L applied to v, restricted to the selected blocks
  /// (off-diagonal coupling is included when both are selected).
  void apply_hessian(const Potentials& v, Potentials& out, Blocks blocks) const;

  /// Constitutive fields recovered from the variational derivatives:
  /// D = 4 pi dF/dE / h^3 on edges and H = -4 pi dF/dB / h^3 on faces,
  /// where F is the field part. div D = 4 pi rho holds iff dL/dphi = 0.
  void constitutive_fields(EdgeField& D, FaceField& H) const;

 private:
  void ensure_field_gradients() const;

  GridSpec grid_;
  ModelParams model_;
  DepositedSources sources_;
  Potentials x_;
  EdgeField E_;
  FaceField B_;
  double min_radicand_ = 1.0;
  mutable bool have_gradients_ = false;
  mutable EdgeField gE_;
  mutable FaceField gB_;
  // Scratch for Hessian products.
  mutable EdgeField dE_;
  mutable FaceField dB_;
  mutable EdgeField outE_;
  mutable FaceField outB_;
};

/// Removes the gradient part of A on interior nodes (Coulomb gauge): A <- A - grad u
/// with -Laplace(u) = -div A. Leaves curl A unchanged.
class SpectralPoisson;
void coulomb_project(const SpectralPoisson& poisson, EdgeField& A);

}  // namespace bifl
