#pragma once

// Exact fast solvers for the constant-coefficient discrete operators of the
// Yee complex with homogeneous Dirichlet data on the box boundary.
//
//   nodes: (-div grad) u = f on interior nodes                (DST-I^3)
//   edges: (curl^T curl - grad div) a = f on interior edges   (DCT-II along the
//          edge axis, DST-I across it)
//
// The edge operator maps divergence-free fields to divergence-free fields, so
// it inverts curl^T curl on the Coulomb-gauge subspace.

#include <memory>

#include "bifl/grid.hpp"

namespace bifl {

class SpectralPoisson {
 public:
  explicit SpectralPoisson(const GridSpec& g);
  ~SpectralPoisson();
  SpectralPoisson(const SpectralPoisson&) = delete;
  SpectralPoisson& operator=(const SpectralPoisson&) = delete;
  SpectralPoisson(SpectralPoisson&&) noexcept;
  SpectralPoisson& operator=(SpectralPoisson&&) noexcept;

  const GridSpec& grid() const;

  /// Solves -Laplace(u) = rhs on interior nodes; boundary entries of rhs are
  /// ignored and boundary entries of u are zero.
  void solve_nodes(const Array3& rhs, Array3& u) const;
  /// Solves the edge vector Laplacian on interior (non-tangential) edges.
  void solve_edges(const EdgeField& rhs, EdgeField& a) const;

  /// Applies -Laplace on nodes (boundary treated as zero), for tests.
  void apply_nodes(const Array3& u, Array3& out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bifl
