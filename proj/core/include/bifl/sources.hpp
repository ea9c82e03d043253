#pragma once

#include <functional>
#include <vector>

#include "bifl/grid.hpp"

namespace bifl {

struct PointCharge {
  double q = 0.0;
  Vec3 pos;
};

/// Normalized Gaussian charge density with total charge q.
struct ChargeBlob {
  double q = 0.0;
  Vec3 pos;
  double width = 1.0;
};

/// Azimuthal current around an axis through pos, generated as c * curl M of a
/// Gaussian magnetization M of total moment `moment` along `axis`. Deposited
/// currents are discretely divergence-free by construction.
struct CurrentLoop {
  double moment = 0.0;
  Vec3 pos;
  double width = 1.0;
  int axis = 2;
};

struct SourceSpec {
  std::vector<PointCharge> point_charges;
  std::vector<ChargeBlob> charge_blobs;
  std::vector<CurrentLoop> current_loops;
  /// Optional analytic densities sampled at nodes / edge midpoints.
  std::function<double(const Vec3&)> smooth_rho;
  std::function<Vec3(const Vec3&)> smooth_j;
  /// Radius about the origin outside which smooth_rho and smooth_j vanish;
  /// zero disables the placement check for them.
  double smooth_support_radius = 0.0;

  bool has_charge() const;
  bool has_current() const;
};

struct DepositedSources {
  GridSpec grid;
  ScalarGrid rho;
  /// Stores the physical current j; the Lagrangian couples to j / c.
  EdgeField j;
  double total_charge = 0.0;  ///< h^3 sum of rho
  double div_j_max = 0.0;     ///< ||div j||_inf over interior nodes
  double j_max = 0.0;

  /// Dimensionless compatibility measure h ||div j|| / ||j|| (0 when j = 0).
  double relative_div_j() const;
};

/// Mollifier width for point charges.
inline double mollifier_width(const GridSpec& g) { return 2.0 * g.h; }

/// Throws PreconditionError when a source does not lie at least 4h inside the box.
DepositedSources deposit_sources(const SourceSpec& src, const GridSpec& g, double c = 1.0);

/// Throws PreconditionError if the deposited current violates stationary
/// charge conservation (relative_div_j above tol).
void require_divergence_free(const DepositedSources& s, double tol = 1e-10);

}  // namespace bifl
