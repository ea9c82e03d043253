#include "bifl/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bifl/errors.hpp"

namespace bifl {

bool SourceSpec::has_charge() const {
  return !point_charges.empty() || !charge_blobs.empty() || static_cast<bool>(smooth_rho);
}

bool SourceSpec::has_current() const {
  return !current_loops.empty() || static_cast<bool>(smooth_j);
}

double DepositedSources::relative_div_j() const {
  return j_max > 0.0 ? grid.h * div_j_max / j_max : 0.0;
}

namespace {

double distance_to_boundary(const GridSpec& g, const Vec3& p) {
  const double L = g.half_width();
  return std::min({L - std::abs(p.x), L - std::abs(p.y), L - std::abs(p.z)});
}

void require_inside(const GridSpec& g, const Vec3& p, double support, const char* what) {
  const double margin = 4.0 * g.h + support;
  if (distance_to_boundary(g, p) < margin) {
    std::ostringstream os;
    os << what << " at (" << p.x << ", " << p.y << ", " << p.z << ") must lie at least " << margin
       << " inside the box boundary";
    throw PreconditionError(os.str());
  }
}

double gaussian(double r2, double width) {
  const double norm = std::pow(2.0 * std::numbers::pi * width * width, -1.5);
  return norm * std::exp(-0.5 * r2 / (width * width));
}

Vec3 edge_midpoint(const GridSpec& g, int axis, int i, int j, int k) {
  Vec3 p = g.node_position(i, j, k);
  p[axis] += 0.5 * g.h;
  return p;
}

Vec3 face_center(const GridSpec& g, int axis, int i, int j, int k) {
  Vec3 p = g.node_position(i, j, k);
  for (int d = 0; d < 3; ++d)
    if (d != axis) p[d] += 0.5 * g.h;
  return p;
}

}  // namespace

DepositedSources deposit_sources(const SourceSpec& src, const GridSpec& g, double c) {
  g.validate();
  const int n = g.n;
  DepositedSources out{g, ScalarGrid::zeros(g), EdgeField::zeros(g), 0.0, 0.0, 0.0};
  Array3& rho = out.rho.values;
  const double vol = g.cell_volume();

  for (const auto& pc : src.point_charges) {
    require_inside(g, pc.pos, 0.0, "point charge");
    const double sigma = mollifier_width(g);
    Array3 w(placement_dims(Placement::Node, n));
    double sum = 0.0;
    for (int k = 1; k < n; ++k)
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) {
          const double r2 = norm2(g.node_position(i, j, k) - pc.pos);
          const double v = std::exp(-0.5 * r2 / (sigma * sigma));
          w(i, j, k) = v;
          sum += v;
        }
    const double scale = pc.q / (sum * vol);
    for (int k = 1; k < n; ++k)
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) rho(i, j, k) += scale * w(i, j, k);
  }

  for (const auto& blob : src.charge_blobs) {
    if (!(blob.width > 0.0)) throw PreconditionError("charge blob width must be positive");
    require_inside(g, blob.pos, 4.0 * blob.width, "charge blob");
    for (int k = 1; k < n; ++k)
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i)
          rho(i, j, k) += blob.q * gaussian(norm2(g.node_position(i, j, k) - blob.pos), blob.width);
  }

  const bool smooth_checked = src.smooth_support_radius > 0.0;
  if (smooth_checked && (src.smooth_rho || src.smooth_j)) {
    require_inside(g, {0.0, 0.0, 0.0}, src.smooth_support_radius, "smooth source support");
  }
  if (src.smooth_rho) {
    for (int k = 1; k < n; ++k)
      for (int j = 1; j < n; ++j)
        for (int i = 1; i < n; ++i) rho(i, j, k) += src.smooth_rho(g.node_position(i, j, k));
  }

  if (!src.current_loops.empty()) {
    FaceField M = FaceField::zeros(g);
    for (const auto& loop : src.current_loops) {
      if (!(loop.width > 0.0)) throw PreconditionError("current loop width must be positive");
      if (loop.axis < 0 || loop.axis > 2) throw PreconditionError("current loop axis must be 0, 1 or 2");
      require_inside(g, loop.pos, 4.0 * loop.width, "current loop");
      Array3& Ma = M.c[static_cast<size_t>(loop.axis)];
      for (int k = 0; k < Ma.nz(); ++k)
        for (int j = 0; j < Ma.ny(); ++j)
          for (int i = 0; i < Ma.nx(); ++i) {
            const Vec3 p = face_center(g, loop.axis, i, j, k);
            Ma(i, j, k) += loop.moment * gaussian(norm2(p - loop.pos), loop.width);
          }
    }
    EdgeField curlM = discrete_curl_f2e(M);
    for (int a = 0; a < 3; ++a) {
      auto dst = out.j.c[static_cast<size_t>(a)].values();
      auto s = curlM.c[static_cast<size_t>(a)].values();
      for (size_t q = 0; q < dst.size(); ++q) dst[q] += c * s[q];
    }
  }

  if (src.smooth_j) {
    for (int a = 0; a < 3; ++a) {
      Array3& ja = out.j.c[static_cast<size_t>(a)];
      for (int k = 0; k < ja.nz(); ++k)
        for (int j = 0; j < ja.ny(); ++j)
          for (int i = 0; i < ja.nx(); ++i) ja(i, j, k) += src.smooth_j(edge_midpoint(g, a, i, j, k))[a];
    }
  }
  apply_dirichlet(out.j);

  double total = 0.0;
  for (double v : rho.values()) total += v;
  out.total_charge = total * vol;

  const ScalarGrid divj = discrete_div(out.j);
  double dmax = 0.0;
  for (int k = 1; k < n; ++k)
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) dmax = std::max(dmax, std::abs(divj.values(i, j, k)));
  out.div_j_max = dmax;
  out.j_max = out.j.max_abs();
  return out;
}

void require_divergence_free(const DepositedSources& s, double tol) {
  if (s.relative_div_j() > tol) {
    std::ostringstream os;
    os << "deposited current is not divergence-free: h|div j|/|j| = " << s.relative_div_j()
       << " exceeds " << tol;
    throw PreconditionError(os.str());
  }
}

}  // namespace bifl
