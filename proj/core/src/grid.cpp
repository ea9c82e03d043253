#include "bifl/grid.hpp"

#include <algorithm>
#include <cmath>

#include "bifl/errors.hpp"
#include "bifl/parallel.hpp"

namespace bifl {

void GridSpec::validate() const {
  if (n < 8 || n % 2 != 0) throw PreconditionError("grid.n must be even and at least 8");
  if (!(std::isfinite(h) && h > 0.0)) throw PreconditionError("grid.h must be positive");
}

Vec3 GridSpec::node_position(int i, int j, int k) const {
  const double L = half_width();
  return {-L + i * h, -L + j * h, -L + k * h};
}

Vec3 GridSpec::cell_center(int i, int j, int k) const {
  const double L = half_width();
  return {-L + (i + 0.5) * h, -L + (j + 0.5) * h, -L + (k + 0.5) * h};
}

std::array<int, 3> placement_dims(Placement p, int n) {
  switch (p) {
    case Placement::Node: return {n + 1, n + 1, n + 1};
    case Placement::EdgeX: return {n, n + 1, n + 1};
    case Placement::EdgeY: return {n + 1, n, n + 1};
    case Placement::EdgeZ: return {n + 1, n + 1, n};
    case Placement::FaceX: return {n + 1, n, n};
    case Placement::FaceY: return {n, n + 1, n};
    case Placement::FaceZ: return {n, n, n + 1};
    case Placement::Cell: return {n, n, n};
  }
  throw PreconditionError("unknown placement tag");
}

Placement edge_placement(int axis) {
  return static_cast<Placement>(static_cast<std::uint32_t>(Placement::EdgeX) + axis);
}

Placement face_placement(int axis) {
  return static_cast<Placement>(static_cast<std::uint32_t>(Placement::FaceX) + axis);
}

Array3::Array3(int nx, int ny, int nz, double fill)
    : nx_(nx), ny_(ny), nz_(nz),
      data_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
                static_cast<std::size_t>(nz),
            fill) {}

void Array3::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Array3::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

ScalarGrid ScalarGrid::zeros(const GridSpec& g) {
  return {g, Array3(placement_dims(Placement::Node, g.n))};
}

EdgeField EdgeField::zeros(const GridSpec& g) {
  EdgeField f{g, {}};
  for (int a = 0; a < 3; ++a) f.c[static_cast<size_t>(a)] = Array3(placement_dims(edge_placement(a), g.n));
  return f;
}

double EdgeField::max_abs() const {
  return std::max({c[0].max_abs(), c[1].max_abs(), c[2].max_abs()});
}

FaceField FaceField::zeros(const GridSpec& g) {
  FaceField f{g, {}};
  for (int a = 0; a < 3; ++a) f.c[static_cast<size_t>(a)] = Array3(placement_dims(face_placement(a), g.n));
  return f;
}

double FaceField::max_abs() const {
  return std::max({c[0].max_abs(), c[1].max_abs(), c[2].max_abs()});
}

FieldState FieldState::zeros(const GridSpec& g) {
  return {g, FaceField::zeros(g), EdgeField::zeros(g), ScalarGrid::zeros(g), EdgeField::zeros(g)};
}

namespace {

template <typename Body>
void for_each_index(const Array3& a, Body&& body) {
  const int nx = a.nx();
  const int ny = a.ny();
  parallel_for(0, a.nz(), [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) body(i, j, k);
  });
}

}  // namespace

void grad_into(const GridSpec& g, const Array3& phi, EdgeField& out) {
  const double ih = 1.0 / g.h;
  auto& ox = out.c[0];
  auto& oy = out.c[1];
  auto& oz = out.c[2];
  for_each_index(ox, [&](int i, int j, int k) { ox(i, j, k) = (phi(i + 1, j, k) - phi(i, j, k)) * ih; });
  for_each_index(oy, [&](int i, int j, int k) { oy(i, j, k) = (phi(i, j + 1, k) - phi(i, j, k)) * ih; });
  for_each_index(oz, [&](int i, int j, int k) { oz(i, j, k) = (phi(i, j, k + 1) - phi(i, j, k)) * ih; });
}

void curl_e2f_into(const GridSpec& g, const EdgeField& u, FaceField& out) {
  const double ih = 1.0 / g.h;
  const auto& ax = u.c[0];
  const auto& ay = u.c[1];
  const auto& az = u.c[2];
  auto& bx = out.c[0];
  auto& by = out.c[1];
  auto& bz = out.c[2];
  for_each_index(bx, [&](int i, int j, int k) {
    bx(i, j, k) = ((az(i, j + 1, k) - az(i, j, k)) - (ay(i, j, k + 1) - ay(i, j, k))) * ih;
  });
  for_each_index(by, [&](int i, int j, int k) {
    by(i, j, k) = ((ax(i, j, k + 1) - ax(i, j, k)) - (az(i + 1, j, k) - az(i, j, k))) * ih;
  });
  for_each_index(bz, [&](int i, int j, int k) {
    bz(i, j, k) = ((ay(i + 1, j, k) - ay(i, j, k)) - (ax(i, j + 1, k) - ax(i, j, k))) * ih;
  });
}

void curl_f2e_into(const GridSpec& g, const FaceField& w, EdgeField& out) {
  const double ih = 1.0 / g.h;
  const auto& bx = w.c[0];
  const auto& by = w.c[1];
  const auto& bz = w.c[2];
  auto& ax = out.c[0];
  auto& ay = out.c[1];
  auto& az = out.c[2];
  for_each_index(ax, [&](int i, int j, int k) {
    ax(i, j, k) = ((bz.at_or_zero(i, j, k) - bz.at_or_zero(i, j - 1, k)) -
                   (by.at_or_zero(i, j, k) - by.at_or_zero(i, j, k - 1))) * ih;
  });
  for_each_index(ay, [&](int i, int j, int k) {
    ay(i, j, k) = ((bx.at_or_zero(i, j, k) - bx.at_or_zero(i, j, k - 1)) -
                   (bz.at_or_zero(i, j, k) - bz.at_or_zero(i - 1, j, k))) * ih;
  });
  for_each_index(az, [&](int i, int j, int k) {
    az(i, j, k) = ((by.at_or_zero(i, j, k) - by.at_or_zero(i - 1, j, k)) -
                   (bx.at_or_zero(i, j, k) - bx.at_or_zero(i, j - 1, k))) * ih;
  });
}

void div_into(const GridSpec& g, const EdgeField& u, Array3& out) {
  const double ih = 1.0 / g.h;
  const auto& ux = u.c[0];
  const auto& uy = u.c[1];
  const auto& uz = u.c[2];
  for_each_index(out, [&](int i, int j, int k) {
    out(i, j, k) = ((ux.at_or_zero(i, j, k) - ux.at_or_zero(i - 1, j, k)) +
                    (uy.at_or_zero(i, j, k) - uy.at_or_zero(i, j - 1, k)) +
                    (uz.at_or_zero(i, j, k) - uz.at_or_zero(i, j, k - 1))) * ih;
  });
}

EdgeField discrete_grad(const ScalarGrid& phi) {
  EdgeField out = EdgeField::zeros(phi.grid);
  grad_into(phi.grid, phi.values, out);
  return out;
}

FaceField discrete_curl_e2f(const EdgeField& u) {
  FaceField out = FaceField::zeros(u.grid);
  curl_e2f_into(u.grid, u, out);
  return out;
}

EdgeField discrete_curl_f2e(const FaceField& w) {
  EdgeField out = EdgeField::zeros(w.grid);
  curl_f2e_into(w.grid, w, out);
  return out;
}

ScalarGrid discrete_div(const EdgeField& u) {
  ScalarGrid out = ScalarGrid::zeros(u.grid);
  div_into(u.grid, u, out.values);
  return out;
}

CellGrid discrete_div_faces(const FaceField& w) {
  const GridSpec& g = w.grid;
  CellGrid out{g, Array3(placement_dims(Placement::Cell, g.n))};
  const double ih = 1.0 / g.h;
  const auto& bx = w.c[0];
  const auto& by = w.c[1];
  const auto& bz = w.c[2];
  for_each_index(out.values, [&](int i, int j, int k) {
    out.values(i, j, k) = ((bx(i + 1, j, k) - bx(i, j, k)) + (by(i, j + 1, k) - by(i, j, k)) +
                           (bz(i, j, k + 1) - bz(i, j, k))) * ih;
  });
  return out;
}

double inner(const Array3& a, const Array3& b) {
  const int nz = a.nz();
  const std::size_t slab = static_cast<std::size_t>(a.nx()) * static_cast<std::size_t>(a.ny());
  const double* pa = a.data();
  const double* pb = b.data();
  return ordered_sum(nz, [&](int k) {
    double s = 0.0;
    const std::size_t off = slab * static_cast<std::size_t>(k);
    for (std::size_t q = 0; q < slab; ++q) s += pa[off + q] * pb[off + q];
    return s;
  });
}

double inner(const EdgeField& a, const EdgeField& b) {
  return inner(a.c[0], b.c[0]) + inner(a.c[1], b.c[1]) + inner(a.c[2], b.c[2]);
}

double inner(const FaceField& a, const FaceField& b) {
  return inner(a.c[0], b.c[0]) + inner(a.c[1], b.c[1]) + inner(a.c[2], b.c[2]);
}

Vec3 edge_average(const EdgeField& u, int i, int j, int k) {
  const auto& ux = u.c[0];
  const auto& uy = u.c[1];
  const auto& uz = u.c[2];
  return {0.25 * (ux(i, j, k) + ux(i, j + 1, k) + ux(i, j, k + 1) + ux(i, j + 1, k + 1)),
          0.25 * (uy(i, j, k) + uy(i + 1, j, k) + uy(i, j, k + 1) + uy(i + 1, j, k + 1)),
          0.25 * (uz(i, j, k) + uz(i + 1, j, k) + uz(i, j + 1, k) + uz(i + 1, j + 1, k))};
}

Vec3 face_average(const FaceField& w, int i, int j, int k) {
  return {0.5 * (w.c[0](i, j, k) + w.c[0](i + 1, j, k)),
          0.5 * (w.c[1](i, j, k) + w.c[1](i, j + 1, k)),
          0.5 * (w.c[2](i, j, k) + w.c[2](i, j, k + 1))};
}

std::vector<FieldPoint> average_to_centers(const FieldState& state) {
  const int n = state.grid.n;
  std::vector<FieldPoint> out(static_cast<std::size_t>(n) * n * n);
  parallel_for(0, n, [&](int lo, int hi) {
    for (int k = lo; k < hi; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const std::size_t idx = static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k);
          out[idx] = {face_average(state.B, i, j, k), edge_average(state.D, i, j, k)};
        }
  });
  return out;
}

double total_energy(const FieldState& state, const ModelParams& m) {
  const int n = state.grid.n;
  const double sum = ordered_sum(n, [&](int k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        s += energy_density({face_average(state.B, i, j, k), edge_average(state.D, i, j, k)}, m);
    return s;
  });
  return state.grid.cell_volume() * sum;
}

bool is_boundary_node(const GridSpec& g, int i, int j, int k) {
  return i == 0 || j == 0 || k == 0 || i == g.n || j == g.n || k == g.n;
}

bool is_tangential_boundary_edge(const GridSpec& g, int axis, int i, int j, int k) {
  const int n = g.n;
  auto on = [n](int v) { return v == 0 || v == n; };
  switch (axis) {
    case 0: return on(j) || on(k);
    case 1: return on(i) || on(k);
    default: return on(i) || on(j);
  }
}

void apply_dirichlet(Array3& phi) {
  const int n = phi.nx() - 1;
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        if (i == 0 || j == 0 || k == 0 || i == n || j == n || k == n) phi(i, j, k) = 0.0;
}

void apply_dirichlet(EdgeField& A) {
  const GridSpec& g = A.grid;
  for (int a = 0; a < 3; ++a) {
    Array3& arr = A.c[static_cast<size_t>(a)];
    for (int k = 0; k < arr.nz(); ++k)
      for (int j = 0; j < arr.ny(); ++j)
        for (int i = 0; i < arr.nx(); ++i)
          if (is_tangential_boundary_edge(g, a, i, j, k)) arr(i, j, k) = 0.0;
  }
}

}  // namespace bifl
