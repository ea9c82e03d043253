#pragma once

// Staggered (Yee) discretization of the box [-L, L]^3 with L = n h / 2.
//
//   nodes  (i, j, k)                 phi, rho          (n+1)^3
//   edges  x: (i+1/2, j, k) ...      E, D, A, j        n (n+1)^2 per axis
//   faces  x: (i, j+1/2, k+1/2) ...  B, H              (n+1) n^2 per axis
//   cells  (i+1/2, j+1/2, k+1/2)     collocated 6-vectors, n^3
//
// Arrays are stored x-fastest. grad, curl_e2f and div_faces form an exact
// discrete complex; curl_f2e and div are their transposes (up to sign).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bifl/fields.hpp"
#include "bifl/vec3.hpp"

namespace bifl {

struct GridSpec {
  int n = 32;
  double h = 0.25;

  /// Throws PreconditionError unless n >= 8, n even and h > 0.
  void validate() const;
  double half_width() const { return 0.5 * n * h; }
  Vec3 origin() const { return {-half_width(), -half_width(), -half_width()}; }
  Vec3 node_position(int i, int j, int k) const;
  Vec3 cell_center(int i, int j, int k) const;
  double cell_volume() const { return h * h * h; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class Placement : std::uint32_t {
  Node = 0,
  EdgeX = 1,
  EdgeY = 2,
  EdgeZ = 3,
  FaceX = 4,
  FaceY = 5,
  FaceZ = 6,
  Cell = 7,
};

std::array<int, 3> placement_dims(Placement p, int n);
Placement edge_placement(int axis);
Placement face_placement(int axis);

/// Dense 3D array, x-fastest.
class Array3 {
 public:
  Array3() = default;
  Array3(int nx, int ny, int nz, double fill = 0.0);
  explicit Array3(const std::array<int, 3>& dims, double fill = 0.0)
      : Array3(dims[0], dims[1], dims[2], fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  std::array<int, 3> dims() const { return {nx_, ny_, nz_}; }
  std::size_t size() const { return data_.size(); }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(nx_) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * k);
  }
  double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }
  /// Value at (i, j, k), or zero outside the array.
  double at_or_zero(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= nx_ || j >= ny_ || k >= nz_) return 0.0;
    return data_[index(i, j, k)];
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  double max_abs() const;

  friend bool operator==(const Array3&, const Array3&) = default;

 private:
  int nx_ = 0;
  int ny_ = 0;
  int nz_ = 0;
  std::vector<double> data_;
};

struct ScalarGrid {
  GridSpec grid;
  Array3 values;

  static ScalarGrid zeros(const GridSpec& g);
};

/// Vector field with one component per axis on x/y/z edges.
struct EdgeField {
  GridSpec grid;
  std::array<Array3, 3> c;

  static EdgeField zeros(const GridSpec& g);
  double max_abs() const;
};

/// Vector field with one component per axis on x/y/z faces.
struct FaceField {
  GridSpec grid;
  std::array<Array3, 3> c;

  static FaceField zeros(const GridSpec& g);
  double max_abs() const;
};

/// Cell-centered scalar (n^3), e.g. div B.
struct CellGrid {
  GridSpec grid;
  Array3 values;
};

struct FieldState {
  GridSpec grid;
  FaceField B;
  EdgeField D;
  ScalarGrid phi;
  EdgeField A;

  static FieldState zeros(const GridSpec& g);
};

EdgeField discrete_grad(const ScalarGrid& phi);
FaceField discrete_curl_e2f(const EdgeField& u);
/// Transpose of discrete_curl_e2f.
EdgeField discrete_curl_f2e(const FaceField& w);
/// Node divergence of an edge field; equals -grad^T.
ScalarGrid discrete_div(const EdgeField& u);
/// Cell divergence of a face field.
CellGrid discrete_div_faces(const FaceField& w);

// In-place kernels used by the solvers; output arrays must be preallocated.
void grad_into(const GridSpec& g, const Array3& phi, EdgeField& out);
void curl_e2f_into(const GridSpec& g, const EdgeField& u, FaceField& out);
void curl_f2e_into(const GridSpec& g, const FaceField& w, EdgeField& out);
void div_into(const GridSpec& g, const EdgeField& u, Array3& out);

/// Plain (unweighted) sums of componentwise products.
double inner(const EdgeField& a, const EdgeField& b);
double inner(const FaceField& a, const FaceField& b);
double inner(const Array3& a, const Array3& b);

/// Cell-centered average of an edge field (4 edges per component).
Vec3 edge_average(const EdgeField& u, int i, int j, int k);
/// Cell-centered average of a face field (2 faces per component).
Vec3 face_average(const FaceField& w, int i, int j, int k);

/// Collocates (B, D) at every cell center, x-fastest cell order.
std::vector<FieldPoint> average_to_centers(const FieldState& state);

/// h^3 times the sum of energy_density over cell centers.
double total_energy(const FieldState& state, const ModelParams& m);

/// Boundary masks: true for degrees of freedom pinned to zero by the
/// homogeneous Dirichlet condition (boundary nodes, tangential boundary edges).
bool is_boundary_node(const GridSpec& g, int i, int j, int k);
bool is_tangential_boundary_edge(const GridSpec& g, int axis, int i, int j, int k);
void apply_dirichlet(Array3& phi);
void apply_dirichlet(EdgeField& A);

}  // namespace bifl
