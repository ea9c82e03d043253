#include "bifl/spectral_poisson.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "bifl/errors.hpp"

namespace bifl {

namespace {

// fftw planning is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct Plan {
  fftw_plan p = nullptr;
  Plan() = default;
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    if (p) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(p);
    }
  }
};

// One separable transform on an interior block of size (nx, ny, nz), x fastest.
struct Transform {
  int nx = 0, ny = 0, nz = 0;
  Plan forward;
  Plan backward;
  std::vector<double> inv_eigen;  // 1 / (lambda * normalization), zero for null modes

  void make(int nx_, int ny_, int nz_, const fftw_r2r_kind fwd[3], const fftw_r2r_kind bwd[3]) {
    nx = nx_;
    ny = ny_;
    nz = nz_;
    std::vector<double> scratch(static_cast<size_t>(nx) * ny * nz);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // fftw dims are row-major: slowest first.
    forward.p = fftw_plan_r2r_3d(nz, ny, nx, scratch.data(), scratch.data(), fwd[2], fwd[1], fwd[0],
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward.p = fftw_plan_r2r_3d(nz, ny, nx, scratch.data(), scratch.data(), bwd[2], bwd[1], bwd[0],
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!forward.p || !backward.p) throw Error("fftw planning failed");
  }

  void apply(std::vector<double>& buf) const {
    fftw_execute_r2r(forward.p, buf.data(), buf.data());
    for (size_t q = 0; q < buf.size(); ++q) buf[q] *= inv_eigen[q];
    fftw_execute_r2r(backward.p, buf.data(), buf.data());
  }
};

// 1D eigenvalues of the second difference (2 - 2 cos theta) / h^2.
std::vector<double> dirichlet_eigen(int n, double h) {
  std::vector<double> ev(static_cast<size_t>(n - 1));
  for (int m = 0; m < n - 1; ++m)
    ev[static_cast<size_t>(m)] = (2.0 - 2.0 * std::cos(std::numbers::pi * (m + 1) / n)) / (h * h);
  return ev;
}

std::vector<double> neumann_eigen(int n, double h) {
  std::vector<double> ev(static_cast<size_t>(n));
  for (int m = 0; m < n; ++m)
    ev[static_cast<size_t>(m)] = (2.0 - 2.0 * std::cos(std::numbers::pi * m / n)) / (h * h);
  return ev;
}

}  // namespace

struct SpectralPoisson::Impl {
  GridSpec grid;
  Transform nodes;
  Transform edges[3];
};

SpectralPoisson::SpectralPoisson(const GridSpec& g) : impl_(std::make_unique<Impl>()) {
  g.validate();
  impl_->grid = g;
  const int n = g.n;
  const double norm1d = 2.0 * n;  // round trip scale of RODFT00 (N = n-1) and REDFT10/01 (N = n)
  const double norm = norm1d * norm1d * norm1d;

  const fftw_r2r_kind dst[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
  impl_->nodes.make(n - 1, n - 1, n - 1, dst, dst);
  const auto dev = dirichlet_eigen(n, g.h);
  const auto nev = neumann_eigen(n, g.h);
  {
    auto& inv = impl_->nodes.inv_eigen;
    inv.resize(static_cast<size_t>(n - 1) * (n - 1) * (n - 1));
    size_t q = 0;
    for (int k = 0; k < n - 1; ++k)
      for (int j = 0; j < n - 1; ++j)
        for (int i = 0; i < n - 1; ++i)
          inv[q++] = 1.0 / ((dev[static_cast<size_t>(i)] + dev[static_cast<size_t>(j)] + dev[static_cast<size_t>(k)]) * norm);
  }
  for (int axis = 0; axis < 3; ++axis) {
    fftw_r2r_kind fwd[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    fftw_r2r_kind bwd[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    fwd[axis] = FFTW_REDFT10;
    bwd[axis] = FFTW_REDFT01;
    int dims[3] = {n - 1, n - 1, n - 1};
    dims[axis] = n;
    Transform& t = impl_->edges[axis];
    t.make(dims[0], dims[1], dims[2], fwd, bwd);
    t.inv_eigen.resize(static_cast<size_t>(dims[0]) * dims[1] * dims[2]);
    size_t q = 0;
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i) {
          const int idx[3] = {i, j, k};
          double lambda = 0.0;
          for (int d = 0; d < 3; ++d) {
            lambda += d == axis ? nev[static_cast<size_t>(idx[d])] : dev[static_cast<size_t>(idx[d])];
          }
          t.inv_eigen[q++] = 1.0 / (lambda * norm);
        }
  }
}

SpectralPoisson::~SpectralPoisson() = default;
SpectralPoisson::SpectralPoisson(SpectralPoisson&&) noexcept = default;
SpectralPoisson& SpectralPoisson::operator=(SpectralPoisson&&) noexcept = default;

const GridSpec& SpectralPoisson::grid() const { return impl_->grid; }

void SpectralPoisson::solve_nodes(const Array3& rhs, Array3& u) const {
  const int n = impl_->grid.n;
  const Transform& t = impl_->nodes;
  std::vector<double> buf(static_cast<size_t>(t.nx) * t.ny * t.nz);
  size_t q = 0;
  for (int k = 1; k < n; ++k)
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) buf[q++] = rhs(i, j, k);
  t.apply(buf);
  u.fill(0.0);
  q = 0;
  for (int k = 1; k < n; ++k)
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) u(i, j, k) = buf[q++];
}

void SpectralPoisson::solve_edges(const EdgeField& rhs, EdgeField& a) const {
  for (int axis = 0; axis < 3; ++axis) {
    const Transform& t = impl_->edges[axis];
    const Array3& in = rhs.c[static_cast<size_t>(axis)];
    Array3& out = a.c[static_cast<size_t>(axis)];
    // Interior edges: along the axis all n entries, across it indices 1..n-1.
    const int off[3] = {axis == 0 ? 0 : 1, axis == 1 ? 0 : 1, axis == 2 ? 0 : 1};
    std::vector<double> buf(static_cast<size_t>(t.nx) * t.ny * t.nz);
    size_t q = 0;
    for (int k = 0; k < t.nz; ++k)
      for (int j = 0; j < t.ny; ++j)
        for (int i = 0; i < t.nx; ++i) buf[q++] = in(i + off[0], j + off[1], k + off[2]);
    t.apply(buf);
    out.fill(0.0);
    q = 0;
    for (int k = 0; k < t.nz; ++k)
      for (int j = 0; j < t.ny; ++j)
        for (int i = 0; i < t.nx; ++i) out(i + off[0], j + off[1], k + off[2]) = buf[q++];
  }
}

void SpectralPoisson::apply_nodes(const Array3& u, Array3& out) const {
  const int n = impl_->grid.n;
  const double ih2 = 1.0 / (impl_->grid.h * impl_->grid.h);
  out.fill(0.0);
  auto val = [&](int i, int j, int k) {
    return (i <= 0 || j <= 0 || k <= 0 || i >= n || j >= n || k >= n) ? 0.0 : u(i, j, k);
  };
  for (int k = 1; k < n; ++k)
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i)
        out(i, j, k) = (6.0 * val(i, j, k) - val(i - 1, j, k) - val(i + 1, j, k) - val(i, j - 1, k) -
                        val(i, j + 1, k) - val(i, j, k - 1) - val(i, j, k + 1)) * ih2;
}

}  // namespace bifl
