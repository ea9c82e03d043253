#pragma once

// Matrix-free Krylov solvers on Potentials restricted to a block selection.

#include <cmath>
#include <limits>
#include <utility>

#include "bifl/lagrangian.hpp"

namespace bifl::detail {

struct KrylovResult {
  int iterations = 0;
  double relative_residual = 0.0;  ///< preconditioned residual norm / initial
};

/// Preconditioned conjugate gradients for SPD op. x is overwritten (zero start).
template <typename Op, typename Prec>
KrylovResult pcg(Op&& op, Prec&& prec, const Potentials& b, Potentials& x, Blocks blocks, double rtol,
                 int max_iter) {
  set_zero(x, blocks);
  Potentials r = b;
  Potentials z = b;
  prec(r, z);
  Potentials p = z;
  Potentials q = b;
  double rz = dot(r, z, blocks);
  KrylovResult out;
  if (!(rz > 0.0)) return out;
  const double rz0 = rz;
  for (int it = 1; it <= max_iter; ++it) {
    op(p, q);
    const double pq = dot(p, q, blocks);
    if (!(pq > 0.0)) break;  // lost definiteness to round-off
    const double alpha = rz / pq;
    axpy(alpha, p, x, blocks);
    axpy(-alpha, q, r, blocks);
    prec(r, z);
    const double rz_new = dot(r, z, blocks);
    out.iterations = it;
    out.relative_residual = std::sqrt(std::max(rz_new, 0.0) / rz0);
    if (out.relative_residual <= rtol) break;
    scale(p, rz_new / rz, blocks);
    axpy(1.0, z, p, blocks);
    rz = rz_new;
  }
  return out;
}

/// Preconditioned MINRES for symmetric (possibly indefinite) op with SPD prec.
template <typename Op, typename Prec>
KrylovResult minres(Op&& op, Prec&& prec, const Potentials& b, Potentials& x, Blocks blocks, double rtol,
                    int max_iter) {
  set_zero(x, blocks);
  Potentials r1 = b;
  Potentials r2 = b;
  Potentials y = b;
  prec(r1, y);
  double beta1 = dot(r1, y, blocks);
  KrylovResult out;
  if (!(beta1 > 0.0)) return out;
  beta1 = std::sqrt(beta1);
  Potentials v = b;
  Potentials w = b;
  Potentials w1 = b;
  Potentials w2 = b;
  set_zero(w, blocks);
  set_zero(w2, blocks);
  double oldb = 0.0;
  double beta = beta1;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    v = y;
    scale(v, 1.0 / beta, blocks);
    op(v, y);
    if (it >= 2) axpy(-beta / oldb, r1, y, blocks);
    const double alfa = dot(v, y, blocks);
    axpy(-alfa / beta, r2, y, blocks);
    std::swap(r1, r2);
    r2 = y;
    prec(r2, y);
    oldb = beta;
    beta = std::sqrt(std::max(dot(r2, y, blocks), 0.0));
    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;
    // w_new = (v - oldeps w1 - delta w2) / gamma, then shift (w1, w2, w).
    w1 = v;
    axpy(-oldeps, w2, w1, blocks);  // w2 here holds the older direction
    axpy(-delta, w, w1, blocks);
    scale(w1, 1.0 / gamma, blocks);
    std::swap(w2, w);   // w2 <- previous w
    std::swap(w, w1);   // w <- new direction
    axpy(phi, w, x, blocks);
    out.iterations = it;
    out.relative_residual = phibar / beta1;
    if (out.relative_residual <= rtol || !(beta > 0.0)) break;
  }
  return out;
}

}  // namespace bifl::detail
