#pragma once

#include "periwave/util.hpp"

namespace periwave {

enum class Pde { Poisson, ModHelmholtz, Stokes, ModStokes };

// Real 2x2 block returned by the tensor kernels; row-major.
struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
  Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
};

// Modified Bessel K_l with the GSL error handler silenced; underflow maps to 0.
double bessel_k0(double x);
double bessel_k1(double x);
double bessel_kn(int l, double x);

// Free-space Green's functions, argument r = target - source.
//   Poisson:       (1/2pi) log(1/|r|)
//   ModHelmholtz:  (1/2pi) K_0(beta |r|)
double greens_scalar(Pde pde, double beta, Vec2 r);

//   Stokes:     G(r) = -(1/4pi) (log|r| I - r r^T / |r|^2)
//   ModStokes:  G(r) = (grad grad - Lap I) G_MB(r), evaluated through series
//               near beta|r| -> 0 so the 1/beta^2 prefactor stays accurate.
Mat2 greens_block(Pde pde, double beta, Vec2 r);

// Biharmonic-type generating potential for ModStokes:
//   G_MB(r) = -(1/(2 pi beta^2)) (K_0(beta|r|) + log|r|),  Lap(Lap - beta^2) G_MB = delta.
double mod_biharmonic_gmb(double beta, Vec2 r);

// Pressure kernel shared by Stokes and ModStokes: p(r) = (1/2pi) r/|r|^2,
// to be dotted with the source force vector.
Vec2 pressurelet(Vec2 r);

// Double-layer (stresslet) velocity kernel with source normal n:
//   D_ij = T_jik n_k with T_ijk = d_k G_ij + d_i G_jk - p_j delta_ik,
// which collapses to -(1/pi) r_i r_j (r.n) / |r|^4.
Mat2 stresslet_dlp(Vec2 r, Vec2 n);

// Multipole sources of order l >= 1:
//   ModHelmholtz: K_l(beta |r|) e^{i l theta},  theta = arg(r)
//   Poisson:      1/z^l with z = r.x + i r.y
cplx multipole_kernel(Pde pde, double beta, int l, Vec2 r);

}  // namespace periwave
