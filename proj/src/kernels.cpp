#include "periwave/kernels.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

#include <cmath>

#include "periwave/errors.hpp"

namespace periwave {
namespace {

const bool g_gsl_quiet = [] {
  gsl_set_error_handler_off();
  return true;
}();

double scaled_or_zero(int status, const gsl_sf_result& res) {
  if (status == GSL_SUCCESS || status == GSL_EUNDRFLW) return res.val;
  fail(ErrorCode::NotConverged, std::string("bessel evaluation failed: ") + gsl_strerror(status));
}

void check_finite_pair(Vec2 r) {
  require(std::isfinite(r.x) && std::isfinite(r.y), ErrorCode::CoincidentPoints, "kernel argument must be finite");
  require(r.x != 0.0 || r.y != 0.0, ErrorCode::CoincidentPoints, "kernel argument must be nonzero");
}

void check_beta(double beta) {
  require(beta > 0.0 && std::isfinite(beta), ErrorCode::MissingBeta, "this kernel requires beta > 0");
}

// Stable combinations entering the ModStokes block:
//   g1(z) = 1 - z K_1(z),  g2(z) = -1 + z K_1(z) + z^2 K_0(z).
// Both are O(z^2 log z); for small z the direct form cancels catastrophically,
// so we switch to the ascending series of K_0 and K_1.
struct G12 {
  double g1, g2;
};

G12 ms_g12(double z) {
  if (z >= 0.5) {
    double zk1 = z * bessel_k1(z);
    double g1 = 1.0 - zk1;
    return {g1, -g1 + z * z * bessel_k0(z)};
  }
  double q = 0.25 * z * z;  // (z/2)^2
  double lg = std::log(0.5 * z);
  // I_0, I_1 partial sums and the psi-weighted companions.
  double i0 = 0.0, i1 = 0.0, s0 = 0.0, s1 = 0.0;
  double term = 1.0;                       // q^k / (k!)^2
  double psi = -0.57721566490153286060651209008240243;  // psi(1)
  for (int k = 0; k < 18; ++k) {
    i0 += term;
    i1 += term / (k + 1.0);
    s0 += term * psi;
    double psi_next = psi + 1.0 / (k + 1.0);  // psi(k+2)
    s1 += term * (psi + psi_next) / (k + 1.0);
    psi = psi_next;
    term *= q / ((k + 1.0) * (k + 1.0));
    if (term < 1e-20) break;
  }
  i1 *= 0.5 * z;        // I_1(z) = (z/2) sum q^k/(k!(k+1)!)
  double k0 = -lg * i0 + s0;
  // K_1(z) = 1/z + lg*I_1(z) - (z/4) sum (psi(k+1)+psi(k+2)) q^k/(k!(k+1)!),
  // so the 1/z pole cancels exactly in g1 = 1 - z K_1(z).
  double g1 = -z * lg * i1 + q * s1;
  return {g1, -g1 + z * z * k0};
}

cplx ipow(cplx z, int l) {
  cplx out{1.0, 0.0};
  for (int k = 0; k < l; ++k) out *= z;
  return out;
}

}  // namespace

double bessel_k0(double x) {
  gsl_sf_result res;
  int status = gsl_sf_bessel_K0_scaled_e(x, &res);
  return scaled_or_zero(status, res) * std::exp(-x);
}

double bessel_k1(double x) {
  gsl_sf_result res;
  int status = gsl_sf_bessel_K1_scaled_e(x, &res);
  return scaled_or_zero(status, res) * std::exp(-x);
}

double bessel_kn(int l, double x) {
  if (l == 0) return bessel_k0(x);
  if (l == 1) return bessel_k1(x);
  gsl_sf_result res;
  int status = gsl_sf_bessel_Kn_scaled_e(l, x, &res);
  return scaled_or_zero(status, res) * std::exp(-x);
}

double greens_scalar(Pde pde, double beta, Vec2 r) {
  check_finite_pair(r);
  double rr = norm(r);
  switch (pde) {
    case Pde::Poisson:
      return -std::log(rr) / (2.0 * kPi);
    case Pde::ModHelmholtz:
      check_beta(beta);
      return bessel_k0(beta * rr) / (2.0 * kPi);
    default:
      fail(ErrorCode::Unsupported, "greens_scalar requires a scalar PDE");
  }
}

Mat2 greens_block(Pde pde, double beta, Vec2 r) {
  check_finite_pair(r);
  double r2 = r.x * r.x + r.y * r.y;
  if (pde == Pde::Stokes) {
    double c = -1.0 / (4.0 * kPi);
    double lg = 0.5 * std::log(r2);
    return {c * (lg - r.x * r.x / r2), c * (-r.x * r.y / r2), c * (-r.x * r.y / r2), c * (lg - r.y * r.y / r2)};
  }
  require(pde == Pde::ModStokes, ErrorCode::Unsupported, "greens_block requires Stokes or ModStokes");
  check_beta(beta);
  double rr = std::sqrt(r2);
  G12 g = ms_g12(beta * rr);
  // G = (1/(2 pi beta^2 r^2)) [ g2 * (rhat x rhat)_perp + g1 * ... ]:
  //   G11 = c (g2 yh^2 + g1 xh^2), G22 = c (g2 xh^2 + g1 yh^2), G12 = -c xh yh (g2 - g1)
  double c = 1.0 / (2.0 * kPi * beta * beta * r2);
  double xh2 = r.x * r.x / r2, yh2 = r.y * r.y / r2, xy = r.x * r.y / r2;
  return {c * (g.g2 * yh2 + g.g1 * xh2), -c * xy * (g.g2 - g.g1), -c * xy * (g.g2 - g.g1),
          c * (g.g2 * xh2 + g.g1 * yh2)};
}

double mod_biharmonic_gmb(double beta, Vec2 r) {
  check_finite_pair(r);
  check_beta(beta);
  double rr = norm(r);
  return -(bessel_k0(beta * rr) + std::log(rr)) / (2.0 * kPi * beta * beta);
}

Vec2 pressurelet(Vec2 r) {
  check_finite_pair(r);
  double r2 = r.x * r.x + r.y * r.y;
  return {r.x / (2.0 * kPi * r2), r.y / (2.0 * kPi * r2)};
}

Mat2 stresslet_dlp(Vec2 r, Vec2 n) {
  check_finite_pair(r);
  require(std::abs(norm(n) - 1.0) <= 1e-12, ErrorCode::NonUnitNormal, "stresslet normal must be a unit vector");
  double r2 = r.x * r.x + r.y * r.y;
  double c = -(r.x * n.x + r.y * n.y) / (kPi * r2 * r2);
  return {c * r.x * r.x, c * r.x * r.y, c * r.x * r.y, c * r.y * r.y};
}

cplx multipole_kernel(Pde pde, double beta, int l, Vec2 r) {
  check_finite_pair(r);
  require(l >= 1, ErrorCode::InvalidOrder, "multipole order must be >= 1");
  cplx z{r.x, r.y};
  if (pde == Pde::Poisson) return 1.0 / ipow(z, l);
  require(pde == Pde::ModHelmholtz, ErrorCode::Unsupported, "multipole_kernel requires Poisson or ModHelmholtz");
  check_beta(beta);
  double rr = norm(r);
  return bessel_kn(l, beta * rr) * ipow(z / rr, l);
}

}  // namespace periwave
