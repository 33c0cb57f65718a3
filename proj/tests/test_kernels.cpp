#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "periwave/errors.hpp"
#include "periwave/kernels.hpp"

using namespace periwave;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error to be thrown");
  return ErrorCode::Unsupported;
}

doctest::Approx near(double v, double eps = 1e-14) { return doctest::Approx(v).epsilon(eps); }

}  // namespace

TEST_CASE("modified Bessel K against independently computed values") {
  CHECK(bessel_k0(1.0) == near(0.42102443824070833));
  CHECK(bessel_k1(1.0) == near(0.60190723019723457));
  CHECK(bessel_kn(2, 1.3) == near(0.85139763957996879));
  CHECK(bessel_kn(3, 0.55) == near(46.328915013455511));
  CHECK(bessel_kn(0, 1.0) == near(0.42102443824070833));
  CHECK(bessel_kn(1, 1.0) == near(0.60190723019723457));
}

TEST_CASE("modified Bessel K recurrence and underflow") {
  // K_{l+1}(x) = K_{l-1}(x) + (2l/x) K_l(x)
  double x = 0.8;
  for (int l = 1; l <= 5; ++l) {
    double lhs = bessel_kn(l + 1, x);
    double rhs = bessel_kn(l - 1, x) + (2.0 * l / x) * bessel_kn(l, x);
    CHECK(lhs == near(rhs, 1e-13));
  }
  // Far past the exponent range the value underflows to zero instead of failing.
  CHECK(bessel_k0(800.0) == 0.0);
  CHECK(bessel_k1(800.0) == 0.0);
}

TEST_CASE("scalar Green functions") {
  CHECK(greens_scalar(Pde::Poisson, 0.0, {0.3, 0.4}) == near(0.1103178000763258));
  CHECK(greens_scalar(Pde::ModHelmholtz, 2.5, {0.3, 0.4}) == near(0.047365002707153135));
  CHECK(code_of([] { greens_scalar(Pde::ModHelmholtz, 0.0, {0.3, 0.4}); }) == ErrorCode::MissingBeta);
  CHECK(code_of([] { greens_scalar(Pde::Poisson, 0.0, {0.0, 0.0}); }) == ErrorCode::CoincidentPoints);
  CHECK(code_of([] { greens_scalar(Pde::Stokes, 0.0, {0.3, 0.4}); }) == ErrorCode::Unsupported);
}

TEST_CASE("Stokeslet block") {
  Mat2 g = greens_block(Pde::Stokes, 0.0, {0.3, -0.4});
  CHECK(g.a11 == near(0.083806789794704059));
  CHECK(g.a12 == near(-0.038197186342054881));
  CHECK(g.a21 == near(-0.038197186342054881));
  CHECK(g.a22 == near(0.10608848182756941));
}

TEST_CASE("Stokeslet rotation equivariance: G(R r) = R G(r) R^T") {
  double th = 0.7321;
  double c = std::cos(th), s = std::sin(th);
  Vec2 r{0.4, -0.2};
  Vec2 rr{c * r.x - s * r.y, s * r.x + c * r.y};
  Mat2 g = greens_block(Pde::Stokes, 0.0, r);
  Mat2 gr = greens_block(Pde::Stokes, 0.0, rr);
  // R G R^T entries
  double b11 = c * (c * g.a11 - s * g.a12) - s * (c * g.a21 - s * g.a22);
  double b12 = c * (s * g.a11 + c * g.a12) - s * (s * g.a21 + c * g.a22);
  double b22 = s * (s * g.a11 + c * g.a12) + c * (s * g.a21 + c * g.a22);
  CHECK(gr.a11 == near(b11, 1e-13));
  CHECK(gr.a12 == near(b12, 1e-13));
  CHECK(gr.a22 == near(b22, 1e-13));
}

TEST_CASE("screened Stokeslet block, both evaluation branches") {
  Mat2 g = greens_block(Pde::ModStokes, 1.3, {0.7, 0.4});  // direct branch
  CHECK(g.a11 == near(0.046161086481584479, 1e-13));
  CHECK(g.a12 == near(0.025233352638660489, 1e-13));
  CHECK(g.a21 == g.a12);
  CHECK(g.a22 == near(0.016421778014591761, 1e-13));

  Mat2 h = greens_block(Pde::ModStokes, 1.3, {0.05, -0.03});  // series branch
  CHECK(h.a11 == near(0.23355962920866488, 1e-13));
  CHECK(h.a12 == near(-0.034933841604551148, 1e-13));
  CHECK(h.a22 == near(0.19629686483047698, 1e-13));

  CHECK(code_of([] { greens_block(Pde::ModStokes, 0.0, {0.3, 0.4}); }) == ErrorCode::MissingBeta);
  CHECK(code_of([] { greens_block(Pde::Poisson, 0.0, {0.3, 0.4}); }) == ErrorCode::Unsupported);
}

TEST_CASE("screened Stokeslet branch switch is seamless") {
  Mat2 lo = greens_block(Pde::ModStokes, 1.0, {0.4999999, 0.0});
  CHECK(lo.a11 == near(0.10935820230728381, 1e-12));
  CHECK(lo.a22 == near(0.037767688730100682, 1e-12));
  for (double phi : {0.0, 0.4, 1.1, 2.9}) {
    Vec2 u{std::cos(phi), std::sin(phi)};
    Mat2 a = greens_block(Pde::ModStokes, 1.0, u * 0.4999999);
    Mat2 b = greens_block(Pde::ModStokes, 1.0, u * 0.5000001);
    CHECK(std::abs(a.a11 - b.a11) <= 1e-7);
    CHECK(std::abs(a.a12 - b.a12) <= 1e-7);
    CHECK(std::abs(a.a22 - b.a22) <= 1e-7);
  }
}

TEST_CASE("generating potential and its Hessian reproduce the screened block") {
  CHECK(mod_biharmonic_gmb(1.0, {0.6, 0.0}) == near(-0.04244606120943042, 1e-13));

  // G_ij = (d_i d_j - delta_ij Lap) G_MB, checked by central differences.
  double beta = 1.3;
  Vec2 p{0.7, 0.4};
  double h = 1e-4;
  auto f = [&](double x, double y) { return mod_biharmonic_gmb(beta, {x, y}); };
  double f0 = f(p.x, p.y);
  double fxx = (f(p.x + h, p.y) - 2.0 * f0 + f(p.x - h, p.y)) / (h * h);
  double fyy = (f(p.x, p.y + h) - 2.0 * f0 + f(p.x, p.y - h)) / (h * h);
  double fxy = (f(p.x + h, p.y + h) - f(p.x + h, p.y - h) - f(p.x - h, p.y + h) + f(p.x - h, p.y - h)) /
               (4.0 * h * h);
  Mat2 g = greens_block(Pde::ModStokes, beta, p);
  CHECK(g.a11 == near(-fyy, 1e-5));
  CHECK(g.a12 == near(fxy, 1e-5));
  CHECK(g.a22 == near(-fxx, 1e-5));
}

TEST_CASE("velocity kernels are divergence-free in the target") {
  double h = 1e-5;
  Vec2 p{0.52, -0.33};
  for (auto [pde, beta] : {std::pair{Pde::Stokes, 0.0}, std::pair{Pde::ModStokes, 1.7}}) {
    auto g = [&](double x, double y) { return greens_block(pde, beta, {x, y}); };
    Mat2 gxp = g(p.x + h, p.y), gxm = g(p.x - h, p.y);
    Mat2 gyp = g(p.x, p.y + h), gym = g(p.x, p.y - h);
    double div1 = (gxp.a11 - gxm.a11 + gyp.a21 - gym.a21) / (2.0 * h);
    double div2 = (gxp.a12 - gxm.a12 + gyp.a22 - gym.a22) / (2.0 * h);
    CHECK(std::abs(div1) <= 1e-8);
    CHECK(std::abs(div2) <= 1e-8);
  }
}

TEST_CASE("pressure kernel") {
  Vec2 p = pressurelet({0.3, 0.4});
  CHECK(p.x == near(0.1909859317102744));
  CHECK(p.y == near(0.25464790894703254));
  CHECK(code_of([] { pressurelet({0.0, 0.0}); }) == ErrorCode::CoincidentPoints);
}

TEST_CASE("stresslet kernel") {
  Mat2 d = stresslet_dlp({0.5, 0.2}, {0.6, 0.8});
  CHECK(d.a11 == near(-0.43526322129769236));
  CHECK(d.a12 == near(-0.17410528851907694));
  CHECK(d.a21 == d.a12);
  CHECK(d.a22 == near(-0.069642115407630777));
  CHECK(code_of([] { stresslet_dlp({0.5, 0.2}, {0.6, 0.9}); }) == ErrorCode::NonUnitNormal);
}

TEST_CASE("multipole kernels") {
  cplx mp = multipole_kernel(Pde::Poisson, 0.0, 2, {0.3, 0.4});
  CHECK(mp.real() == near(-1.12));
  CHECK(mp.imag() == near(-3.84));
  cplx mh = multipole_kernel(Pde::ModHelmholtz, 1.1, 3, {0.3, 0.4});
  CHECK(mh.real() == near(-43.363864452594358, 1e-13));
  CHECK(mh.imag() == near(16.30777808473634, 1e-13));
  CHECK(code_of([] { multipole_kernel(Pde::Poisson, 0.0, 0, {0.3, 0.4}); }) == ErrorCode::InvalidOrder);
  CHECK(code_of([] { multipole_kernel(Pde::ModHelmholtz, 0.0, 2, {0.3, 0.4}); }) == ErrorCode::MissingBeta);
  CHECK(code_of([] { multipole_kernel(Pde::Stokes, 0.0, 1, {0.3, 0.4}); }) == ErrorCode::Unsupported);
}
