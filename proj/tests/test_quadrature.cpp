#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>

#include "periwave/cell.hpp"
#include "periwave/errors.hpp"
#include "periwave/quadrature.hpp"
#include "periwave/util.hpp"

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

double integrate(const QuadratureRule& rule, const std::function<double(double)>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weights[i] * f(rule.nodes[i]);
  return s;
}

}  // namespace

TEST_CASE("gauss_legendre: exactness up to degree 2n-1") {
  for (int n : {1, 2, 3, 5, 8, 12}) {
    GaussRule g = gauss_legendre(n);
    REQUIRE(g.nodes.size() == static_cast<std::size_t>(n));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += g.weights[i] * std::pow(g.nodes[i], k);
      double exact = (k % 2 == 0) ? 2.0 / (k + 1.0) : 0.0;
      CHECK(std::abs(q - exact) <= 1e-14);
    }
  }
}

TEST_CASE("gauss_legendre: reference nodes and weights") {
  GaussRule g7 = gauss_legendre(7);
  CHECK(g7.nodes[0] == doctest::Approx(-0.94910791234275849).epsilon(1e-14));
  CHECK(g7.weights[0] == doctest::Approx(0.12948496616887065).epsilon(1e-14));
  GaussRule g16 = gauss_legendre(16);
  CHECK(g16.nodes[0] == doctest::Approx(-0.98940093499164994).epsilon(1e-14));
  CHECK(g16.weights[0] == doctest::Approx(0.027152459411754037).epsilon(1e-14));
  // Symmetry and positivity
  for (int i = 0; i < 16; ++i) {
    CHECK(g16.nodes[i] == doctest::Approx(-g16.nodes[15 - i]).epsilon(1e-15));
    CHECK(g16.weights[i] > 0.0);
  }
  CHECK(code_of([] { gauss_legendre(0); }) == ErrorCode::InvalidOrder);
  CHECK(code_of([] { gauss_legendre(257); }) == ErrorCode::InvalidOrder);
}

TEST_CASE("lambda rule: plain exponential-times-cosine integrands") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  for (double eps : {1e-6, 1e-12}) {
    QuadratureRule rule = sommerfeld_rule(Pde::Poisson, 0.0, cell, eps);
    REQUIRE(rule.size() > 0);
    CHECK(rule.upper >= std::log(1.0 / eps) / cell.d - 1e-9);
    for (std::size_t i = 0; i < rule.size(); ++i) {
      CHECK(rule.weights[i] > 0.0);
      if (i) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
      CHECK(rule.nodes[i] > 0.0);
      CHECK(rule.nodes[i] < rule.upper);
    }
    // integral_0^inf e^{-lam tau} cos(lam s) dlam = tau / (tau^2 + s^2)
    for (double tau : {1.0, 2.0})
      for (double s : {0.0, 0.4, 1.1}) {
        double got = integrate(rule, [&](double lam) { return std::exp(-lam * tau) * std::cos(lam * s); });
        double exact = tau / (tau * tau + s * s);
        CHECK(std::abs(got - exact) <= 25.0 * eps);
      }
  }
}

TEST_CASE("lambda rule: screened integrands") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  QuadratureRule rule = sommerfeld_rule(Pde::ModHelmholtz, 1.0, cell, 1e-12);
  double got = integrate(rule, [](double lam) {
    return std::exp(-std::sqrt(lam * lam + 1.0) * 1.3) * std::cos(0.7 * lam);
  });
  CHECK(std::abs(got - 0.25265324105497315) <= 1e-10);
  got = integrate(rule, [](double lam) { return std::exp(-std::sqrt(lam * lam + 1.0) * 2.0); });
  CHECK(std::abs(got - 0.13986588181652243) <= 1e-10);
}

TEST_CASE("lambda rule: neutral log-type integrand near lambda = 0") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  QuadratureRule rule = sommerfeld_rule(Pde::Poisson, 0.0, cell, 1e-12);
  // integral_0^inf e^{-lam}(1 - e^{-0.7 lam})/lam dlam = log(1.7)
  double got = integrate(rule, [](double lam) {
    return std::exp(-lam) * -std::expm1(-0.7 * lam) / lam;
  });
  CHECK(std::abs(got - 0.5306282510621704) <= 1e-11);
}

TEST_CASE("lambda rule: min_upper extends the truncation point") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  QuadratureRule base = sommerfeld_rule(Pde::Poisson, 0.0, cell, 1e-10);
  QuadratureRule ext = sommerfeld_rule(Pde::Poisson, 0.0, cell, 1e-10, base.upper * 2.0);
  CHECK(ext.upper == doctest::Approx(base.upper * 2.0));
  CHECK(ext.size() > base.size());
  double got = integrate(ext, [](double lam) { return std::exp(-lam * 1.0); });
  CHECK(std::abs(got - 1.0) <= 1e-9);
}

TEST_CASE("lambda rule: error paths") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  CHECK(code_of([&] { sommerfeld_rule(Pde::Poisson, 0.0, cell, 0.5); }) == ErrorCode::PrecisionOutOfRange);
  CHECK(code_of([&] { sommerfeld_rule(Pde::Poisson, 0.0, cell, 1e-15); }) == ErrorCode::PrecisionOutOfRange);
  CHECK(code_of([&] { sommerfeld_rule(Pde::ModHelmholtz, 0.0, cell, 1e-10); }) == ErrorCode::MissingBeta);
  CHECK(code_of([&] { sommerfeld_rule(Pde::ModStokes, 0.0, cell, 1e-10); }) == ErrorCode::MissingBeta);
}

TEST_CASE("certify_rule agrees with a refined rule on the probe family") {
  for (auto [pde, beta, eta] : {std::tuple{Pde::Poisson, 0.0, 1.0}, std::tuple{Pde::ModHelmholtz, 1.0, 1.0},
                                std::tuple{Pde::ModStokes, 2.5, 0.5}}) {
    UnitCell cell = make_unit_cell(1.0, 0.0, eta, Periodicity::Doubly);
    QuadratureRule rule = sommerfeld_rule(pde, beta, cell, 1e-12);
    CHECK(certify_rule(rule, pde, beta, cell, 1e-12) <= 1e-11);
  }
  // A mangled rule (missing tail panels) must be flagged.
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  QuadratureRule rule = sommerfeld_rule(Pde::Poisson, 0.0, cell, 1e-12);
  rule.nodes.resize(rule.nodes.size() / 2);
  rule.weights.resize(rule.nodes.size());
  CHECK(certify_rule(rule, Pde::Poisson, 0.0, cell, 1e-12) > 1e-7);
}

TEST_CASE("rule cache: roundtrip and d-scaling") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "periwave_quad_cache_test";
  fs::remove_all(dir);
  setenv("PERIWAVE_QUAD_CACHE", dir.c_str(), 1);

  UnitCell small = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  QuadratureRule first = sommerfeld_rule(Pde::ModHelmholtz, 2.0, small, 1e-12);
  CHECK(fs::exists(dir));
  CHECK(!fs::is_empty(dir));
  QuadratureRule again = sommerfeld_rule(Pde::ModHelmholtz, 2.0, small, 1e-12);
  REQUIRE(again.size() == first.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(again.nodes[i] == first.nodes[i]);
    CHECK(again.weights[i] == first.weights[i]);
  }
  // Same dimensionless cell scaled by 2 hits the same cache entry; the loaded
  // nodes scale like 1/d.
  UnitCell big = make_unit_cell(2.0, 0.0, 2.0, Periodicity::Doubly);
  QuadratureRule scaled = sommerfeld_rule(Pde::ModHelmholtz, 1.0, big, 1e-12);
  REQUIRE(scaled.size() == first.size());
  for (std::size_t i = 0; i < first.size(); i += 7)
    CHECK(scaled.nodes[i] == doctest::Approx(first.nodes[i] / 2.0).epsilon(1e-15));

  unsetenv("PERIWAVE_QUAD_CACHE");
  fs::remove_all(dir);
}

TEST_CASE("barycentric interpolation: geometric accuracy and exact node hits") {
  BarycentricGrid grid = make_barycentric_grid(-0.5, 0.5, 16);
  auto f = [](double x) { return std::exp(2.0 * x) * std::sin(3.0 * x + 0.4); };
  std::vector<double> fv(grid.nodes.size());
  for (int k = 0; k < grid.size(); ++k) fv[k] = f(grid.nodes[k]);
  Rng rng(123);
  for (int t = 0; t < 50; ++t) {
    double x = (rng.uniform() - 0.5);
    std::vector<double> c = interp_coeffs(grid, x);
    double got = 0.0;
    for (int k = 0; k < grid.size(); ++k) got += c[k] * fv[k];
    CHECK(std::abs(got - f(x)) <= 1e-12);
  }
  // Exact one-hot rows on the nodes themselves.
  std::vector<double> c = interp_coeffs(grid, grid.nodes[5]);
  for (int k = 0; k < grid.size(); ++k) CHECK(c[k] == (k == 5 ? 1.0 : 0.0));
  // Endpoints are inside; beyond them is an error.
  CHECK_NOTHROW(interp_coeffs(grid, 0.5));
  CHECK_NOTHROW(interp_coeffs(grid, -0.5));
  CHECK(code_of([&] { interp_coeffs(grid, 0.500001); }) == ErrorCode::OutOfInterval);
  CHECK(code_of([&] { interp_coeffs(grid, -0.500001); }) == ErrorCode::OutOfInterval);
}

TEST_CASE("barycentric grid construction errors") {
  CHECK(code_of([] { make_barycentric_grid(0.5, 0.5, 8); }) == ErrorCode::NonPositiveDimension);
  CHECK(code_of([] { make_barycentric_grid(0.0, 1.0, 1); }) == ErrorCode::GridTooCoarse);
  CHECK(code_of([] { make_barycentric_grid(0.0, 1.0, 300); }) == ErrorCode::InvalidOrder);
}

TEST_CASE("interpolation node count per accuracy") {
  CHECK(interp_nodes_for(1e-6) == 8);
  CHECK(interp_nodes_for(1e-4) == 8);
  CHECK(interp_nodes_for(1e-7) == 16);
  CHECK(interp_nodes_for(1e-12) == 16);
  CHECK(code_of([] { interp_nodes_for(0.5); }) == ErrorCode::PrecisionOutOfRange);
  CHECK(code_of([] { interp_nodes_for(1e-15); }) == ErrorCode::PrecisionOutOfRange);
}
