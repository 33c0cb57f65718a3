#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "periwave/cell.hpp"
#include "periwave/errors.hpp"

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

}  // namespace

TEST_CASE("make_unit_cell rejects bad dimensions") {
  CHECK(code_of([] { make_unit_cell(0.0, 0.0, 1.0, Periodicity::Doubly); }) == ErrorCode::NonPositiveDimension);
  CHECK(code_of([] { make_unit_cell(-1.0, 0.0, 1.0, Periodicity::Singly); }) == ErrorCode::NonPositiveDimension);
  CHECK(code_of([] { make_unit_cell(1.0, 0.0, 0.0, Periodicity::Doubly); }) == ErrorCode::NonPositiveDimension);
  CHECK(code_of([] { make_unit_cell(1.0, std::nan(""), 1.0, Periodicity::Doubly); }) ==
        ErrorCode::NonPositiveDimension);
}

TEST_CASE("make_unit_cell orientation constraints") {
  // Doubly: the second vector may not be longer than the first.
  CHECK(code_of([] { make_unit_cell(1.0, 0.8, 0.8, Periodicity::Doubly); }) == ErrorCode::OrientationViolation);
  CHECK_NOTHROW(make_unit_cell(1.0, 0.6, 0.8, Periodicity::Doubly));
  // Singly: skew beyond half a period must be re-slanted by the caller.
  CHECK(code_of([] { make_unit_cell(1.0, 0.51, 2.0, Periodicity::Singly); }) == ErrorCode::OrientationViolation);
  CHECK_NOTHROW(make_unit_cell(1.0, 0.5, 2.0, Periodicity::Singly));
}

TEST_CASE("near image width grows with skew") {
  CHECK(make_unit_cell(1.0, 0.0, 0.5, Periodicity::Doubly).m0 == 1);
  CHECK(make_unit_cell(2.0, 0.0, 0.1, Periodicity::Doubly).m0 == 1);
  CHECK(make_unit_cell(1.0, 0.05, 0.5, Periodicity::Doubly).m0 == 2);
  CHECK(make_unit_cell(1.0, 0.75, 0.5, Periodicity::Doubly).m0 == 3);
  CHECK(make_unit_cell(1.0, 0.9, 0.3, Periodicity::Doubly).m0 == 3);
  CHECK(make_unit_cell(1.0, 0.5, 2.0, Periodicity::Singly).m0 == 1);
}

TEST_CASE("near_translations covers the expected index box") {
  UnitCell cell = make_unit_cell(1.0, 0.25, 0.5, Periodicity::Doubly);
  REQUIRE(cell.m0 == 2);
  auto tr = near_translations(cell);
  CHECK(tr.size() == 15);
  bool saw_origin = false;
  for (const auto& t : tr) {
    CHECK(std::abs(t.m) <= 2);
    CHECK(std::abs(t.n) <= 1);
    CHECK(t.shift.x == doctest::Approx(t.m * cell.d + t.n * cell.xi).epsilon(1e-15));
    CHECK(t.shift.y == doctest::Approx(t.n * cell.eta).epsilon(1e-15));
    if (t.m == 0 && t.n == 0) saw_origin = true;
  }
  CHECK(saw_origin);

  UnitCell square = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  CHECK(near_translations(square).size() == 9);
  UnitCell wide = make_unit_cell(1.0, 0.9, 0.3, Periodicity::Doubly);
  CHECK(near_translations(wide).size() == 21);

  UnitCell strip = make_unit_cell(2.0, 0.0, 1.0, Periodicity::Singly);
  auto str = near_translations(strip);
  REQUIRE(str.size() == 3);
  for (const auto& t : str) {
    CHECK(t.n == 0);
    CHECK(t.shift.y == 0.0);
    CHECK(t.shift.x == doctest::Approx(t.m * 2.0).epsilon(1e-15));
  }
}

TEST_CASE("aspect ratio conventions") {
  CHECK(aspect(make_unit_cell(10.0, 0.0, 1.0, Periodicity::Doubly)) == doctest::Approx(10.0));
  CHECK(aspect(make_unit_cell(1.0, 0.25, 0.5, Periodicity::Doubly)) == doctest::Approx(2.0));
  // Singly: the strip height relative to the period, floored at 1.
  CHECK(aspect(make_unit_cell(1.0, 0.0, 7.0, Periodicity::Singly)) == doctest::Approx(7.0));
  CHECK(aspect(make_unit_cell(4.0, 0.0, 1.0, Periodicity::Singly)) == doctest::Approx(1.0));
}

TEST_CASE("cell_coords inverts the lattice basis") {
  UnitCell cell = make_unit_cell(1.5, 0.4, 0.9, Periodicity::Doubly);
  Vec2 p = cell.e1() * 0.31 + cell.e2() * (-0.47);
  Vec2 c = cell_coords(cell, p);
  CHECK(c.x == doctest::Approx(0.31).epsilon(1e-14));
  CHECK(c.y == doctest::Approx(-0.47).epsilon(1e-14));
}

TEST_CASE("in_cell admits the closed cell and rejects outside points") {
  UnitCell cell = make_unit_cell(1.0, 0.3, 0.7, Periodicity::Doubly);
  // All four corners lie on the boundary and count as inside.
  for (double a : {-0.5, 0.5})
    for (double b : {-0.5, 0.5}) CHECK(in_cell(cell, cell.e1() * a + cell.e2() * b));
  CHECK(in_cell(cell, {0.0, 0.0}));
  CHECK_FALSE(in_cell(cell, cell.e1() * 0.501));
  CHECK_FALSE(in_cell(cell, cell.e2() * 0.501));
  CHECK_FALSE(in_cell(cell, {0.0, 0.36}));
}

TEST_CASE("wrap_to_rectangle folds x into a half-open period") {
  UnitCell cell = make_unit_cell(2.0, 0.0, 1.0, Periodicity::Singly);
  Vec2 w = wrap_to_rectangle(cell, {1.0, 0.3});
  CHECK(w.x == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(w.y == 0.3);
  w = wrap_to_rectangle(cell, {-1.0, -0.2});
  CHECK(w.x == doctest::Approx(-1.0).epsilon(1e-15));
  w = wrap_to_rectangle(cell, {1.5, 0.0});
  CHECK(w.x == doctest::Approx(-0.5).epsilon(1e-15));
  w = wrap_to_rectangle(cell, {0.49, 0.0});
  CHECK(w.x == doctest::Approx(0.49).epsilon(1e-15));
}

TEST_CASE("validate_system enforces membership, lengths, and unit normals") {
  UnitCell cell = make_unit_cell(1.0, 0.0, 1.0, Periodicity::Doubly);
  ParticleSystem sys;
  sys.sources = {{0.1, 0.2}, {-0.3, 0.4}};
  sys.targets = {{0.0, 0.0}};
  sys.charges = {1.0, -1.0};
  CHECK_NOTHROW(validate_system(cell, sys));

  ParticleSystem bad = sys;
  bad.sources[0] = {0.7, 0.0};
  CHECK(code_of([&] { validate_system(cell, bad); }) == ErrorCode::OutOfInterval);

  bad = sys;
  bad.targets.push_back({0.0, 0.51});
  CHECK(code_of([&] { validate_system(cell, bad); }) == ErrorCode::OutOfInterval);

  bad = sys;
  bad.charges = {1.0};
  CHECK(code_of([&] { validate_system(cell, bad); }) == ErrorCode::LengthMismatch);

  bad = sys;
  bad.forces = {{1.0, 0.0}};
  CHECK(code_of([&] { validate_system(cell, bad); }) == ErrorCode::LengthMismatch);

  bad = sys;
  bad.normals = {{1.0, 0.0}, {0.5, 0.5}};
  CHECK(code_of([&] { validate_system(cell, bad); }) == ErrorCode::NonUnitNormal);

  // Empty strength arrays are fine; kinds are checked at apply time.
  ParticleSystem bare;
  bare.sources = {{0.0, 0.0}};
  bare.targets = {{0.1, 0.1}};
  CHECK_NOTHROW(validate_system(cell, bare));
}
