#include "periwave/cell.hpp"

#include <algorithm>
#include <cmath>

#include "periwave/errors.hpp"

namespace periwave {

UnitCell make_unit_cell(double d, double xi, double eta, Periodicity periodicity) {
  require(std::isfinite(d) && std::isfinite(xi) && std::isfinite(eta), ErrorCode::NonPositiveDimension,
          "cell dimensions must be finite");
  require(d > 0.0, ErrorCode::NonPositiveDimension, "cell requires d > 0");
  require(eta > 0.0, ErrorCode::NonPositiveDimension, "cell requires eta > 0");
  UnitCell cell;
  cell.d = d;
  cell.xi = xi;
  cell.eta = eta;
  cell.periodicity = periodicity;
  if (periodicity == Periodicity::Doubly) {
    require(d * d >= xi * xi + eta * eta, ErrorCode::OrientationViolation,
            "doubly periodic cell requires d >= |e2|");
    if (xi == 0.0) {
      cell.m0 = 1;
    } else {
      // Smallest m0 with (m0+1)d - (d + 2|xi|) >= d, so every east/west image
      // is at least d away in x from every target; capped at 3, which |xi| <= d
      // makes attainable.
      cell.m0 = std::min(3, std::max(1, static_cast<int>(std::ceil(1.0 + 2.0 * std::abs(xi) / d))));
    }
  } else {
    // The singly periodic near set is fixed at |m| <= 1, so the skew must be
    // small enough that the m = +-2 images keep a positive gap; the strip can
    // always be re-slanted to |xi| <= d/2.
    require(std::abs(xi) <= 0.5 * d, ErrorCode::OrientationViolation,
            "singly periodic cell requires |xi| <= d/2");
    cell.m0 = 1;
  }
  return cell;
}

double aspect(const UnitCell& cell) {
  if (cell.periodicity == Periodicity::Doubly) return cell.d / cell.eta;
  return std::max(1.0, cell.eta / cell.d);
}

std::vector<LatticeTranslation> near_translations(const UnitCell& cell) {
  std::vector<LatticeTranslation> out;
  if (cell.periodicity == Periodicity::Doubly) {
    out.reserve(static_cast<std::size_t>(2 * cell.m0 + 1) * 3);
    for (int n = -1; n <= 1; ++n)
      for (int m = -cell.m0; m <= cell.m0; ++m)
        out.push_back({m, n, {m * cell.d + n * cell.xi, n * cell.eta}});
  } else {
    for (int m = -1; m <= 1; ++m) out.push_back({m, 0, {m * cell.d, 0.0}});
  }
  return out;
}

Vec2 cell_coords(const UnitCell& cell, Vec2 p) {
  double x2 = p.y / cell.eta;
  double x1 = (p.x - cell.xi * x2) / cell.d;
  return {x1, x2};
}

bool in_cell(const UnitCell& cell, Vec2 p) {
  Vec2 c = cell_coords(cell, p);
  double slack = 0.5 + 1e-12;
  return std::abs(c.x) <= slack && std::abs(c.y) <= slack;
}

Vec2 wrap_to_rectangle(const UnitCell& cell, Vec2 p) {
  double k = std::floor(p.x / cell.d + 0.5);
  return {p.x - k * cell.d, p.y};
}

void validate_system(const UnitCell& cell, const ParticleSystem& sys) {
  auto check_points = [&](const std::vector<Vec2>& pts, const char* what) {
    for (const Vec2& p : pts)
      require(in_cell(cell, p), ErrorCode::OutOfInterval, std::string(what) + " point outside the closed unit cell");
  };
  check_points(sys.sources, "source");
  check_points(sys.targets, "target");
  std::size_t ns = sys.sources.size();
  auto check_len = [&](std::size_t got, const char* what) {
    require(got == 0 || got == ns, ErrorCode::LengthMismatch, std::string(what) + " length does not match sources");
  };
  check_len(sys.charges.size(), "charges");
  check_len(sys.forces.size(), "forces");
  check_len(sys.normals.size(), "normals");
  check_len(sys.coefficients.size(), "coefficients");
  for (const Vec2& n : sys.normals)
    require(std::abs(norm(n) - 1.0) <= 1e-12, ErrorCode::NonUnitNormal, "stresslet normals must be unit vectors");
}

}  // namespace periwave
