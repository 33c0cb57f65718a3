#include <cmath>
#include <utility>

#include "periwave/periodize.hpp"
#include "periwave/quadrature.hpp"
#include "periodize_common.hpp"

namespace periwave {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr Mat2c kId{1.0, 0.0, 0.0, 1.0};

Mat2c mconj(const Mat2c& m) {
  return {std::conj(m.a11), std::conj(m.a12), std::conj(m.a21), std::conj(m.a22)};
}

// Extra vertical modes on top of the scalar-family order so symbols that grow
// with chi (derivatives, 1/beta^2 prefactors) still truncate below eps; fac is
// the worst-case growth ratio at the base order.
int extend_order(const UnitCell& cell, int base, double fac) {
  if (!(fac > 1.0)) return base;
  return base + static_cast<int>(std::ceil(cell.d / (2.0 * kPi * cell.eta) * std::log(fac)));
}

// Row bracket and its n-weighted companion for the three horizontal image
// rows; singly periodic cells have the single row n = 0.
struct RowBracket {
  cplx sum{1.0, 0.0};
  cplx lin{0.0, 0.0};
};

RowBracket row_bracket(const UnitCell& cell, double lam) {
  RowBracket rb;
  if (cell.periodicity == Periodicity::Doubly) {
    const cplx zp = std::exp(cplx(lam * cell.xi, -lam * cell.eta));
    const cplx zm = std::exp(cplx(-lam * cell.xi, lam * cell.eta));
    rb.sum += zp + zm;
    rb.lin = zp - zm;
  }
  return rb;
}

void stokes_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const int base = truncation_order(cell, pz.eps);
  const double chi0 = 2.0 * kPi * base / cell.d;
  const int order = extend_order(cell, base, chi0 * cell.eta);
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    BlockPart part;
    part.dir = dir;
    part.three_term = true;
    for (int m = -order; m <= order; ++m) {
      if (m == 0) continue;
      const double alpha = 2.0 * kPi * m / cell.d;
      const double a = std::abs(alpha);
      const double sg = (m > 0) == south ? 1.0 : -1.0;
      const cplx q(a * cell.eta, (south ? -alpha : alpha) * cell.xi);
      const cplx t = detail::qtail(q, a * cell.eta) / (4.0 * cell.d);
      const Mat2c s{1.0, kI * sg, kI * sg, -1.0};
      detail::push_vertical_mode(part.modes, cell, alpha, a, dir);
      part.diag_a.push_back((kId * (1.0 / a) + s * (-detail::gnum(q) * cell.eta)) * t);
      part.diag_b.push_back(s * (south ? t : -t));
    }
    part.has_m0 = true;
    part.m0_mat = {-1.0 / (2.0 * cell.d * cell.eta), 0.0, 0.0, 0.0};
    pz.block_parts.push_back(std::move(part));
  }
}

void stokes_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  const Mat2c wmat{-1.0, kI, kI, 1.0};
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    BlockPart part;
    part.dir = dir;
    part.three_term = true;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      const RowBracket rb = row_bracket(cell, lam);
      const double t0 = std::exp(-cell.m0 * lam * cell.d) / (-std::expm1(-lam * cell.d));
      const cplx g = detail::gnum_h(lam * cell.d, cell.m0);
      const double amp = rule.weights[k] * t0 / (4.0 * kPi);
      Mat2c da =
          (kId * (rb.sum / lam) + wmat * (-(g * cell.d * rb.sum - cell.xi * rb.lin))) * amp;
      Mat2c db = wmat * (amp * rb.sum);
      if (!west) {
        da = mconj(da);
        db = mconj(db) * cplx(-1.0);
      }
      detail::push_horizontal_mode(part.modes, cell, lam, lam, dir);
      part.diag_a.push_back(da);
      part.diag_b.push_back(db);
    }
    pz.block_parts.push_back(std::move(part));
  }
}

void mod_stokes_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const double b2 = pz.beta * pz.beta;
  const int base = truncation_order(cell, pz.eps);
  const double chi0 = 2.0 * kPi * base / cell.d;
  const double fac = std::max(chi0 * chi0 / b2, chi0 * cell.eta);
  const int order = extend_order(cell, base, fac);
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    const double sx = south ? -1.0 : 1.0;  // sign of the alpha*xi phase in the tail
    const double si = south ? 1.0 : -1.0;  // sign of the i*alpha symbol entries
    BlockPart part;
    part.dir = dir;
    // Screened family; its m = 0 mode carries the whole slowly-decaying
    // content, so no rank-one companion is needed.
    for (int m = -order; m <= order; ++m) {
      const double alpha = 2.0 * kPi * m / cell.d;
      const double chi = std::hypot(alpha, pz.beta);
      const cplx q(chi * cell.eta, sx * alpha * cell.xi);
      const cplx t = detail::qtail(q, chi * cell.eta) / (2.0 * b2 * cell.d);
      const cplx ia = kI * (si * alpha);
      detail::push_vertical_mode(part.modes, cell, alpha, chi, dir);
      part.diag_a.push_back({chi * t, ia * t, ia * t, -(alpha * alpha / chi) * t});
    }
    // Unscreened companion family; its m = 0 symbol vanishes.
    for (int m = -order; m <= order; ++m) {
      if (m == 0) continue;
      const double alpha = 2.0 * kPi * m / cell.d;
      const double a = std::abs(alpha);
      const cplx q(a * cell.eta, sx * alpha * cell.xi);
      const cplx t = detail::qtail(q, a * cell.eta) / (2.0 * b2 * cell.d);
      const cplx ia = kI * (si * alpha);
      detail::push_vertical_mode(part.modes, cell, alpha, a, dir);
      part.diag_a.push_back({-a * t, -ia * t, -ia * t, a * t});
    }
    pz.block_parts.push_back(std::move(part));
  }
}

void mod_stokes_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  const double b2 = pz.beta * pz.beta;
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    const double sgn = west ? 1.0 : -1.0;
    BlockPart part;
    part.dir = dir;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      const double chi = std::hypot(lam, pz.beta);
      const cplx il = kI * (sgn * lam);
      const cplx tb =
          detail::htail(cell, chi, lam, sgn) * (rule.weights[k] / (2.0 * kPi * b2));
      detail::push_horizontal_mode(part.modes, cell, lam, chi, dir);
      part.diag_a.push_back({-(lam * lam / chi) * tb, il * tb, il * tb, chi * tb});
      const cplx tz =
          detail::htail(cell, lam, lam, sgn) * (rule.weights[k] / (2.0 * kPi * b2));
      detail::push_horizontal_mode(part.modes, cell, lam, lam, dir);
      part.diag_a.push_back({lam * tz, -il * tz, -il * tz, -lam * tz});
    }
    pz.block_parts.push_back(std::move(part));
  }
}

void pressure_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const int base = truncation_order(cell, pz.eps);
  const double chi0 = 2.0 * kPi * base / cell.d;
  const int order = extend_order(cell, base, chi0 * cell.eta);
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    PressurePart part;
    part.dir = dir;
    for (int m = -order; m <= order; ++m) {
      if (m == 0) continue;
      const double alpha = 2.0 * kPi * m / cell.d;
      const double a = std::abs(alpha);
      const cplx q(a * cell.eta, (south ? -alpha : alpha) * cell.xi);
      detail::push_vertical_mode(part.modes, cell, alpha, a, dir);
      part.diag.push_back(-detail::qtail(q, a * cell.eta) / (2.0 * cell.d * a));
      part.row.push_back({kI * alpha, cplx(south ? -a : a)});
    }
    part.has_m0 = true;
    part.m0_coef = 1.0 / (2.0 * cell.d * cell.eta);
    part.m0_row = {0.0, 1.0};
    pz.pressure_parts.push_back(std::move(part));
  }
}

void pressure_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    const double sgn = west ? 1.0 : -1.0;
    PressurePart part;
    part.dir = dir;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      detail::push_horizontal_mode(part.modes, cell, lam, lam, dir);
      part.diag.push_back(detail::htail(cell, lam, lam, sgn) *
                          (rule.weights[k] / (2.0 * kPi * lam)));
      part.row.push_back({cplx(sgn * lam), -kI * lam});
    }
    pz.pressure_parts.push_back(std::move(part));
  }
}

void dlp_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const int base = truncation_order(cell, pz.eps);
  const double chi0 = 2.0 * kPi * base / cell.d;
  const int order = extend_order(cell, base, chi0 * cell.eta * chi0 * cell.eta);
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    StressletPart part;
    part.dir = dir;
    for (int m = -order; m <= order; ++m) {
      if (m == 0) continue;
      const double alpha = 2.0 * kPi * m / cell.d;
      const double a = std::abs(alpha);
      const double sg = m > 0 ? 1.0 : -1.0;
      const cplx q(a * cell.eta, (south ? -alpha : alpha) * cell.xi);
      const cplx amp = detail::qtail(q, a * cell.eta) / (2.0 * cell.d);
      detail::push_vertical_mode(part.modes, cell, alpha, a, dir);
      if (south) {
        part.a1.push_back(Mat2c{2.0 * kI * sg, -1.0, -1.0, 0.0} * amp);
        part.a2.push_back(kId * (-amp));
        part.sa.push_back(kI * alpha);
        part.sb.push_back(cplx(-a));
        part.smat.push_back(Mat2c{1.0, kI * sg, kI * sg, -1.0} * (-amp));
        part.off.push_back(detail::gnum(q) * cell.eta);
      } else {
        part.a1.push_back(Mat2c{2.0 * kI * sg, 1.0, 1.0, 0.0} * amp);
        part.a2.push_back(kId * amp);
        part.sa.push_back(kI * alpha);
        part.sb.push_back(cplx(a));
        part.smat.push_back(Mat2c{-1.0, kI * sg, kI * sg, 1.0} * (-amp));
        part.off.push_back(-detail::gnum(q) * cell.eta);
      }
    }
    part.has_m0 = true;
    part.m0_coef = 1.0 / (2.0 * cell.d * cell.eta);
    pz.stresslet_parts.push_back(std::move(part));
  }
}

void dlp_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    StressletPart part;
    part.dir = dir;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      const RowBracket rbw = row_bracket(cell, lam);
      const cplx bb = west ? rbw.sum : std::conj(rbw.sum);
      const cplx bp = west ? rbw.lin : -std::conj(rbw.lin);
      const double t0 = std::exp(-cell.m0 * lam * cell.d) / (-std::expm1(-lam * cell.d));
      const cplx g = detail::gnum_h(lam * cell.d, cell.m0);
      const double amp0 = rule.weights[k] * t0 / (2.0 * kPi);
      const Mat2c m1 = west ? kId * cplx(-1.0) : kId;
      const Mat2c m2 = west ? Mat2c{0.0, -1.0, -1.0, 2.0 * kI} : Mat2c{0.0, 1.0, 1.0, 2.0 * kI};
      const cplx sa = west ? cplx(-lam) : cplx(lam);
      const cplx sb = kI * lam;
      const Mat2c cmat = west ? Mat2c{-1.0, kI, kI, 1.0} : Mat2c{1.0, kI, kI, -1.0};
      detail::push_horizontal_mode(part.modes, cell, lam, lam, dir);
      part.a1.push_back((m1 * bb + cmat * (cell.xi * sa * bp)) * amp0);
      part.a2.push_back((m2 * bb + cmat * (cell.xi * sb * bp)) * amp0);
      part.sa.push_back(sa);
      part.sb.push_back(sb);
      part.smat.push_back(cmat * (-amp0 * bb));
      part.off.push_back((west ? g : -g) * cell.d);
    }
    pz.stresslet_parts.push_back(std::move(part));
  }
}

}  // namespace

namespace detail {

void add_stokes_parts(Periodizer& pz) {
  if (pz.cell.periodicity == Periodicity::Doubly) stokes_vertical(pz);
  stokes_horizontal(pz, certified_rule(Pde::Stokes, 0.0, pz.cell, pz.eps));
}

void add_mod_stokes_parts(Periodizer& pz) {
  if (pz.cell.periodicity == Periodicity::Doubly) mod_stokes_vertical(pz);
  // The unscreened companion family and the pressure share this rule, so the
  // unscreened layout is used even though beta > 0.
  mod_stokes_horizontal(pz, certified_rule(Pde::Stokes, 0.0, pz.cell, pz.eps));
}

void add_pressure_parts(Periodizer& pz) {
  if (pz.cell.periodicity == Periodicity::Doubly) pressure_vertical(pz);
  pressure_horizontal(pz, certified_rule(Pde::Stokes, 0.0, pz.cell, pz.eps));
}

}  // namespace detail

Periodizer make_stokes_dlp_periodizer(const UnitCell& cell, double eps) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange,
          "eps must lie in [1e-14, 0.1)");
  Periodizer pz;
  pz.pde = Pde::Stokes;
  pz.beta = 0.0;
  pz.cell = cell;
  pz.eps = eps;
  pz.dlp = true;
  pz.requires_neutrality = true;
  if (cell.periodicity == Periodicity::Doubly) dlp_vertical(pz);
  dlp_horizontal(pz, detail::certified_rule(Pde::Stokes, 0.0, cell, eps));
  return pz;
}

}  // namespace periwave
