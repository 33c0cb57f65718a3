#pragma once

#include <cmath>
#include <complex>

#include "periwave/errors.hpp"
#include "periwave/periodize.hpp"

namespace periwave {
namespace detail {

// Below this beta a screened kernel is numerically treated like its beta -> 0
// limit for layout/neutrality decisions (the formulas still use true beta).
constexpr double kTinyBeta = 1e-6;

// e^{-2Q + comp} / (1 - e^{-Q}) for Re Q > 0; comp is the real exponent of the
// overflow-guard shifts folded in analytically so nothing here overflows.
inline cplx qtail(cplx Q, double comp) {
  cplx num = std::exp(comp - 2.0 * Q);
  cplx den = -cexpm1_neg(Q);
  return num / den;
}

// (2 - e^{-Q}) / (1 - e^{-Q}); the image-index weighted tail divided by the
// plain tail for sums starting at the second image.
inline cplx gnum(cplx Q) {
  cplx e = std::exp(-Q);
  return (2.0 - e) / (1.0 - e);
}

// ((m0+1) - m0 e^{-x}) / (1 - e^{-x}): same ratio for sums starting at image
// m0+1 along the horizontal axis.
inline cplx gnum_h(double x, int m0) {
  double e = std::exp(-x);
  return cplx(((m0 + 1) - m0 * e) / (1.0 - e), 0.0);
}

// Horizontal tail times near-row bracket, with the chi*d shift compensation
// folded in:  sum_{n in rows} e^{-m0 chi d + sgn n chi xi - i n lam eta} /
// (1 - e^{-chi d}).  sgn = +1 west, -1 east. Singly periodic cells have the
// single row n = 0.
inline cplx htail(const UnitCell& cell, double chi, double lam, double sgn) {
  int nmax = (cell.periodicity == Periodicity::Doubly) ? 1 : 0;
  cplx acc{0.0, 0.0};
  for (int n = -nmax; n <= nmax; ++n)
    acc += std::exp(cplx(-cell.m0 * chi * cell.d + sgn * n * chi * cell.xi,
                         -n * lam * cell.eta));
  return acc / (-cexpm1_neg(cplx(chi * cell.d, 0.0)));
}

// Row-index weighted bracket companion: sum_n (sgn n xi) e^{...} without the
// tail denominator; zero for singly periodic cells.
inline cplx hbracket_lin(const UnitCell& cell, double chi, double lam, double sgn) {
  if (cell.periodicity != Periodicity::Doubly) return {0.0, 0.0};
  cplx plus = std::exp(cplx(-cell.m0 * chi * cell.d + sgn * chi * cell.xi, -lam * cell.eta));
  cplx minus = std::exp(cplx(-cell.m0 * chi * cell.d - sgn * chi * cell.xi, lam * cell.eta));
  return (plus - minus) / (-cexpm1_neg(cplx(chi * cell.d, 0.0)));
}

inline void push_vertical_mode(ModeSet& ms, const UnitCell& cell, double alpha, double chi,
                               Direction dir) {
  ms.axis = Axis::Vertical;
  double h = 0.5 * cell.eta;
  bool south = (dir == Direction::South);
  ms.phase.push_back(alpha);
  ms.decay_t.push_back(south ? -chi : chi);
  ms.decay_s.push_back(south ? chi : -chi);
  ms.shift_t.push_back(south ? -h : h);
  ms.shift_s.push_back(south ? h : -h);
}

inline void push_horizontal_mode(ModeSet& ms, const UnitCell& cell, double lam, double chi,
                                 Direction dir) {
  ms.axis = Axis::Horizontal;
  double h = 0.5 * cell.d;
  bool west = (dir == Direction::West);
  ms.phase.push_back(lam);
  ms.decay_t.push_back(west ? -chi : chi);
  ms.decay_s.push_back(west ? chi : -chi);
  ms.shift_t.push_back(west ? -h : h);
  ms.shift_s.push_back(west ? h : -h);
}

// Shared horizontal rule with certification; throws NotConverged when the
// self-check fails.
QuadratureRule certified_rule(Pde pde, double beta, const UnitCell& cell, double eps,
                              double min_upper = 0.0);

// Stokes-family builders (defined in periodize_stokes.cpp).
void add_stokes_parts(Periodizer& p);
void add_mod_stokes_parts(Periodizer& p);
void add_pressure_parts(Periodizer& p);

}  // namespace detail
}  // namespace periwave
