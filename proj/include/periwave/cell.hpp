#pragma once

#include <vector>

#include "periwave/util.hpp"

namespace periwave {

enum class Periodicity { Singly = 1, Doubly = 2 };

// Unit cell spanned by e1 = (d, 0) and e2 = (xi, eta) with d, eta > 0.
// Points of the cell are x1*e1 + x2*e2 with x1, x2 in [-1/2, 1/2].
// For doubly periodic cells we additionally require d >= |e2|, i.e. e1 is the
// longer vector; together with eta > 0 this bounds the skew by |xi| <= d.
// Singly periodic cells require |xi| <= d/2 (the strip can always be
// re-slanted into this range) so the non-near images keep a positive gap.
struct UnitCell {
  double d = 1.0;
  double xi = 0.0;
  double eta = 1.0;
  Periodicity periodicity = Periodicity::Doubly;
  int m0 = 1;  // near-field half-width along e1

  Vec2 e1() const { return {d, 0.0}; }
  Vec2 e2() const { return {xi, eta}; }
};

struct LatticeTranslation {
  int m = 0, n = 0;
  Vec2 shift;  // m*e1 + n*e2
};

UnitCell make_unit_cell(double d, double xi, double eta, Periodicity periodicity);

// Aspect ratio used for reporting and path selection: d/eta when doubly
// (>= 1 by construction), max(1, eta/d) when singly.
double aspect(const UnitCell& cell);

// Near translations handled by direct summation:
// doubly: {(m, n): |m| <= m0, |n| <= 1}; singly: {(m, 0): |m| <= 1}.
std::vector<LatticeTranslation> near_translations(const UnitCell& cell);

// Coordinates (x1, x2) of p in the cell basis.
Vec2 cell_coords(const UnitCell& cell, Vec2 p);

// True if p lies in the closed unit cell (with a relative slack of ~1e-12
// so that face samples sitting exactly on the boundary are accepted).
bool in_cell(const UnitCell& cell, Vec2 p);

// Translates p by an integer multiple of e1 into the rectangle
// [-d/2, d/2) x R. Exact for the plane-wave bases: a shift by e1 leaves
// e^{i alpha_m x} and every y-factor unchanged.
Vec2 wrap_to_rectangle(const UnitCell& cell, Vec2 p);

// Sources with either scalar or two-vector strengths, plus targets.
// All points must lie in the closed unit cell; callers that evaluate at
// arbitrary points wrap them first.
struct ParticleSystem {
  std::vector<Vec2> sources;
  std::vector<double> charges;      // scalar strengths (Poisson / ModHelmholtz)
  std::vector<Vec2> forces;         // vector strengths (Stokes / ModStokes)
  std::vector<Vec2> normals;        // per-source unit normals (stresslet only)
  std::vector<cplx> coefficients;   // complex strengths (multipole sources)
  std::vector<Vec2> targets;
};

// Validates point membership and strength array lengths for the given cell.
void validate_system(const UnitCell& cell, const ParticleSystem& sys);

}  // namespace periwave
