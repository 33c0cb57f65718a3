#pragma once

#include <vector>

#include "periwave/cell.hpp"
#include "periwave/kernels.hpp"
#include "periwave/quadrature.hpp"
#include "periwave/util.hpp"

namespace periwave {

enum class Axis { Vertical, Horizontal };
enum class Direction { South, North, West, East };

// Mode data shared by every low-rank part. For mode r and a particle with
// decay-axis coordinate w and oscillation-axis coordinate p (vertical parts:
// w = y, p = x; horizontal parts: w = x, p = y):
//   target factor  e^{decay_t[r] (w - shift_t[r])} e^{+i phase[r] p}
//   source factor  e^{decay_s[r] (w - shift_s[r])} e^{-i phase[r] p}
// Shifts put every stored exponent in (-inf, 0] for coordinates in the
// rectangular span (|w| <= d/2 or eta/2); on skewed cells horizontal
// exponents may exceed zero by up to |decay| |xi| / 2, which the paired
// image gap in the diagonal more than absorbs. The diagonal factors carry
// the compensating e^{decay_t shift_t + decay_s shift_s} folded in
// analytically so no intermediate overflows.
struct ModeSet {
  Axis axis = Axis::Vertical;
  std::vector<double> phase;
  std::vector<double> decay_t;
  std::vector<double> decay_s;
  std::vector<double> shift_t;
  std::vector<double> shift_s;
  std::size_t size() const { return phase.size(); }
};

// u_l += Re?[ sum_r Tfac_l(r) diag[r] sum_j Sfac_j(r) q_j ], plus an optional
// rank-one term m0_coef * w_l * sum_j w_j q_j with the plain coordinates.
struct ScalarPart {
  Direction dir = Direction::South;
  ModeSet modes;
  std::vector<cplx> diag;
  bool take_real = true;
  bool has_m0 = false;
  double m0_coef = 0.0;
};

// Vector version with 2x2 diagonal blocks. With three_term set the applied
// operator is L D_a R - W_T L D_b R + L D_b R W_S where W_T, W_S are the
// diagonal matrices of target/source decay-axis coordinates; otherwise only
// the D_a term is used. The optional rank-one term mirrors ScalarPart:
// u_l += m0_mat * (w_l * sum_j w_j q_j).
struct BlockPart {
  Direction dir = Direction::South;
  ModeSet modes;
  std::vector<Mat2c> diag_a;
  std::vector<Mat2c> diag_b;
  bool three_term = false;
  bool take_real = true;
  bool has_m0 = false;
  Mat2 m0_mat{0.0, 0.0, 0.0, 0.0};
};

// Scalar-valued part applied to vector strengths: for mode r the source sum
// is sum_j Sfac_j(r) (row[r] . f_j) and the target side is scalar. The
// optional rank-one term adds the target-independent constant
// m0_coef * sum_j w_j (m0_row . f_j).
struct PressurePart {
  Direction dir = Direction::South;
  ModeSet modes;
  std::vector<cplx> diag;
  std::vector<Vec2c> row;
  bool has_m0 = false;
  double m0_coef = 0.0;
  Vec2 m0_row{0.0, 0.0};
};

// Double-layer (stresslet) part. Sources carry unit normals n_j and a vector
// density f_j; per mode r the apply accumulates four weighted source sums
// (each a complex two-vector)
//   V1 = sum_j Sfac_j n1_j f_j   V3 = sum_j Sfac_j w_j n1_j f_j
//   V2 = sum_j Sfac_j n2_j f_j   V4 = sum_j Sfac_j w_j n2_j f_j
// and the target contribution is
//   u_l += Re[ Tfac_l(r) (P0_r + w_l P1_r) ]
//   P1_r = S_r (sa_r V1 + sb_r V2)
//   P0_r = A1_r V1 + A2_r V2 + off_r P1_r - S_r (sa_r V3 + sb_r V4)
// with all tails, prefactors and shift compensations folded into A1, A2, S.
struct StressletPart {
  Direction dir = Direction::South;
  ModeSet modes;
  std::vector<Mat2c> a1, a2;  // normal-symbol matrices (amplitude folded)
  std::vector<Mat2c> smat;    // derivative-symbol matrix (amplitude folded)
  std::vector<cplx> sa, sb;   // derivative scalar weights on (n1, n2)
  std::vector<cplx> off;      // offset added to the target decay coordinate
  bool has_m0 = false;
  // u_l += m0_coef * w_l * sum_j [[n2, n1],[n1, n2]]_j f_j
  double m0_coef = 0.0;
};

struct Periodizer {
  Pde pde = Pde::Poisson;
  double beta = 0.0;
  UnitCell cell;
  double eps = 1e-9;
  bool dlp = false;            // sources carry normals, stresslet parts active
  int multipole_order = 0;     // 0: monopole kernels; >=1: multipole variant
  bool requires_neutrality = false;
  std::vector<ScalarPart> scalar_parts;
  std::vector<BlockPart> block_parts;
  std::vector<PressurePart> pressure_parts;
  std::vector<StressletPart> stresslet_parts;
  std::size_t rank() const;
};

// Number of vertical plane-wave modes per sign: modes run m = -M..M.
int truncation_order(const UnitCell& cell, double eps);

// Upper bound on the vertical truncation error of the 1/(2 d chi) family when
// M modes per sign are kept; decreasing in M.
double vertical_tail_bound(const UnitCell& cell, int M);

// Point-charge / point-force periodizers (single layer).
Periodizer make_periodizer(Pde pde, double beta, const UnitCell& cell, double eps);

// Stokes double-layer periodizer (velocity of the stresslet lattice sum).
Periodizer make_stokes_dlp_periodizer(const UnitCell& cell, double eps);

// Multipole source periodizers: Poisson l >= 1 sums 1/z^l images, modified
// Helmholtz l >= 1 sums K_l(beta r) e^{i l theta} images. Fields are complex.
Periodizer make_multipole_periodizer(Pde pde, double beta, int l, const UnitCell& cell,
                                     double eps);

}  // namespace periwave
