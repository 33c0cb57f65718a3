#pragma once

#include <vector>

#include "periwave/cell.hpp"
#include "periwave/kernels.hpp"
#include "periwave/util.hpp"

namespace periwave {

// Nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

// Composite rule for integrals of smooth-but-peaked kernels over [0, L].
// Panels of width panel_width cover [0, L]; the first panel is split
// dyadically toward 0 so integrands with log or 1/lambda behaviour near the
// origin are resolved. An empty rule (L == 0) is valid and means the whole
// integral is below the requested accuracy.
struct QuadratureRule {
  std::vector<double> nodes;    // lambda values, ascending
  std::vector<double> weights;  // positive weights
  double upper = 0.0;           // truncation point L
  int points_per_panel = 0;
  std::size_t size() const { return nodes.size(); }
};

// Builds the rule used by all horizontal (west/east) factorizations.
// beta = 0 selects the log-singular variant; eps is the target accuracy.
// min_upper extends the truncation point beyond the plain-kernel choice for
// integrands with extra polynomial or exponential-ratio growth.
QuadratureRule sommerfeld_rule(Pde pde, double beta, const UnitCell& cell, double eps,
                               double min_upper = 0.0);

// Self-check: rebuilds the rule with doubled panel order and compares a
// family of representative integrands. Returns the largest relative
// discrepancy seen; callers treat values above ~10*eps as NotConverged.
double certify_rule(const QuadratureRule& rule, Pde pde, double beta, const UnitCell& cell,
                    double eps);

// Legendre-node interpolation grid on [lo, hi] used by the fast apply path.
// Interpolation through m points converges geometrically for functions
// analytic in the Bernstein ellipse of the interval.
struct BarycentricGrid {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> nodes;    // m Legendre points mapped to [lo, hi]
  std::vector<double> bary_w;   // barycentric weights, scale-free
  int size() const { return static_cast<int>(nodes.size()); }
};

BarycentricGrid make_barycentric_grid(double lo, double hi, int m);

// Row of interpolation coefficients for evaluating at x: f(x) = sum_k c_k f(node_k).
// Exact (one-hot) when x coincides with a node. Throws OutOfInterval when x
// lies outside [lo, hi] beyond a small tolerance.
std::vector<double> interp_coeffs(const BarycentricGrid& grid, double x);

// Points-per-interval choice shared by factorizations: 8 nodes reach ~1e-6,
// 16 reach ~1e-13, driven by the rho0 = 3 + sqrt(8) ellipse rate.
int interp_nodes_for(double eps);

}  // namespace periwave
