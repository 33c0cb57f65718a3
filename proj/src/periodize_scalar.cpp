#include "periwave/periodize.hpp"

#include <cmath>
#include <utility>

#include "periwave/quadrature.hpp"
#include "periodize_common.hpp"

namespace periwave {

int truncation_order(const UnitCell& cell, double eps) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange,
          "eps must lie in [1e-14, 0.1)");
  const double x = 2.0 * kPi * cell.eta / cell.d;
  const double denom = -std::expm1(-x);  // 1 - e^{-2 pi eta / d}, cancellation-free
  const double m = cell.d / (2.0 * kPi * cell.eta) * std::log(1.0 / (denom * eps));
  return static_cast<int>(std::ceil(m));
}

double vertical_tail_bound(const UnitCell& cell, int M) {
  require(M >= 1, ErrorCode::InvalidOrder, "tail bound needs M >= 1");
  const double t = 2.0 * kPi * (M + 1) * cell.eta / cell.d;
  const double t1 = 2.0 * kPi * cell.eta / cell.d;
  return std::exp(-t) /
         (2.0 * kPi * (M + 1) * (-std::expm1(-t)) * (-std::expm1(-t1)));
}

std::size_t Periodizer::rank() const {
  std::size_t r = 0;
  for (const auto& p : scalar_parts) r += p.modes.size();
  for (const auto& p : block_parts) r += p.modes.size();
  for (const auto& p : pressure_parts) r += p.modes.size();
  for (const auto& p : stresslet_parts) r += p.modes.size();
  return r;
}

namespace detail {

QuadratureRule certified_rule(Pde pde, double beta, const UnitCell& cell, double eps,
                              double min_upper) {
  QuadratureRule rule = sommerfeld_rule(pde, beta, cell, eps, min_upper);
  if (rule.size() == 0) return rule;
  const double err = certify_rule(rule, pde, beta, cell, eps);
  require(err <= 100.0 * eps, ErrorCode::NotConverged,
          "half-line quadrature failed its self-check");
  return rule;
}

}  // namespace detail

namespace {

// South/north plane-wave families for the scalar kernels. For the screened
// kernel every mode is kept (chi_0 = beta); for the log kernel m = 0 drops out
// of the exponential family and leaves the linear-in-y term handled by m0.
void add_vertical_scalar(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const bool screened = (pz.pde == Pde::ModHelmholtz);
  const int order = truncation_order(cell, pz.eps);
  for (Direction dir : {Direction::South, Direction::North}) {
    ScalarPart part;
    part.dir = dir;
    part.take_real = true;
    for (int m = -order; m <= order; ++m) {
      if (!screened && m == 0) continue;
      const double alpha = 2.0 * kPi * m / cell.d;
      const double chi = screened ? std::hypot(alpha, pz.beta) : std::abs(alpha);
      cplx q(chi * cell.eta, -alpha * cell.xi);
      if (dir == Direction::North) q = std::conj(q);
      detail::push_vertical_mode(part.modes, cell, alpha, chi, dir);
      part.diag.push_back(detail::qtail(q, chi * cell.eta) / (2.0 * cell.d * chi));
    }
    if (!screened) {
      part.has_m0 = true;
      part.m0_coef = -1.0 / (2.0 * cell.d * cell.eta);
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

void add_horizontal_scalar(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  const bool screened = (pz.pde == Pde::ModHelmholtz);
  for (Direction dir : {Direction::West, Direction::East}) {
    ScalarPart part;
    part.dir = dir;
    part.take_real = true;
    const double sgn = (dir == Direction::West) ? 1.0 : -1.0;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      const double chi = screened ? std::hypot(lam, pz.beta) : lam;
      detail::push_horizontal_mode(part.modes, cell, lam, chi, dir);
      part.diag.push_back(rule.weights[k] / (2.0 * kPi * chi) *
                          detail::htail(cell, chi, lam, sgn));
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

}  // namespace

Periodizer make_periodizer(Pde pde, double beta, const UnitCell& cell, double eps) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange,
          "eps must lie in [1e-14, 0.1)");
  const bool screened = (pde == Pde::ModHelmholtz || pde == Pde::ModStokes);
  if (screened) {
    require(beta > 0.0, ErrorCode::MissingBeta, "screened kernel needs beta > 0");
  }

  Periodizer pz;
  pz.pde = pde;
  pz.beta = screened ? beta : 0.0;
  pz.cell = cell;
  pz.eps = eps;
  pz.requires_neutrality = screened ? (beta < detail::kTinyBeta) : true;

  switch (pde) {
    case Pde::Poisson:
    case Pde::ModHelmholtz: {
      if (cell.periodicity == Periodicity::Doubly) add_vertical_scalar(pz);
      add_horizontal_scalar(pz, detail::certified_rule(pde, pz.beta, cell, eps));
      break;
    }
    case Pde::Stokes: {
      detail::add_stokes_parts(pz);
      detail::add_pressure_parts(pz);
      break;
    }
    case Pde::ModStokes: {
      detail::add_mod_stokes_parts(pz);
      detail::add_pressure_parts(pz);
      break;
    }
  }
  return pz;
}

}  // namespace periwave
