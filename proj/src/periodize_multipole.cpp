#include <cmath>
#include <utility>

#include "periwave/periodize.hpp"
#include "periwave/quadrature.hpp"
#include "periodize_common.hpp"

namespace periwave {

namespace {

constexpr cplx kI{0.0, 1.0};
constexpr int kModeCap = 10000000;

cplx ipow(cplx z, int l) {
  cplx r{1.0, 0.0};
  for (int i = 0; i < l; ++i) r *= z;
  return r;
}

double fact(int n) {
  static const double table[] = {1.0, 1.0, 2.0, 6.0};
  return table[n];
}

// Orders above the scalar base whose symbols still matter: the symbol peaks
// near peak_m on the growth side, so extension continues until the mode
// magnitude falls below a relative cutoff past both base and peak.
struct GrowthStop {
  int base = 0;
  int peak = 0;
  double cutoff_ratio = 0.0;
  double dmax = 0.0;
  bool done(int mabs, double mag) const {
    return mabs > std::max(base, peak) && mag <= cutoff_ratio * dmax;
  }
};

void mh_multipole_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const int l = pz.multipole_order;
  const double beta = pz.beta;
  const int base = truncation_order(cell, pz.eps);
  const int peak =
      static_cast<int>(std::ceil(l * cell.d / (2.0 * kPi * cell.eta))) + 1;
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    const cplx pref = ipow(south ? kI : -kI, l) * (kPi / cell.d);
    ScalarPart part;
    part.dir = dir;
    part.take_real = false;
    GrowthStop stop{base, peak, 0.1 * pz.eps, 0.0};
    auto push_mode = [&](int m) {
      const double alpha = 2.0 * kPi * m / cell.d;
      const double chi = std::hypot(alpha, beta);
      double ratio;
      if (south)
        ratio = alpha >= 0.0 ? beta / (chi + alpha) : (chi - alpha) / beta;
      else
        ratio = alpha >= 0.0 ? (chi + alpha) / beta : beta / (chi - alpha);
      const cplx q(chi * cell.eta, (south ? -alpha : alpha) * cell.xi);
      const cplx d = pref * (std::pow(ratio, l) / chi) * detail::qtail(q, chi * cell.eta);
      const double mag = std::abs(d);
      if (stop.done(std::abs(m), mag)) return false;
      stop.dmax = std::max(stop.dmax, mag);
      detail::push_vertical_mode(part.modes, cell, alpha, chi, dir);
      part.diag.push_back(d);
      return true;
    };
    for (int m = -base; m <= base; ++m) push_mode(m);
    const int step = south ? -1 : 1;
    for (int m = step * (base + 1);; m += step) {
      require(std::abs(m) < kModeCap, ErrorCode::NotConverged,
              "multipole vertical mode extension did not terminate");
      if (!push_mode(m)) break;
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

void laplace_multipole_vertical(Periodizer& pz) {
  const UnitCell& cell = pz.cell;
  const int l = pz.multipole_order;
  const int base = truncation_order(cell, pz.eps);
  const int peak =
      static_cast<int>(std::ceil((l - 1) * cell.d / (2.0 * kPi * cell.eta))) + 1;
  for (Direction dir : {Direction::South, Direction::North}) {
    const bool south = (dir == Direction::South);
    const cplx c0 = ipow((south ? -kI : kI) * (2.0 * kPi / cell.d), l) / fact(l - 1);
    ScalarPart part;
    part.dir = dir;
    part.take_real = false;
    GrowthStop stop{base, peak, 0.1 * pz.eps, 0.0};
    // The image sum is holomorphic, so one exponential family per direction
    // covers it and the tail phase is shared by both directions.
    auto push_mode = [&](int m) {
      const double alpha = 2.0 * kPi * m / cell.d;
      const cplx q(alpha * cell.eta, -alpha * cell.xi);
      const cplx d =
          c0 * std::pow(static_cast<double>(m), l - 1) * detail::qtail(q, alpha * cell.eta);
      const double mag = std::abs(d);
      if (stop.done(m, mag)) return false;
      stop.dmax = std::max(stop.dmax, mag);
      detail::push_vertical_mode(part.modes, cell, south ? alpha : -alpha, alpha, dir);
      part.diag.push_back(d);
      return true;
    };
    for (int m = 1; m <= base; ++m) push_mode(m);
    for (int m = base + 1;; ++m) {
      require(m < kModeCap, ErrorCode::NotConverged,
              "multipole vertical mode extension did not terminate");
      if (!push_mode(m)) break;
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

void mh_multipole_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  const int l = pz.multipole_order;
  const double beta = pz.beta;
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    const double s_dir = west ? 1.0 : -1.0;
    const cplx pref = (west || l % 2 == 0 ? 1.0 : -1.0) / (2.0 * std::pow(beta, l));
    ScalarPart part;
    part.dir = dir;
    part.take_real = false;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      const double chi = std::hypot(lam, beta);
      // Every node feeds both phase signs; one is the growth branch of the
      // symbol, the other its reciprocal-decay companion.
      for (double lt : {lam, -lam}) {
        const double symbol = s_dir * lt >= 0.0 ? chi + s_dir * lt
                                                : beta * beta / (chi + std::abs(lt));
        detail::push_horizontal_mode(part.modes, cell, lt, chi, dir);
        part.diag.push_back(pref * std::pow(symbol, l) * (rule.weights[k] / chi) *
                            detail::htail(cell, chi, lt, s_dir));
      }
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

void laplace_multipole_horizontal(Periodizer& pz, const QuadratureRule& rule) {
  const UnitCell& cell = pz.cell;
  const int l = pz.multipole_order;
  const bool doubly = (cell.periodicity == Periodicity::Doubly);
  for (Direction dir : {Direction::West, Direction::East}) {
    const bool west = (dir == Direction::West);
    const double pref = (west || l % 2 == 0) ? 1.0 : -1.0;
    ScalarPart part;
    part.dir = dir;
    part.take_real = false;
    for (std::size_t k = 0; k < rule.size(); ++k) {
      const double lam = rule.nodes[k];
      cplx bracket{1.0, 0.0};
      if (doubly)
        bracket += std::exp(cplx(lam * cell.xi, lam * cell.eta)) +
                   std::exp(cplx(-lam * cell.xi, -lam * cell.eta));
      const double t0 = std::exp(-cell.m0 * lam * cell.d) / (-std::expm1(-lam * cell.d));
      detail::push_horizontal_mode(part.modes, cell, west ? -lam : lam, lam, dir);
      part.diag.push_back(pref * std::pow(lam, l - 1) / fact(l - 1) * rule.weights[k] *
                          bracket * t0);
    }
    pz.scalar_parts.push_back(std::move(part));
  }
}

// Truncation point for the multipole half-line integrands, whose symbols grow
// before the exponential image decay wins; the plain-kernel upper is extended
// until the integrand drops a full eps below its peak.
double multipole_upper(Pde pde, double beta, int l, const UnitCell& cell, double eps) {
  const double gap = cell.m0 * cell.d - std::abs(cell.xi);
  const double eta_osc =
      (cell.periodicity == Periodicity::Doubly) ? 2.0 * cell.eta : cell.eta;
  const double lam0 = 2.0 * kPi / eta_osc;
  auto logmag = [&](double lam) {
    if (pde == Pde::ModHelmholtz) {
      const double chi = std::hypot(lam, beta);
      return l * std::log((chi + lam) / beta) - chi * gap - std::log(chi) -
             std::log(-std::expm1(-chi * cell.d));
    }
    return (l - 1) * std::log(lam) - lam * gap - std::log(-std::expm1(-lam * cell.d));
  };
  const QuadratureRule plain = sommerfeld_rule(pde, beta, cell, eps);
  const double up0 = plain.upper > 0.0 ? plain.upper : std::log(1.0 / eps) / cell.d;
  const double lo = 1e-2 * lam0;
  const double hi = std::max(up0, 4.0 * lam0);
  double peak = -1e300;
  for (int i = 0; i < 400; ++i)
    peak = std::max(peak, logmag(lo * std::pow(hi / lo, i / 399.0)));
  const double cut = peak + std::log(0.1 * eps);
  double up = std::max(up0, lam0);
  int guard = 0;
  while (logmag(up) > cut) {
    up += 0.5 * lam0;
    require(++guard < 2000000, ErrorCode::NotConverged,
            "multipole truncation scan did not terminate");
  }
  return up;
}

}  // namespace

Periodizer make_multipole_periodizer(Pde pde, double beta, int l, const UnitCell& cell,
                                     double eps) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange,
          "eps must lie in [1e-14, 0.1)");
  require(pde == Pde::Poisson || pde == Pde::ModHelmholtz, ErrorCode::Unsupported,
          "multipole periodizers cover the scalar kernels only");
  require(l >= 1 && l <= 4, ErrorCode::OrderOutOfRange, "multipole order must lie in 1..4");
  const bool screened = (pde == Pde::ModHelmholtz);
  if (screened)
    require(beta > 0.0, ErrorCode::MissingBeta, "screened kernel needs beta > 0");

  Periodizer pz;
  pz.pde = pde;
  pz.beta = screened ? beta : 0.0;
  pz.cell = cell;
  pz.eps = eps;
  pz.multipole_order = l;
  pz.requires_neutrality = (pde == Pde::Poisson && l == 1);

  const double up = multipole_upper(pde, pz.beta, l, cell, eps);
  const QuadratureRule rule = detail::certified_rule(pde, pz.beta, cell, eps, up);
  if (cell.periodicity == Periodicity::Doubly) {
    if (screened)
      mh_multipole_vertical(pz);
    else
      laplace_multipole_vertical(pz);
  }
  if (screened)
    mh_multipole_horizontal(pz, rule);
  else
    laplace_multipole_horizontal(pz, rule);
  return pz;
}

}  // namespace periwave
