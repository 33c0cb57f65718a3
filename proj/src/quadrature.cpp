#include "periwave/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "periwave/errors.hpp"

namespace periwave {

namespace {

// Below this beta the lambda integrand is treated as log-singular at 0.
constexpr double kTinyBeta = 1e-6;

struct Layout {
  double upper = 0.0;
  std::vector<double> breaks;  // ascending; front 0, back upper; empty when upper == 0
};

Layout panel_layout(Pde pde, double beta, const UnitCell& cell, double eps,
                    double min_upper) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange,
          "eps must lie in [1e-14, 0.1)");
  bool screened = (pde == Pde::ModHelmholtz || pde == Pde::ModStokes);
  if (screened)
    require(beta > 0.0, ErrorCode::MissingBeta, "screened kernels need beta > 0");
  double b = screened ? beta : 0.0;
  double lg = std::log(1.0 / eps);
  // Truncate where e^{-chi * gap} drops below eps, gap being the smallest
  // horizontal distance from any far image to any target. Doubly periodic
  // cells guarantee gap >= d through m0; a skewed singly strip only has
  // d - |xi|.
  double gap = cell.d;
  if (cell.periodicity == Periodicity::Singly) gap -= std::abs(cell.xi);
  double l2 = lg * lg - (b * gap) * (b * gap);
  Layout out;
  double upper = std::max(l2 > 0.0 ? std::sqrt(l2) / gap : 0.0, min_upper);
  if (upper <= 0.0) return out;  // the whole tail integral is below eps
  out.upper = upper;

  // Panel width matches the fastest oscillation e^{i lambda s} the rule must
  // integrate: |s| <= eta singly, <= 2 eta doubly (cell height plus one shift).
  double eta_osc = (cell.periodicity == Periodicity::Doubly) ? 2.0 * cell.eta : cell.eta;
  double lam0 = 2.0 * kPi / eta_osc;

  // Dyadic refinement of the first panel: down to the sqrt(lambda^2+beta^2)
  // kink scale when beta is meaningful, else deep enough that the panel
  // nearest 0 contributes below eps for log-type integrands.
  int depth;
  if (b >= kTinyBeta)
    depth = static_cast<int>(std::ceil(std::log2(lam0 / b)));
  else
    depth = static_cast<int>(std::ceil(std::log2(1.0 / eps)));
  if (depth < 0) depth = 0;

  out.breaks.push_back(0.0);
  for (int k = -depth; k <= 0; ++k) {
    double x = lam0 * std::ldexp(1.0, k);
    if (x >= out.upper) break;
    out.breaks.push_back(x);
  }
  for (int j = 2; out.breaks.back() < out.upper; ++j) {
    double x = j * lam0;
    if (x >= out.upper) break;
    out.breaks.push_back(x);
  }
  out.breaks.push_back(out.upper);
  return out;
}

QuadratureRule assemble(const Layout& lay, int n) {
  QuadratureRule rule;
  rule.upper = lay.upper;
  rule.points_per_panel = n;
  if (lay.breaks.size() < 2) return rule;
  GaussRule g = gauss_legendre(n);
  for (std::size_t p = 0; p + 1 < lay.breaks.size(); ++p) {
    double mid = 0.5 * (lay.breaks[p] + lay.breaks[p + 1]);
    double half = 0.5 * (lay.breaks[p + 1] - lay.breaks[p]);
    for (int i = 0; i < n; ++i) {
      rule.nodes.push_back(mid + half * g.nodes[i]);
      rule.weights.push_back(half * g.weights[i]);
    }
  }
  return rule;
}

const char* pde_tag(Pde pde) {
  switch (pde) {
    case Pde::Poisson: return "poisson";
    case Pde::ModHelmholtz: return "mhelm";
    case Pde::Stokes: return "stokes";
    case Pde::ModStokes: return "mstokes";
  }
  return "unknown";
}

std::string cache_path(const char* dir, Pde pde, double beta, const UnitCell& cell,
                       double eps, int n) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "rule_%s_p%d_%.12g_%.12g_%.12g_%.12g_n%d.txt",
                pde_tag(pde), static_cast<int>(cell.periodicity), beta * cell.d,
                cell.eta / cell.d, cell.xi / cell.d, eps, n);
  return (std::filesystem::path(dir) / buf).string();
}

bool load_cached(const std::string& path, double d, QuadratureRule* rule) {
  std::ifstream in(path);
  if (!in) return false;
  std::string header;
  if (!std::getline(in, header)) return false;
  std::istringstream hs(header);
  std::string hash, magic;
  std::size_t count = 0;
  double upper_scaled = 0.0;
  int n = 0;
  if (!(hs >> hash >> magic >> count >> upper_scaled >> n)) return false;
  if (hash != "#" || magic != "lambda-rule-v1") return false;
  QuadratureRule out;
  out.upper = upper_scaled / d;
  out.points_per_panel = n;
  out.nodes.reserve(count);
  out.weights.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x = 0.0, w = 0.0;
    if (!(in >> x >> w)) return false;
    out.nodes.push_back(x / d);
    out.weights.push_back(w / d);
  }
  *rule = std::move(out);
  return true;
}

void store_cached(const std::string& path, double d, const QuadratureRule& rule) {
  std::ofstream out(path);
  if (!out) return;  // cache is best-effort
  out.precision(17);
  out << "# lambda-rule-v1 " << rule.size() << ' ' << rule.upper * d << ' '
      << rule.points_per_panel << '\n';
  for (std::size_t i = 0; i < rule.size(); ++i)
    out << rule.nodes[i] * d << ' ' << rule.weights[i] * d << '\n';
}

}  // namespace

GaussRule gauss_legendre(int n) {
  require(n >= 1 && n <= 256, ErrorCode::InvalidOrder, "gauss_legendre order out of range");
  GaussRule out;
  out.nodes.assign(n, 0.0);
  out.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p1 = x;
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    out.nodes[i] = -x;
    out.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    out.weights[i] = w;
    out.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    out.nodes[0] = 0.0;
    out.weights[0] = 2.0;
  }
  return out;
}

QuadratureRule sommerfeld_rule(Pde pde, double beta, const UnitCell& cell, double eps,
                               double min_upper) {
  int n = eps <= 1e-9 ? 16 : 10;
  const char* dir = std::getenv("PERIWAVE_QUAD_CACHE");
  std::string path;
  if (dir && *dir && min_upper == 0.0) {  // extended rules are not cached
    path = cache_path(dir, pde, beta, cell, eps, n);
    QuadratureRule cached;
    if (load_cached(path, cell.d, &cached)) return cached;
  }
  QuadratureRule rule = assemble(panel_layout(pde, beta, cell, eps, min_upper), n);
  if (!path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    store_cached(path, cell.d, rule);
  }
  return rule;
}

double certify_rule(const QuadratureRule& rule, Pde pde, double beta, const UnitCell& cell,
                    double eps) {
  if (rule.size() == 0) return 0.0;
  QuadratureRule fine =
      assemble(panel_layout(pde, beta, cell, eps, rule.upper), 2 * rule.points_per_panel);
  bool screened = (pde == Pde::ModHelmholtz || pde == Pde::ModStokes);
  double b = screened ? beta : 0.0;
  double d = cell.d;
  double eta_osc = (cell.periodicity == Periodicity::Doubly) ? 2.0 * cell.eta : cell.eta;

  // Probes spanning the integrand family the rule is used on: exponential
  // tails with the lattice spacing scale, oscillations up to the cell height,
  // inverse powers as they appear in the diagonal factors (neutral pairings
  // for the singular ones), and plain power weights.
  std::vector<double> svals{0.0, 0.5 * eta_osc, eta_osc};
  std::vector<double> taus{0.0, 0.4 * d, d};
  auto chi = [&](double lam) { return std::sqrt(lam * lam + b * b); };
  auto tail = [&](double lam) {
    double c = chi(lam);
    return std::exp(-2.0 * c * d) / (1.0 - std::exp(-c * d));
  };

  double max_int = 0.0, max_diff = 0.0;
  auto compare = [&](auto&& f) {
    double coarse = 0.0, fineval = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) coarse += rule.weights[i] * f(rule.nodes[i]);
    for (std::size_t i = 0; i < fine.size(); ++i) fineval += fine.weights[i] * f(fine.nodes[i]);
    max_int = std::max(max_int, std::abs(fineval));
    max_diff = std::max(max_diff, std::abs(coarse - fineval));
  };

  for (double s : svals)
    for (double tau : taus) {
      compare([&](double lam) { return lam * tail(lam) * std::exp(-chi(lam) * tau) * std::cos(lam * s); });
      if (b >= kTinyBeta) {
        compare([&](double lam) { return tail(lam) * std::exp(-chi(lam) * tau) * std::cos(lam * s); });
        compare([&](double lam) { return tail(lam) / chi(lam) * std::exp(-chi(lam) * tau) * std::cos(lam * s); });
      } else {
        // The unscreened integrands blow up like 1/lam at 0 per source; they
        // are only ever integrated in east/west-paired, neutral combinations,
        // which is what keeps them bounded. Probe those combinations.
        auto diff = [&](double lam) {
          return std::exp(-lam * (tau + 0.1 * d)) - std::exp(-lam * (tau + 0.6 * d));
        };
        compare([&](double lam) { return tail(lam) * diff(lam) * std::cos(lam * s); });
        compare([&](double lam) {
          return tail(lam) * diff(lam) * -std::expm1(-0.3 * d * lam) / lam * std::cos(lam * s);
        });
      }
    }
  return max_diff / std::max(max_int, 1e-300);
}

BarycentricGrid make_barycentric_grid(double lo, double hi, int m) {
  require(hi > lo, ErrorCode::NonPositiveDimension, "interpolation interval must have positive length");
  require(m >= 2, ErrorCode::GridTooCoarse, "interpolation needs at least 2 nodes");
  require(m <= 256, ErrorCode::InvalidOrder, "interpolation order out of range");
  BarycentricGrid grid;
  grid.lo = lo;
  grid.hi = hi;
  GaussRule g = gauss_legendre(m);
  grid.nodes.resize(m);
  for (int i = 0; i < m; ++i) grid.nodes[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[i];
  // Barycentric weights on the reference nodes; any common scale cancels in
  // the second barycentric form, so normalize to avoid overflow.
  grid.bary_w.assign(m, 1.0);
  for (int k = 0; k < m; ++k) {
    double w = 1.0;
    for (int j = 0; j < m; ++j)
      if (j != k) w /= (g.nodes[k] - g.nodes[j]);
    grid.bary_w[k] = w;
  }
  double scale = 0.0;
  for (double w : grid.bary_w) scale = std::max(scale, std::abs(w));
  for (double& w : grid.bary_w) w /= scale;
  return grid;
}

std::vector<double> interp_coeffs(const BarycentricGrid& grid, double x) {
  int m = grid.size();
  require(m >= 2, ErrorCode::GridTooCoarse, "interpolation grid has too few nodes");
  double t = (2.0 * x - grid.lo - grid.hi) / (grid.hi - grid.lo);
  require(t >= -1.0 - 1e-10 && t <= 1.0 + 1e-10, ErrorCode::OutOfInterval,
          "evaluation point outside interpolation interval");
  std::vector<double> c(m, 0.0);
  // Reference coordinates of the stored nodes.
  for (int k = 0; k < m; ++k) {
    double tk = (2.0 * grid.nodes[k] - grid.lo - grid.hi) / (grid.hi - grid.lo);
    if (t == tk) {  // exact hit; the second form would divide by zero
      std::fill(c.begin(), c.end(), 0.0);
      c[k] = 1.0;
      return c;
    }
    c[k] = grid.bary_w[k] / (t - tk);
  }
  double denom = 0.0;
  for (double v : c) denom += v;
  for (double& v : c) v /= denom;
  return c;
}

int interp_nodes_for(double eps) {
  require(eps >= 1e-14 && eps < 0.1, ErrorCode::PrecisionOutOfRange, "eps must lie in [1e-14, 0.1)");
  return eps >= 1e-6 ? 8 : 16;
}

}  // namespace periwave
