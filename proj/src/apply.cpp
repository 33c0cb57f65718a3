#include "periwave/apply.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "periwave/errors.hpp"
#include "periwave/nufft.hpp"
#include "periwave/quadrature.hpp"

namespace periwave {
namespace {

enum class Kind { Scalar, Velocity, Multipole };

Kind kind_of(const Periodizer& pz) {
  if (pz.multipole_order >= 1) return Kind::Multipole;
  if (pz.pde == Pde::Stokes || pz.pde == Pde::ModStokes) return Kind::Velocity;
  return Kind::Scalar;
}

// Decay-axis coordinate w and oscillation-axis coordinate p of a point.
inline double decay_coord(Axis axis, Vec2 v) { return axis == Axis::Vertical ? v.y : v.x; }
inline double osc_coord(Axis axis, Vec2 v) { return axis == Axis::Vertical ? v.x : v.y; }

inline cplx source_factor(const ModeSet& m, std::size_t r, double w, double p) {
  return std::polar(std::exp(m.decay_s[r] * (w - m.shift_s[r])), -m.phase[r] * p);
}

inline cplx target_factor(const ModeSet& m, std::size_t r, double w, double p) {
  return std::polar(std::exp(m.decay_t[r] * (w - m.shift_t[r])), m.phase[r] * p);
}

// All accumulation is complex; callers take real parts only after every part
// has been added. The divergent small-lambda pieces of the west/east parts are
// purely imaginary (or cancel between the two sides), so folding Re any
// earlier would discard that cancellation.

void add_scalar_modes_direct(const ScalarPart& part, const ParticleSystem& sys,
                             const std::vector<cplx>& strength, int threads,
                             std::vector<cplx>& acc) {
  const ModeSet& ms = part.modes;
  std::size_t nr = ms.size();
  if (nr == 0) return;
  std::vector<cplx> srcsum(nr);
  parallel_for(nr, threads, [&](std::size_t r) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < sys.sources.size(); ++j)
      s += source_factor(ms, r, decay_coord(ms.axis, sys.sources[j]), osc_coord(ms.axis, sys.sources[j])) *
           strength[j];
    srcsum[r] = part.diag[r] * s;
  });
  parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
    double w = decay_coord(ms.axis, sys.targets[l]);
    double p = osc_coord(ms.axis, sys.targets[l]);
    cplx u{0.0, 0.0};
    for (std::size_t r = 0; r < nr; ++r) u += target_factor(ms, r, w, p) * srcsum[r];
    acc[l] += u;
  });
}

void add_scalar_m0(const ScalarPart& part, const ParticleSystem& sys,
                   const std::vector<cplx>& strength, int threads, std::vector<cplx>& acc) {
  if (!part.has_m0) return;
  cplx moment{0.0, 0.0};
  for (std::size_t j = 0; j < sys.sources.size(); ++j)
    moment += decay_coord(part.modes.axis, sys.sources[j]) * strength[j];
  moment *= part.m0_coef;
  parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
    acc[l] += decay_coord(part.modes.axis, sys.targets[l]) * moment;
  });
}

void add_block_direct(const BlockPart& part, const ParticleSystem& sys, int threads,
                      std::vector<Vec2c>& acc) {
  const ModeSet& ms = part.modes;
  std::size_t nr = ms.size();
  std::vector<Vec2c> s1(nr), s2(nr);
  parallel_for(nr, threads, [&](std::size_t r) {
    Vec2c a, b;
    for (std::size_t j = 0; j < sys.sources.size(); ++j) {
      double w = decay_coord(ms.axis, sys.sources[j]);
      cplx f = source_factor(ms, r, w, osc_coord(ms.axis, sys.sources[j]));
      Vec2c fv{f * sys.forces[j].x, f * sys.forces[j].y};
      a += fv;
      if (part.three_term) b += w * fv;
    }
    s1[r] = a;
    s2[r] = b;
  });
  parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
    double w = decay_coord(ms.axis, sys.targets[l]);
    double p = osc_coord(ms.axis, sys.targets[l]);
    Vec2c u;
    for (std::size_t r = 0; r < nr; ++r) {
      Vec2c u0 = part.diag_a[r] * s1[r];
      if (part.three_term) u0 += part.diag_b[r] * s2[r] - w * (part.diag_b[r] * s1[r]);
      u += target_factor(ms, r, w, p) * u0;
    }
    acc[l] += u;
  });
  if (part.has_m0) {
    Vec2 moment{};
    for (std::size_t j = 0; j < sys.sources.size(); ++j)
      moment += sys.forces[j] * decay_coord(ms.axis, sys.sources[j]);
    Vec2 base = part.m0_mat * moment;
    parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
      double w = decay_coord(ms.axis, sys.targets[l]);
      acc[l] += Vec2c{w * base.x, w * base.y};
    });
  }
}

void add_pressure_direct(const PressurePart& part, const ParticleSystem& sys, int threads,
                         std::vector<cplx>& acc) {
  const ModeSet& ms = part.modes;
  std::size_t nr = ms.size();
  std::vector<cplx> srcsum(nr);
  parallel_for(nr, threads, [&](std::size_t r) {
    cplx s{0.0, 0.0};
    for (std::size_t j = 0; j < sys.sources.size(); ++j) {
      cplx rf = part.row[r].x * sys.forces[j].x + part.row[r].y * sys.forces[j].y;
      s += source_factor(ms, r, decay_coord(ms.axis, sys.sources[j]), osc_coord(ms.axis, sys.sources[j])) * rf;
    }
    srcsum[r] = part.diag[r] * s;
  });
  parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
    double w = decay_coord(ms.axis, sys.targets[l]);
    double p = osc_coord(ms.axis, sys.targets[l]);
    cplx u{0.0, 0.0};
    for (std::size_t r = 0; r < nr; ++r) u += target_factor(ms, r, w, p) * srcsum[r];
    acc[l] += u;
  });
  if (part.has_m0) {
    double moment = 0.0;
    for (std::size_t j = 0; j < sys.sources.size(); ++j)
      moment += decay_coord(ms.axis, sys.sources[j]) * dot(part.m0_row, sys.forces[j]);
    cplx shiftc = part.m0_coef * moment;
    parallel_for(sys.targets.size(), threads, [&](std::size_t l) { acc[l] += shiftc; });
  }
}

void add_stresslet_direct(const StressletPart& part, const ParticleSystem& sys, int threads,
                          std::vector<Vec2c>& acc) {
  const ModeSet& ms = part.modes;
  std::size_t nr = ms.size();
  std::vector<Vec2c> p0(nr), p1(nr);
  parallel_for(nr, threads, [&](std::size_t r) {
    Vec2c v1, v2, v3, v4;
    for (std::size_t j = 0; j < sys.sources.size(); ++j) {
      double w = decay_coord(ms.axis, sys.sources[j]);
      cplx f = source_factor(ms, r, w, osc_coord(ms.axis, sys.sources[j]));
      Vec2c fv{f * sys.forces[j].x, f * sys.forces[j].y};
      double n1 = sys.normals[j].x, n2 = sys.normals[j].y;
      v1 += n1 * fv;
      v2 += n2 * fv;
      v3 += (n1 * w) * fv;
      v4 += (n2 * w) * fv;
    }
    Vec2c q1 = part.smat[r] * (part.sa[r] * v1 + part.sb[r] * v2);
    Vec2c q0 = part.a1[r] * v1 + part.a2[r] * v2 + part.off[r] * q1 -
               part.smat[r] * (part.sa[r] * v3 + part.sb[r] * v4);
    p0[r] = q0;
    p1[r] = q1;
  });
  parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
    double w = decay_coord(ms.axis, sys.targets[l]);
    double p = osc_coord(ms.axis, sys.targets[l]);
    Vec2c u;
    for (std::size_t r = 0; r < nr; ++r) u += target_factor(ms, r, w, p) * (p0[r] + w * p1[r]);
    acc[l] += u;
  });
  if (part.has_m0) {
    Vec2 moment{};
    for (std::size_t j = 0; j < sys.sources.size(); ++j) {
      double n1 = sys.normals[j].x, n2 = sys.normals[j].y;
      moment += Vec2{n2 * sys.forces[j].x + n1 * sys.forces[j].y,
                     n1 * sys.forces[j].x + n2 * sys.forces[j].y};
    }
    Vec2 base = moment * part.m0_coef;
    parallel_for(sys.targets.size(), threads, [&](std::size_t l) {
      double w = decay_coord(ms.axis, sys.targets[l]);
      acc[l] += Vec2c{w * base.x, w * base.y};
    });
  }
}

// Vertical parts all oscillate at integer multiples of 2 pi / d, so the
// source sums of every part collapse onto one set of Fourier coefficients:
// interpolate the y-exponentials on a small Legendre grid (the anterpolation
// is one-sided, so its error stays below rho0^{-m} relative to each mode's
// own magnitude) and evaluate the x-sums with one type-1 NUFFT per grid line.
// The target side mirrors this with one type-2 per grid line.
void accel_vertical_scalar(const Periodizer& pz, const std::vector<const ScalarPart*>& parts,
                           const ParticleSystem& sys, const std::vector<cplx>& strength,
                           const ApplyOptions& opt, std::vector<cplx>& acc) {
  std::size_t ns = sys.sources.size(), nt = sys.targets.size();
  if (ns == 0 || nt == 0) return;
  const UnitCell& cell = pz.cell;
  long mmax = 0;
  for (const ScalarPart* part : parts)
    for (double ph : part->modes.phase)
      mmax = std::max(mmax, std::lround(std::abs(ph) * cell.d / (2.0 * kPi)));
  std::size_t nmodes = static_cast<std::size_t>(2 * mmax + 1);
  int mg = interp_nodes_for(pz.eps);
  BarycentricGrid grid = make_barycentric_grid(-0.5 * cell.eta, 0.5 * cell.eta, mg);
  double inner_eps = opt.nufft_eps > 0.0 ? opt.nufft_eps : std::max(1e-14, 0.01 * pz.eps);
  double kx = 2.0 * kPi / cell.d;

  std::vector<double> xs(ns);
  std::vector<std::vector<double>> srow(ns);
  parallel_for(ns, opt.threads, [&](std::size_t j) {
    xs[j] = -wrap_to_rectangle(cell, sys.sources[j]).x * kx;
    srow[j] = interp_coeffs(grid, sys.sources[j].y);
  });

  std::vector<std::vector<cplx>> fline(static_cast<std::size_t>(mg));
  std::vector<cplx> c(ns);
  for (int k = 0; k < mg; ++k) {
    for (std::size_t j = 0; j < ns; ++j) c[j] = srow[j][static_cast<std::size_t>(k)] * strength[j];
    nufft_type1(NufftBackend::Accelerated, inner_eps, xs, c, nmodes, fline[static_cast<std::size_t>(k)]);
  }

  std::vector<std::vector<cplx>> gline(static_cast<std::size_t>(mg), std::vector<cplx>(nmodes, cplx{0.0, 0.0}));
  for (const ScalarPart* part : parts) {
    const ModeSet& ms = part->modes;
    for (std::size_t r = 0; r < ms.size(); ++r) {
      std::size_t midx = static_cast<std::size_t>(std::lround(ms.phase[r] * cell.d / (2.0 * kPi)) + mmax);
      cplx s{0.0, 0.0};
      for (int k = 0; k < mg; ++k)
        s += std::exp(ms.decay_s[r] * (grid.nodes[static_cast<std::size_t>(k)] - ms.shift_s[r])) *
             fline[static_cast<std::size_t>(k)][midx];
      s *= part->diag[r];
      for (int k = 0; k < mg; ++k)
        gline[static_cast<std::size_t>(k)][midx] +=
            s * std::exp(ms.decay_t[r] * (grid.nodes[static_cast<std::size_t>(k)] - ms.shift_t[r]));
    }
  }

  std::vector<double> xt(nt);
  parallel_for(nt, opt.threads, [&](std::size_t l) { xt[l] = -wrap_to_rectangle(cell, sys.targets[l]).x * kx; });
  std::vector<std::vector<cplx>> vline(static_cast<std::size_t>(mg));
  for (int k = 0; k < mg; ++k)
    nufft_type2(NufftBackend::Accelerated, inner_eps, xt, gline[static_cast<std::size_t>(k)],
                vline[static_cast<std::size_t>(k)]);

  parallel_for(nt, opt.threads, [&](std::size_t l) {
    std::vector<double> trow = interp_coeffs(grid, sys.targets[l].y);
    cplx u{0.0, 0.0};
    for (int k = 0; k < mg; ++k) u += trow[static_cast<std::size_t>(k)] * vline[static_cast<std::size_t>(k)][l];
    acc[l] += u;
  });
}

// Singly periodic west/east parts: the oscillation frequencies lambda are
// continuous, so both the source sums and the target evaluations become
// type-3 transforms in y, one per node of the x interpolation grid. The grid
// spans exactly the data, and the node count is chosen so the Bernstein
// ellipse of the data interval stays inside the 2d pair gap: extending the
// interval of width W by the margin 2d - W on each side multiplies each
// mode's interpolation error by less than its own pair decay e^{-lambda
// (2d - W)}, giving a uniform rho^{-m} bound.
void accel_horizontal_scalar(const Periodizer& pz, const std::vector<const ScalarPart*>& parts,
                             const ParticleSystem& sys, const std::vector<cplx>& strength,
                             const ApplyOptions& opt, std::vector<cplx>& acc) {
  std::size_t ns = sys.sources.size(), nt = sys.targets.size();
  if (ns == 0 || nt == 0) return;
  const UnitCell& cell = pz.cell;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Vec2& p : sys.sources) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  for (const Vec2& p : sys.targets) {
    lo = std::min(lo, p.x);
    hi = std::max(hi, p.x);
  }
  if (hi - lo < 1e-12 * cell.d) hi = lo + 1e-12 * cell.d;
  double width = hi - lo;
  double margin = 2.0 * cell.d - width;  // positive: in-cell x spans at most d + |xi| <= 1.5 d
  double eps = std::max(pz.eps, 1e-14);
  double u = 1.0 + 2.0 * margin / width;
  double rho = u + std::sqrt(u * u - 1.0);
  int mg = std::clamp(static_cast<int>(std::ceil(std::log(1.0 / eps) / std::log(rho))) + 2, 4, 64);
  BarycentricGrid grid = make_barycentric_grid(lo, hi, mg);
  double inner_eps = opt.nufft_eps > 0.0 ? opt.nufft_eps : std::max(1e-14, 0.01 * pz.eps);

  std::vector<double> ys(ns), yt(nt);
  std::vector<std::vector<double>> srow(ns);
  parallel_for(ns, opt.threads, [&](std::size_t j) {
    ys[j] = sys.sources[j].y;
    srow[j] = interp_coeffs(grid, sys.sources[j].x);
  });
  std::vector<std::vector<double>> trow(nt);
  parallel_for(nt, opt.threads, [&](std::size_t l) {
    yt[l] = sys.targets[l].y;
    trow[l] = interp_coeffs(grid, sys.targets[l].x);
  });

  for (const ScalarPart* part : parts) {
    const ModeSet& ms = part->modes;
    std::size_t nr = ms.size();
    if (nr == 0) continue;
    std::vector<double> neg_lam(nr);
    for (std::size_t r = 0; r < nr; ++r) neg_lam[r] = -ms.phase[r];

    // Source side: F_k[r] = sum_j srow[j][k] q_j e^{-i lambda_r y_j}.
    std::vector<std::vector<cplx>> fk(static_cast<std::size_t>(mg));
    std::vector<cplx> c(ns);
    for (int k = 0; k < mg; ++k) {
      for (std::size_t j = 0; j < ns; ++j) c[j] = srow[j][static_cast<std::size_t>(k)] * strength[j];
      nufft_type3(NufftBackend::Accelerated, inner_eps, ys, c, neg_lam, fk[static_cast<std::size_t>(k)]);
    }

    // Mode sums with diagonal, then target-side grid amplitudes.
    std::vector<std::vector<cplx>> ak(static_cast<std::size_t>(mg), std::vector<cplx>(nr));
    for (std::size_t r = 0; r < nr; ++r) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < mg; ++k)
        s += std::exp(ms.decay_s[r] * (grid.nodes[static_cast<std::size_t>(k)] - ms.shift_s[r])) *
             fk[static_cast<std::size_t>(k)][r];
      s *= part->diag[r];
      for (int k = 0; k < mg; ++k)
        ak[static_cast<std::size_t>(k)][r] =
            s * std::exp(ms.decay_t[r] * (grid.nodes[static_cast<std::size_t>(k)] - ms.shift_t[r]));
    }

    // Target side: v_k[l] = sum_r ak[k][r] e^{+i lambda_r y_l}.
    std::vector<std::vector<cplx>> vk(static_cast<std::size_t>(mg));
    std::vector<double> lam(nr);
    for (std::size_t r = 0; r < nr; ++r) lam[r] = ms.phase[r];
    for (int k = 0; k < mg; ++k)
      nufft_type3(NufftBackend::Accelerated, inner_eps, lam, ak[static_cast<std::size_t>(k)], yt,
                  vk[static_cast<std::size_t>(k)]);

    parallel_for(nt, opt.threads, [&](std::size_t l) {
      cplx v{0.0, 0.0};
      for (int k = 0; k < mg; ++k) v += trow[l][static_cast<std::size_t>(k)] * vk[static_cast<std::size_t>(k)][l];
      acc[l] += v;
    });
  }
}

void check_strengths(const Periodizer& pz, const ParticleSystem& sys, Kind kind) {
  std::size_t ns = sys.sources.size();
  if (kind == Kind::Multipole) {
    require(sys.coefficients.size() == ns, ErrorCode::LengthMismatch,
            "multipole apply requires one complex coefficient per source");
  } else if (pz.dlp) {
    require(sys.forces.size() == ns && sys.normals.size() == ns, ErrorCode::LengthMismatch,
            "double-layer apply requires a force vector and a unit normal per source");
  } else if (kind == Kind::Velocity) {
    require(sys.forces.size() == ns, ErrorCode::LengthMismatch,
            "velocity apply requires one force vector per source");
  } else {
    require(sys.charges.size() == ns, ErrorCode::LengthMismatch,
            "scalar apply requires one charge per source");
  }
  if (!pz.requires_neutrality) return;
  if (kind == Kind::Multipole) {
    cplx s{0.0, 0.0};
    double tot = 0.0;
    for (const cplx& cc : sys.coefficients) {
      s += cc;
      tot += std::abs(cc);
    }
    require(std::abs(s) <= 1e-12 * tot, ErrorCode::NotNeutral,
            "this periodizer requires coefficients summing to zero");
  } else if (kind == Kind::Velocity) {
    Vec2 s{};
    double tot = 0.0;
    for (const Vec2& f : sys.forces) {
      s += f;
      tot += norm(f);
    }
    require(norm(s) <= 1e-12 * tot, ErrorCode::NotNeutral,
            "this periodizer requires forces summing to zero");
  } else {
    double s = 0.0, tot = 0.0;
    for (double q : sys.charges) {
      s += q;
      tot += std::abs(q);
    }
    require(std::abs(s) <= 1e-12 * tot, ErrorCode::NotNeutral,
            "this periodizer requires charges summing to zero");
  }
}

void ensure_sizes(FieldResult& out, Kind kind, std::size_t nt, bool with_pressure) {
  auto fit = [nt](auto& v) {
    if (v.size() != nt) v.assign(nt, typename std::decay_t<decltype(v)>::value_type{});
  };
  if (kind == Kind::Multipole) fit(out.complex_scalar);
  else if (kind == Kind::Velocity) {
    fit(out.velocity);
    if (with_pressure) fit(out.pressure);
  } else
    fit(out.scalar);
}

}  // namespace

ApplyPath choose_path(const Periodizer& pz, std::size_t n_src, std::size_t n_tgt) {
  bool scalar_kind =
      (pz.pde == Pde::Poisson || pz.pde == Pde::ModHelmholtz) && pz.multipole_order == 0 && !pz.dlp;
  if (scalar_kind && pz.rank() > 256 && n_src + n_tgt > 4096 && fast_nufft_available())
    return ApplyPath::Accelerated;
  return ApplyPath::Direct;
}

FieldResult apply_far(const Periodizer& pz, const ParticleSystem& sys, const ApplyOptions& opt) {
  validate_system(pz.cell, sys);
  Kind kind = kind_of(pz);
  check_strengths(pz, sys, kind);
  require(!opt.with_pressure || !pz.pressure_parts.empty(), ErrorCode::Unsupported,
          "pressure output is not available for this periodizer");
  std::size_t nt = sys.targets.size();
  ApplyPath path = opt.path == ApplyPath::Auto ? choose_path(pz, sys.sources.size(), nt) : opt.path;

  FieldResult out;
  if (kind == Kind::Velocity) {
    std::vector<Vec2c> acc(nt);
    for (const BlockPart& part : pz.block_parts) add_block_direct(part, sys, opt.threads, acc);
    for (const StressletPart& part : pz.stresslet_parts) add_stresslet_direct(part, sys, opt.threads, acc);
    out.velocity.resize(nt);
    for (std::size_t l = 0; l < nt; ++l) out.velocity[l] = {acc[l].x.real(), acc[l].y.real()};
    if (opt.with_pressure) {
      std::vector<cplx> accp(nt);
      for (const PressurePart& part : pz.pressure_parts) add_pressure_direct(part, sys, opt.threads, accp);
      out.pressure.resize(nt);
      for (std::size_t l = 0; l < nt; ++l) out.pressure[l] = accp[l].real();
    }
    return out;
  }

  std::vector<cplx> widened;
  const std::vector<cplx>* strength = &sys.coefficients;
  if (kind == Kind::Scalar) {
    widened.assign(sys.charges.begin(), sys.charges.end());
    strength = &widened;
  }
  std::vector<cplx> acc(nt);
  std::vector<const ScalarPart*> vert_accel, horiz_accel;
  for (const ScalarPart& part : pz.scalar_parts) {
    bool accel = false;
    if (path == ApplyPath::Accelerated && part.modes.size() > 0) {
      if (part.modes.axis == Axis::Vertical) {
        vert_accel.push_back(&part);
        accel = true;
      } else if (pz.cell.periodicity == Periodicity::Singly) {
        horiz_accel.push_back(&part);
        accel = true;
      }
    }
    if (!accel) add_scalar_modes_direct(part, sys, *strength, opt.threads, acc);
    add_scalar_m0(part, sys, *strength, opt.threads, acc);
  }
  if (!vert_accel.empty()) {
    accel_vertical_scalar(pz, vert_accel, sys, *strength, opt, acc);
    out.accelerated = true;
  }
  if (!horiz_accel.empty()) {
    accel_horizontal_scalar(pz, horiz_accel, sys, *strength, opt, acc);
    out.accelerated = true;
  }
  if (kind == Kind::Multipole) {
    out.complex_scalar = std::move(acc);
  } else {
    out.scalar.resize(nt);
    for (std::size_t l = 0; l < nt; ++l) out.scalar[l] = acc[l].real();
  }
  return out;
}

void FreeSpaceEvaluator::accumulate(const Periodizer& pz, const ParticleSystem& sys, Vec2 shift,
                                    bool identity_shift, const ApplyOptions& opt,
                                    FieldResult& out) const {
  Kind kind = kind_of(pz);
  check_strengths(pz, sys, kind);
  require(!opt.with_pressure || kind == Kind::Velocity, ErrorCode::Unsupported,
          "pressure output is not available for this periodizer");
  require(!(opt.with_pressure && pz.dlp), ErrorCode::Unsupported,
          "pressure output is not available for the double-layer kernel");
  std::size_t nt = sys.targets.size(), ns = sys.sources.size();
  ensure_sizes(out, kind, nt, opt.with_pressure);
  std::atomic<bool> coincident{false};
  parallel_for(nt, opt.threads, [&](std::size_t l) {
    Vec2 t = sys.targets[l];
    if (kind == Kind::Multipole) {
      cplx u{0.0, 0.0};
      for (std::size_t j = 0; j < ns; ++j) {
        Vec2 r = t - sys.sources[j] - shift;
        if (r.x == 0.0 && r.y == 0.0) {
          if (!identity_shift) coincident.store(true);
          continue;
        }
        u += multipole_kernel(pz.pde, pz.beta, pz.multipole_order, r) * sys.coefficients[j];
      }
      out.complex_scalar[l] += u;
    } else if (pz.dlp) {
      Vec2 u{};
      for (std::size_t j = 0; j < ns; ++j) {
        Vec2 r = t - sys.sources[j] - shift;
        if (r.x == 0.0 && r.y == 0.0) {
          if (!identity_shift) coincident.store(true);
          continue;
        }
        u += stresslet_dlp(r, sys.normals[j]) * sys.forces[j];
      }
      out.velocity[l] += u;
    } else if (kind == Kind::Velocity) {
      Vec2 u{};
      double pr = 0.0;
      for (std::size_t j = 0; j < ns; ++j) {
        Vec2 r = t - sys.sources[j] - shift;
        if (r.x == 0.0 && r.y == 0.0) {
          if (!identity_shift) coincident.store(true);
          continue;
        }
        u += greens_block(pz.pde, pz.beta, r) * sys.forces[j];
        if (opt.with_pressure) pr += dot(pressurelet(r), sys.forces[j]);
      }
      out.velocity[l] += u;
      if (opt.with_pressure) out.pressure[l] += pr;
    } else {
      double u = 0.0;
      for (std::size_t j = 0; j < ns; ++j) {
        Vec2 r = t - sys.sources[j] - shift;
        if (r.x == 0.0 && r.y == 0.0) {
          if (!identity_shift) coincident.store(true);
          continue;
        }
        u += greens_scalar(pz.pde, pz.beta, r) * sys.charges[j];
      }
      out.scalar[l] += u;
    }
  });
  require(!coincident.load(), ErrorCode::CoincidentSourceTarget,
          "a target coincides with a lattice image of a source");
}

FieldResult total_field(const Periodizer& pz, const ParticleSystem& sys, const ApplyOptions& opt,
                        const FreeSpaceEvaluator* near_eval) {
  static const FreeSpaceEvaluator default_eval;
  const FreeSpaceEvaluator& ev = near_eval ? *near_eval : default_eval;
  FieldResult out = apply_far(pz, sys, opt);
  for (const LatticeTranslation& tr : near_translations(pz.cell))
    ev.accumulate(pz, sys, tr.shift, tr.m == 0 && tr.n == 0, opt, out);
  return out;
}

}  // namespace periwave
