#include "periwave/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "periwave/errors.hpp"

namespace periwave {
namespace {

bool in_near_set(const UnitCell& cell, int m, int n) {
  if (cell.periodicity == Periodicity::Doubly) return std::abs(m) <= cell.m0 && std::abs(n) <= 1;
  return n == 0 && std::abs(m) <= 1;
}

// Half of the shell max(|m|, |n|) == s; the other half is the negation.
std::vector<std::pair<int, int>> half_shell(const UnitCell& cell, int s) {
  std::vector<std::pair<int, int>> half;
  if (cell.periodicity == Periodicity::Singly) {
    if (!in_near_set(cell, s, 0)) half.push_back({s, 0});
    return half;
  }
  for (int m = -s; m <= s; ++m)
    if (!in_near_set(cell, m, s)) half.push_back({m, s});
  for (int n = 1; n < s; ++n)
    if (!in_near_set(cell, s, n)) half.push_back({s, n});
  for (int n = 0; n < s; ++n)
    if (!in_near_set(cell, s, -n)) half.push_back({s, -n});
  return half;
}

double max_abs(const FieldResult& f) {
  double m = 0.0;
  for (double v : f.scalar) m = std::max(m, std::abs(v));
  for (const Vec2& v : f.velocity) m = std::max(m, std::max(std::abs(v.x), std::abs(v.y)));
  for (double v : f.pressure) m = std::max(m, std::abs(v));
  for (const cplx& v : f.complex_scalar) m = std::max(m, std::abs(v));
  return m;
}

double max_diff(const FieldResult& a, const FieldResult& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.scalar.size(); ++i) m = std::max(m, std::abs(a.scalar[i] - b.scalar[i]));
  for (std::size_t i = 0; i < a.velocity.size(); ++i) {
    m = std::max(m, std::abs(a.velocity[i].x - b.velocity[i].x));
    m = std::max(m, std::abs(a.velocity[i].y - b.velocity[i].y));
  }
  for (std::size_t i = 0; i < a.pressure.size(); ++i) m = std::max(m, std::abs(a.pressure[i] - b.pressure[i]));
  for (std::size_t i = 0; i < a.complex_scalar.size(); ++i)
    m = std::max(m, std::abs(a.complex_scalar[i] - b.complex_scalar[i]));
  return m;
}

// Number of real components the result carries per target.
std::size_t component_count(const FieldResult& f) {
  std::size_t n = 0;
  if (!f.scalar.empty()) n += 1;
  if (!f.velocity.empty()) n += 2;
  if (!f.pressure.empty()) n += 1;
  if (!f.complex_scalar.empty()) n += 2;
  return n;
}

void components_at(const FieldResult& f, std::size_t l, std::vector<double>& out) {
  out.clear();
  if (!f.scalar.empty()) out.push_back(f.scalar[l]);
  if (!f.velocity.empty()) {
    out.push_back(f.velocity[l].x);
    out.push_back(f.velocity[l].y);
  }
  if (!f.pressure.empty()) out.push_back(f.pressure[l]);
  if (!f.complex_scalar.empty()) {
    out.push_back(f.complex_scalar[l].real());
    out.push_back(f.complex_scalar[l].imag());
  }
}

}  // namespace

FieldResult brute_force_far(const Periodizer& pz, const ParticleSystem& sys, int shells,
                            const ApplyOptions& opt) {
  validate_system(pz.cell, sys);
  FreeSpaceEvaluator eval;
  FieldResult out;
  FieldResult before;
  int quiet = 0;
  for (int s = 1; s <= shells; ++s) {
    std::vector<std::pair<int, int>> half = half_shell(pz.cell, s);
    if (half.empty()) continue;
    before = out;
    for (auto [m, n] : half) {
      Vec2 plus = pz.cell.e1() * double(m) + pz.cell.e2() * double(n);
      eval.accumulate(pz, sys, plus, false, opt, out);
      eval.accumulate(pz, sys, Vec2{-plus.x, -plus.y}, false, opt, out);
    }
    if (before.scalar.empty() && before.velocity.empty() && before.pressure.empty() &&
        before.complex_scalar.empty())
      continue;  // first populated shell, nothing to compare against
    double scale = std::max(max_abs(out), 1e-300);
    if (max_diff(out, before) <= 1e-18 * scale) {
      if (++quiet >= 3) break;
    } else {
      quiet = 0;
    }
  }
  return out;
}

ResidualReport periodicity_residual(const Periodizer& pz, const ParticleSystem& sys,
                                    int samples_per_side, const ApplyOptions& opt) {
  require(samples_per_side >= 1, ErrorCode::NonPositiveDimension,
          "periodicity_residual requires at least one sample per side");
  const UnitCell& cell = pz.cell;
  std::size_t sps = static_cast<std::size_t>(samples_per_side);
  bool doubly = cell.periodicity == Periodicity::Doubly;

  ParticleSystem probe = sys;
  probe.targets.clear();
  Vec2 e1 = cell.e1(), e2 = cell.e2();
  for (std::size_t v = 0; v < sps; ++v) {
    double t = (double(v) + 0.5) / double(sps) - 0.5;
    probe.targets.push_back(e2 * t - e1 * 0.5);  // west face
    probe.targets.push_back(e2 * t + e1 * 0.5);  // east face
  }
  if (doubly) {
    for (std::size_t v = 0; v < sps; ++v) {
      double t = (double(v) + 0.5) / double(sps) - 0.5;
      probe.targets.push_back(e1 * t - e2 * 0.5);  // south face
      probe.targets.push_back(e1 * t + e2 * 0.5);  // north face
    }
  }

  FieldResult f = total_field(pz, probe, opt);
  std::size_t ncomp = component_count(f);
  std::size_t npts = probe.targets.size();
  std::vector<double> vals(npts * ncomp);
  std::vector<double> comp;
  for (std::size_t l = 0; l < npts; ++l) {
    components_at(f, l, comp);
    for (std::size_t i = 0; i < ncomp; ++i) vals[l * ncomp + i] = comp[i];
  }

  ResidualReport rep;
  auto rms_jump = [&](std::size_t base) {
    double acc = 0.0;
    for (std::size_t v = 0; v < sps; ++v)
      for (std::size_t i = 0; i < ncomp; ++i) {
        double d = vals[(base + 2 * v + 1) * ncomp + i] - vals[(base + 2 * v) * ncomp + i];
        acc += d * d;
      }
    return std::sqrt(acc / double(sps * ncomp));
  };
  rep.e1 = rms_jump(0);
  if (doubly) rep.e2 = rms_jump(2 * sps);

  // Field scale with per-component means removed: additive constants are
  // gauge for the scalar potential and the pressure.
  double acc = 0.0;
  for (std::size_t i = 0; i < ncomp; ++i) {
    double mean = 0.0;
    for (std::size_t l = 0; l < npts; ++l) mean += vals[l * ncomp + i];
    mean /= double(npts);
    for (std::size_t l = 0; l < npts; ++l) {
      double d = vals[l * ncomp + i] - mean;
      acc += d * d;
    }
  }
  rep.scale = std::sqrt(acc / double(npts * ncomp));
  return rep;
}

}  // namespace periwave
