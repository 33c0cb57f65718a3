#pragma once

#include <vector>

#include "periwave/cell.hpp"
#include "periwave/periodize.hpp"

namespace periwave {

// Auto picks Accelerated when the scalar vertical factorizations dominate and
// the problem is large enough to amortize the transforms; Direct always uses
// the explicit low-rank sweep.
enum class ApplyPath { Auto, Direct, Accelerated };

struct ApplyOptions {
  ApplyPath path = ApplyPath::Auto;
  int threads = 1;
  bool with_pressure = false;  // Stokes-family single layer only
  double nufft_eps = 0.0;      // 0: derived from the periodizer eps
};

// Per-target results; only the vectors matching the periodizer kind are
// filled (scalar kernels -> scalar, Stokes family -> velocity and optionally
// pressure, multipole sources -> complex_scalar).
struct FieldResult {
  std::vector<double> scalar;
  std::vector<Vec2> velocity;
  std::vector<double> pressure;
  std::vector<cplx> complex_scalar;
  bool accelerated = false;
};

// Direct summation over one lattice image of the free-space kernel. Override
// accumulate to substitute a fast free-space evaluator; the default is the
// reference double loop.
class FreeSpaceEvaluator {
 public:
  virtual ~FreeSpaceEvaluator() = default;
  // Adds sum_j K(t_l - s_j - shift) q_j to out for every target l. With
  // identity_shift set, exactly coincident target/source pairs are skipped as
  // self-interactions; otherwise coincidence raises CoincidentSourceTarget.
  virtual void accumulate(const Periodizer& pz, const ParticleSystem& sys, Vec2 shift,
                          bool identity_shift, const ApplyOptions& opt,
                          FieldResult& out) const;
};

// The path Auto resolves to for this periodizer and problem size.
ApplyPath choose_path(const Periodizer& pz, std::size_t n_src, std::size_t n_tgt);

// Low-rank far-field apply alone: the sum over all images outside the near
// translations.
FieldResult apply_far(const Periodizer& pz, const ParticleSystem& sys,
                      const ApplyOptions& opt = {});

// Far field plus the direct near-image sum: the lattice-periodic field. The
// (0,0) image skips exactly coincident target/source pairs, so sources may
// also be listed as targets.
FieldResult total_field(const Periodizer& pz, const ParticleSystem& sys,
                        const ApplyOptions& opt = {},
                        const FreeSpaceEvaluator* near_eval = nullptr);

}  // namespace periwave
