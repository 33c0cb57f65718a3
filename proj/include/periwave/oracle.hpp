#pragma once

#include <algorithm>
#include <cmath>

#include "periwave/apply.hpp"
#include "periwave/cell.hpp"
#include "periwave/periodize.hpp"

namespace periwave {

// Reference lattice sum for the far field: adds the free-space kernel over
// every image translation outside the near set, shell by shell (images with
// max(|m|, |n|) == s doubly, (+-s, 0) singly), with each shell enumerated in
// +-paired order so slowly decaying contributions cancel as they are summed.
// Stops early once three consecutive shells change nothing at relative level
// 1e-18. Intended as an independent check of apply_far, so it shares no code
// with the plane-wave path beyond the kernel evaluations themselves.
FieldResult brute_force_far(const Periodizer& pz, const ParticleSystem& sys, int shells,
                            const ApplyOptions& opt = {});

// Field jumps across opposite unit-cell faces. e1/e2 are the RMS jumps over
// all produced components for face pairs separated by e1 and e2 (e2 is zero
// for singly periodic cells); scale is the RMS of the mean-removed face
// values, so additive gauge constants do not inflate it.
struct ResidualReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double scale = 0.0;
  double rel() const { return std::max(e1, e2) / std::max(scale, 1e-300); }
};

// Samples samples_per_side points strictly inside each face, evaluates the
// total field (far apply plus direct near images) at both faces of each pair,
// and reports the jump statistics. The sources and strengths of sys are used
// as given; its targets are ignored.
ResidualReport periodicity_residual(const Periodizer& pz, const ParticleSystem& sys,
                                    int samples_per_side, const ApplyOptions& opt = {});

}  // namespace periwave
