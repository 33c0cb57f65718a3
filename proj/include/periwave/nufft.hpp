#pragma once

#include <cstddef>
#include <vector>

#include "periwave/util.hpp"

namespace periwave {

// Nonuniform discrete Fourier transforms. Modes are indexed
// k = -(n/2), ..., n - 1 - (n/2) in ascending order (integer division), and
// nothing is normalized:
//   type1: f[k] = sum_j c[j] e^{+i k x[j]}        x in [-pi, pi]
//   type2: c[j] = sum_k f[k] e^{-i k x[j]}        x in [-pi, pi]
//   type3: f[k] = sum_j c[j] e^{+i s[k] x[j]}     x, s arbitrary reals
// Reference evaluates the sums term by term; Accelerated spreads with an
// exponential-of-semicircle kernel onto an upsampled FFT grid and meets a
// relative accuracy of roughly eps (capped near 1e-14).
enum class NufftBackend { Reference, Accelerated };

void nufft_type1(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& c, std::size_t nmodes, std::vector<cplx>& f);

void nufft_type2(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& f, std::vector<cplx>& c);

void nufft_type3(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& c, const std::vector<double>& s,
                 std::vector<cplx>& f);

bool fast_nufft_available();

}  // namespace periwave
