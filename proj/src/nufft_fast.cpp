#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "periwave/errors.hpp"
#include "periwave/nufft.hpp"
#include "periwave/quadrature.hpp"

namespace periwave {
namespace detail {

namespace {

constexpr double kSigma = 2.0;  // FFT grid upsampling factor

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Exponential-of-semicircle spreading kernel on [-1, 1].
struct EsKernel {
  int w = 0;        // support in grid points
  double es = 0.0;  // shape parameter
  double phi(double z) const {
    const double t = 1.0 - z * z;
    if (t <= 0.0) return 0.0;
    return std::exp(es * (std::sqrt(t) - 1.0));
  }
};

EsKernel make_kernel(double eps) {
  eps = std::clamp(eps, 1e-14, 1e-2);
  const int w = std::clamp(static_cast<int>(std::ceil(std::log10(1.0 / eps))) + 1, 3, 16);
  return {w, 2.30 * w};
}

// Transform of the unit kernel: integral of phi(z) e^{-i xi z} over [-1, 1].
// Real and even in xi; the quadrature resolves phi to the kernel's own
// accuracy, which suffices for deconvolution.
double phihat(const EsKernel& k, double xi, const GaussRule& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    acc += g.weights[i] * k.phi(g.nodes[i]) * std::cos(xi * g.nodes[i]);
  return acc;
}

GaussRule phihat_rule(const EsKernel& k) { return gauss_legendre(3 * k.w + 20); }

std::size_t next_fast_even(std::size_t n) {
  if (n < 2) n = 2;
  if (n % 2) ++n;
  for (;; n += 2) {
    std::size_t m = n;
    while (m % 2 == 0) m /= 2;
    while (m % 3 == 0) m /= 3;
    while (m % 5 == 0) m /= 5;
    if (m == 1) return n;
  }
}

void fft(std::vector<cplx>& data, int sign) {
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()),
                            reinterpret_cast<fftw_complex*>(data.data()),
                            reinterpret_cast<fftw_complex*>(data.data()), sign,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
}

void spread_periodic(const std::vector<double>& x, const std::vector<cplx>& c,
                     const EsKernel& k, std::vector<cplx>& g) {
  const long nf = static_cast<long>(g.size());
  const double h = 2.0 * kPi / static_cast<double>(nf);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = std::remainder(x[j], 2.0 * kPi) / h;
    const long i0 = static_cast<long>(std::ceil(t - 0.5 * k.w));
    for (int p = 0; p < k.w; ++p) {
      const double z = (t - static_cast<double>(i0 + p)) * (2.0 / k.w);
      long m = (i0 + p) % nf;
      if (m < 0) m += nf;
      g[static_cast<std::size_t>(m)] += c[j] * k.phi(z);
    }
  }
}

void interp_periodic(const std::vector<double>& x, const std::vector<cplx>& u,
                     const EsKernel& k, std::vector<cplx>& c) {
  const long nf = static_cast<long>(u.size());
  const double h = 2.0 * kPi / static_cast<double>(nf);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = std::remainder(x[j], 2.0 * kPi) / h;
    const long i0 = static_cast<long>(std::ceil(t - 0.5 * k.w));
    cplx acc{0.0, 0.0};
    for (int p = 0; p < k.w; ++p) {
      const double z = (t - static_cast<double>(i0 + p)) * (2.0 / k.w);
      long m = (i0 + p) % nf;
      if (m < 0) m += nf;
      acc += u[static_cast<std::size_t>(m)] * k.phi(z);
    }
    c[j] = acc;
  }
}

std::size_t wrap_mode(long kk, long nf) {
  long m = kk % nf;
  if (m < 0) m += nf;
  return static_cast<std::size_t>(m);
}

}  // namespace

void fast_type1(double eps, const std::vector<double>& x, const std::vector<cplx>& c,
                std::size_t nmodes, std::vector<cplx>& f) {
  f.assign(nmodes, cplx{0.0, 0.0});
  if (x.empty() || nmodes == 0) return;
  const EsKernel k = make_kernel(eps);
  const std::size_t nf = next_fast_even(std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(kSigma * static_cast<double>(nmodes))),
      2 * k.w + 4));
  std::vector<cplx> g(nf, cplx{0.0, 0.0});
  spread_periodic(x, c, k, g);
  fft(g, FFTW_BACKWARD);  // g[k] <- sum_m g[m] e^{+2 pi i k m / nf}
  const GaussRule gl = phihat_rule(k);
  const double h = 2.0 * kPi / static_cast<double>(nf);
  const long kmin = -static_cast<long>(nmodes / 2);
  for (std::size_t idx = 0; idx < nmodes; ++idx) {
    const long kk = kmin + static_cast<long>(idx);
    const double psi = phihat(k, static_cast<double>(kk) * 0.5 * k.w * h, gl);
    f[idx] = g[wrap_mode(kk, static_cast<long>(nf))] * ((2.0 / k.w) / psi);
  }
}

void fast_type2(double eps, const std::vector<double>& x, const std::vector<cplx>& fmodes,
                std::vector<cplx>& c) {
  c.assign(x.size(), cplx{0.0, 0.0});
  if (x.empty() || fmodes.empty()) return;
  const EsKernel k = make_kernel(eps);
  const std::size_t n = fmodes.size();
  const std::size_t nf = next_fast_even(std::max<std::size_t>(
      static_cast<std::size_t>(std::ceil(kSigma * static_cast<double>(n))), 2 * k.w + 4));
  const GaussRule gl = phihat_rule(k);
  const double h = 2.0 * kPi / static_cast<double>(nf);
  const long kmin = -static_cast<long>(n / 2);
  std::vector<cplx> grid(nf, cplx{0.0, 0.0});
  for (std::size_t idx = 0; idx < n; ++idx) {
    const long kk = kmin + static_cast<long>(idx);
    const double psi = phihat(k, static_cast<double>(kk) * 0.5 * k.w * h, gl);
    grid[wrap_mode(kk, static_cast<long>(nf))] = fmodes[idx] * ((2.0 / k.w) / psi);
  }
  fft(grid, FFTW_FORWARD);  // u[m] <- sum_k grid[k] e^{-2 pi i k m / nf}
  interp_periodic(x, grid, k, c);
}

void fast_type3(double eps, const std::vector<double>& x, const std::vector<cplx>& c,
                const std::vector<double>& s, std::vector<cplx>& f) {
  f.assign(s.size(), cplx{0.0, 0.0});
  if (s.empty() || x.empty()) return;
  double xmax = 0.0, smax = 0.0;
  for (double v : x) xmax = std::max(xmax, std::abs(v));
  for (double v : s) smax = std::max(smax, std::abs(v));
  if (xmax == 0.0 || smax == 0.0) {
    cplx tot{0.0, 0.0};
    for (const cplx& v : c) tot += v;
    std::fill(f.begin(), f.end(), tot);
    return;
  }
  const EsKernel k = make_kernel(eps);
  const double hx = kPi / (kSigma * smax);
  const std::size_t nf = next_fast_even(
      2 * static_cast<std::size_t>(std::ceil(xmax / hx)) + 2 * k.w + 4);
  require(nf <= (std::size_t{1} << 24), ErrorCode::Unsupported,
          "type-3 transform extent too large");
  // Spread onto the open grid u_m = (m - nf/2) hx; the grid covers every
  // kernel footprint, so no wraparound happens.
  std::vector<cplx> g(nf, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double t = x[j] / hx + 0.5 * static_cast<double>(nf);
    const long i0 = static_cast<long>(std::ceil(t - 0.5 * k.w));
    for (int p = 0; p < k.w; ++p) {
      const double z = (t - static_cast<double>(i0 + p)) * (2.0 / k.w);
      g[static_cast<std::size_t>(i0 + p)] += c[j] * k.phi(z);
    }
  }
  // sum_m g[m] e^{+i s u_m} is a uniform-mode evaluation at -s hx: grid index
  // m holds mode m - nf/2, which matches the type-2 mode convention.
  std::vector<double> th(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) th[i] = -s[i] * hx;
  std::vector<cplx> inner;
  fast_type2(std::max(0.1 * eps, 1e-14), th, g, inner);
  const GaussRule gl = phihat_rule(k);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double psi = phihat(k, s[i] * 0.5 * k.w * hx, gl);
    f[i] = inner[i] * ((2.0 / k.w) / psi);
  }
}

}  // namespace detail

bool fast_nufft_available() { return true; }

}  // namespace periwave
