#include "periwave/nufft.hpp"

#include <cmath>
#include <complex>

#include "periwave/errors.hpp"

namespace periwave {

namespace detail {
void fast_type1(double eps, const std::vector<double>& x, const std::vector<cplx>& c,
                std::size_t nmodes, std::vector<cplx>& f);
void fast_type2(double eps, const std::vector<double>& x, const std::vector<cplx>& f,
                std::vector<cplx>& c);
void fast_type3(double eps, const std::vector<double>& x, const std::vector<cplx>& c,
                const std::vector<double>& s, std::vector<cplx>& f);
}  // namespace detail

namespace {

void ref_type1(const std::vector<double>& x, const std::vector<cplx>& c,
               std::size_t nmodes, std::vector<cplx>& f) {
  f.assign(nmodes, cplx{0.0, 0.0});
  const long kmin = -static_cast<long>(nmodes / 2);
  for (std::size_t j = 0; j < x.size(); ++j) {
    for (std::size_t k = 0; k < nmodes; ++k)
      f[k] += c[j] * std::polar(1.0, (kmin + static_cast<long>(k)) * x[j]);
  }
}

void ref_type2(const std::vector<double>& x, const std::vector<cplx>& f,
               std::vector<cplx>& c) {
  c.assign(x.size(), cplx{0.0, 0.0});
  const long kmin = -static_cast<long>(f.size() / 2);
  for (std::size_t j = 0; j < x.size(); ++j) {
    cplx acc{0.0, 0.0};
    for (std::size_t k = 0; k < f.size(); ++k)
      acc += f[k] * std::polar(1.0, -(kmin + static_cast<long>(k)) * x[j]);
    c[j] = acc;
  }
}

void ref_type3(const std::vector<double>& x, const std::vector<cplx>& c,
               const std::vector<double>& s, std::vector<cplx>& f) {
  f.assign(s.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < s.size(); ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < x.size(); ++j) acc += c[j] * std::polar(1.0, s[k] * x[j]);
    f[k] = acc;
  }
}

}  // namespace

void nufft_type1(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& c, std::size_t nmodes, std::vector<cplx>& f) {
  require(x.size() == c.size(), ErrorCode::LengthMismatch,
          "points and strengths must have equal length");
  if (backend == NufftBackend::Reference)
    ref_type1(x, c, nmodes, f);
  else
    detail::fast_type1(eps, x, c, nmodes, f);
}

void nufft_type2(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& f, std::vector<cplx>& c) {
  if (backend == NufftBackend::Reference)
    ref_type2(x, f, c);
  else
    detail::fast_type2(eps, x, f, c);
}

void nufft_type3(NufftBackend backend, double eps, const std::vector<double>& x,
                 const std::vector<cplx>& c, const std::vector<double>& s,
                 std::vector<cplx>& f) {
  require(x.size() == c.size(), ErrorCode::LengthMismatch,
          "points and strengths must have equal length");
  if (backend == NufftBackend::Reference)
    ref_type3(x, c, s, f);
  else
    detail::fast_type3(eps, x, c, s, f);
}

}  // namespace periwave
