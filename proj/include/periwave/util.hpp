#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace periwave {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846264338327950288;

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
};
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Vec2c {
  cplx x{0.0}, y{0.0};
  Vec2c operator+(const Vec2c& o) const { return {x + o.x, y + o.y}; }
  Vec2c& operator+=(const Vec2c& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  Vec2c operator-(const Vec2c& o) const { return {x - o.x, y - o.y}; }
  Vec2c operator*(cplx s) const { return {x * s, y * s}; }
};

// Dense 2x2 complex block; row-major entries.
struct Mat2c {
  cplx a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};
  Vec2c operator*(const Vec2c& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
  Mat2c operator*(cplx s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
  Mat2c operator+(const Mat2c& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
};

inline Vec2c operator*(cplx s, const Vec2c& v) { return {s * v.x, s * v.y}; }

// exp(-q) - 1 without cancellation for small |q|; q may have any sign pattern.
inline cplx cexpm1_neg(cplx q) {
  double a = q.real(), b = q.imag();
  // e^{-a-ib} - 1 = expm1(-a) cos b - 2 sin^2(b/2) - i e^{-a} sin b
  double s = std::sin(0.5 * b);
  return {std::expm1(-a) * std::cos(b) - 2.0 * s * s, -std::exp(-a) * std::sin(b)};
}

// Runs fn(i) for i in [0, n). Splits into contiguous chunks across nthreads.
// Each index is processed independently, so results do not depend on nthreads.
inline void parallel_for(std::size_t n, int nthreads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned hw = std::thread::hardware_concurrency();
  std::size_t t = nthreads > 0 ? static_cast<std::size_t>(nthreads) : (hw ? hw : 1);
  if (t <= 1 || n < 2 * t) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (n + t - 1) / t;
  for (std::size_t w = 0; w < t; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

// Small deterministic generator for the uniform draws used by tests and the
// CLI; stable across platforms, unlike <random> distribution wrappers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  // xorshift64* step mapped to [0, 1).
  double uniform() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    std::uint64_t r = state_ * 0x2545f4914f6cdd1dull;
    return static_cast<double>(r >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

 private:
  std::uint64_t state_;
};

}  // namespace periwave
