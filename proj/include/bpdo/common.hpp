#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bpdo {

using cplx = std::complex<double>;

// Point in R^n with n <= 2; the unused slot stays zero so arithmetic over
// both slots is always safe.
using Vec = std::array<double, 2>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

inline Vec vec1(double x) { return {x, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y}; }

inline Vec vadd(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec vsub(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec vscale(double c, const Vec& a) { return {c * a[0], c * a[1]}; }
inline double vdot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double vnorm2(const Vec& a) { return a[0] * a[0] + a[1] * a[1]; }
inline double vnorm(const Vec& a) { return std::sqrt(vnorm2(a)); }

// Thrown when an argument violates a documented precondition.
struct contract_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw contract_error(msg);
}

}  // namespace bpdo
