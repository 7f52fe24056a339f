#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bpdo/common.hpp"

namespace bpdo {

// Uniform discretization of the torus [0,L)^n, n in {1,2}, with N samples per
// axis.  Frequency lattice: xi_k = 2*pi*k/L for integer k in [-N/2, N/2).
// Spectral arrays are stored in DFT natural order: index i on an axis holds
// the integer frequency k = i for i < N/2 and k = i - N otherwise.
struct Grid {
  int n = 1;
  int N = 0;
  double L = 0.0;

  double h() const { return L / N; }
  std::size_t size() const {
    return n == 1 ? static_cast<std::size_t>(N)
                  : static_cast<std::size_t>(N) * static_cast<std::size_t>(N);
  }

  int k_of_index(int i) const { return i < N / 2 ? i : i - N; }
  int index_of_k(int k) const { return k >= 0 ? k : k + N; }
  double freq_of_index(int i) const { return 2.0 * pi * k_of_index(i) / L; }

  std::size_t flat(int i0, int i1 = 0) const {
    return n == 1 ? static_cast<std::size_t>(i0)
                  : static_cast<std::size_t>(i0) * N + i1;
  }
  int axis_index(std::size_t flat_idx, int axis) const {
    if (n == 1) return static_cast<int>(flat_idx);
    return axis == 0 ? static_cast<int>(flat_idx) / N
                     : static_cast<int>(flat_idx) % N;
  }

  Vec point(std::size_t flat_idx) const {
    Vec x{0.0, 0.0};
    for (int a = 0; a < n; ++a) x[a] = h() * axis_index(flat_idx, a);
    return x;
  }
  Vec frequency(std::size_t flat_idx) const {
    Vec xi{0.0, 0.0};
    for (int a = 0; a < n; ++a) xi[a] = freq_of_index(axis_index(flat_idx, a));
    return xi;
  }

  // Torus metric per axis and for points.
  double axis_dist(double a, double b) const {
    double d = std::abs(a - b);
    d = std::fmod(d, L);
    return d > 0.5 * L ? L - d : d;
  }
  double dist(const Vec& a, const Vec& b) const {
    double s = 0.0;
    for (int ax = 0; ax < n; ++ax) {
      double d = axis_dist(a[ax], b[ax]);
      s += d * d;
    }
    return std::sqrt(s);
  }

  bool operator==(const Grid& o) const {
    return n == o.n && N == o.N && L == o.L;
  }
};

Grid make_grid(int n, int N, double L = 16.0);

enum class Rep { spatial, spectral };

struct ComplexField {
  Grid grid;
  Rep rep = Rep::spatial;
  std::vector<cplx> v;
};

ComplexField make_field(const Grid& g, Rep rep = Rep::spatial);
ComplexField make_field(const Grid& g, Rep rep,
                        const std::function<cplx(const Vec&)>& f);

enum class Direction { forward, inverse };

// Forward: hat f(xi) = h^n sum_x f(x) e^{-i xi.x}  (Riemann sum of the
// continuum transform).  Inverse: f(x) = (1/L^n) sum_xi hat f(xi) e^{i xi.x}.
ComplexField spectral_transform(const ComplexField& f, Direction dir);

// Convenience: transform only when not already in the requested
// representation.
ComplexField as_spectral(const ComplexField& f);
ComplexField as_spatial(const ComplexField& f);

// inverse . diag(mult) . forward; `mult` is evaluated on the frequency
// lattice.  Accepts either representation and returns the same one.
ComplexField spectral_multiplier(const ComplexField& f,
                                 const std::function<cplx(const Vec&)>& mult);

double lp_norm(const ComplexField& f, double p);
double weak_lp_quasinorm(const ComplexField& f, double p);
double sobolev_norm(const ComplexField& f, double s, double p);
double bmo_norm(const ComplexField& f);

// f_lambda(x) = f(x/lambda) with lambda = 2^{-k}: the samples are unchanged
// and the grid period becomes lambda*L (sample j of the result sits at
// x' = lambda*j*h and carries f(j*h)).  No resampling is ever needed under
// this convention.
ComplexField dilate(const ComplexField& f, int k);

// Field arithmetic helpers (same grid, same representation).
ComplexField operator+(const ComplexField& a, const ComplexField& b);
ComplexField operator-(const ComplexField& a, const ComplexField& b);
ComplexField pointwise_product(const ComplexField& a, const ComplexField& b);
ComplexField scaled(const ComplexField& a, cplx c);

struct LebesgueExponents {
  double p1 = 2.0;
  double p2 = 2.0;
  std::optional<double> s;  // Sobolev index

  double inv_p() const { return inv(p1) + inv(p2); }
  double p() const { return inv_p() == 0.0 ? kInf : 1.0 / inv_p(); }
  bool weak_endpoint() const { return p1 == 1.0 || p2 == 1.0; }

  // Target Lebesgue exponent for the Sobolev-smoothing bound.  The source
  // statement prints the defining relation with p1 appearing twice; the
  // `as_printed` reading reproduces that, the default uses p1 and p2
  // symmetrically.
  enum class QReading { symmetric, as_printed };
  double target_q(int n, QReading r = QReading::symmetric) const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();
  static double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
};

LebesgueExponents make_exponents(double p1, double p2,
                                 std::optional<double> s = std::nullopt,
                                 int n = 1);

}  // namespace bpdo
