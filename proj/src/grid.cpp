#include "bpdo/grid.hpp"

#include <algorithm>
#include <limits>

#include "bpdo/fft.hpp"
#include "bpdo/parallel.hpp"

namespace bpdo {

Grid make_grid(int n, int N, double L) {
  require(n == 1 || n == 2, "make_grid: n must be 1 or 2");
  require(N % 2 == 0, "make_grid: N must be even");
  require(N >= 8 && N <= 4096, "make_grid: N out of range [8, 4096]");
  require(L > 0.0, "make_grid: L must be positive");
  return Grid{n, N, L};
}

ComplexField make_field(const Grid& g, Rep rep) {
  ComplexField f;
  f.grid = g;
  f.rep = rep;
  f.v.assign(g.size(), cplx{0.0, 0.0});
  return f;
}

ComplexField make_field(const Grid& g, Rep rep,
                        const std::function<cplx(const Vec&)>& fn) {
  ComplexField f = make_field(g, rep);
  for (std::size_t i = 0; i < f.v.size(); ++i)
    f.v[i] = rep == Rep::spatial ? fn(g.point(i)) : fn(g.frequency(i));
  return f;
}

ComplexField spectral_transform(const ComplexField& f, Direction dir) {
  if (dir == Direction::forward)
    require(f.rep == Rep::spatial,
            "spectral_transform: forward needs a spatial field");
  else
    require(f.rep == Rep::spectral,
            "spectral_transform: inverse needs a spectral field");
  ComplexField out = f;
  std::vector<int> dims(f.grid.n, f.grid.N);
  double ln = std::pow(f.grid.L, f.grid.n);
  if (dir == Direction::forward) {
    fft::dft(out.v, dims, -1);
    double hn = std::pow(f.grid.h(), f.grid.n);
    for (auto& z : out.v) z *= hn;
    out.rep = Rep::spectral;
  } else {
    fft::dft(out.v, dims, +1);
    for (auto& z : out.v) z /= ln;
    out.rep = Rep::spatial;
  }
  return out;
}

ComplexField as_spectral(const ComplexField& f) {
  return f.rep == Rep::spectral ? f : spectral_transform(f, Direction::forward);
}

ComplexField as_spatial(const ComplexField& f) {
  return f.rep == Rep::spatial ? f : spectral_transform(f, Direction::inverse);
}

ComplexField spectral_multiplier(const ComplexField& f,
                                 const std::function<cplx(const Vec&)>& mult) {
  ComplexField hat = as_spectral(f);
  for (std::size_t i = 0; i < hat.v.size(); ++i)
    hat.v[i] *= mult(hat.grid.frequency(i));
  return f.rep == Rep::spectral ? hat
                                : spectral_transform(hat, Direction::inverse);
}

double lp_norm(const ComplexField& f, double p) {
  require(f.rep == Rep::spatial, "lp_norm: spatial representation required");
  require(p > 0.0, "lp_norm: p must be positive");
  if (std::isinf(p))
    return par::max_term(f.v.size(),
                         [&](std::size_t i) { return std::abs(f.v[i]); });
  double hn = std::pow(f.grid.h(), f.grid.n);
  double s = par::block_sum<double>(
      f.v.size(), [&](std::size_t i) { return std::pow(std::abs(f.v[i]), p); });
  return std::pow(hn * s, 1.0 / p);
}

double weak_lp_quasinorm(const ComplexField& f, double p) {
  require(f.rep == Rep::spatial,
          "weak_lp_quasinorm: spatial representation required");
  require(p > 0.0, "weak_lp_quasinorm: p must be positive");
  if (std::isinf(p)) return lp_norm(f, p);
  std::vector<double> mags(f.v.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(f.v[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double hn = std::pow(f.grid.h(), f.grid.n);
  double best = 0.0;
  for (std::size_t k = 0; k < mags.size(); ++k) {
    double v = mags[k] * std::pow(hn * static_cast<double>(k + 1), 1.0 / p);
    if (v > best) best = v;
  }
  return best;
}

double sobolev_norm(const ComplexField& f, double s, double p) {
  ComplexField smoothed = spectral_multiplier(as_spatial(f), [s](const Vec& xi) {
    return cplx{std::pow(1.0 + vnorm2(xi), 0.5 * s), 0.0};
  });
  return lp_norm(smoothed, p);
}

namespace {

// Largest j with 2^j | N.
int dyadic_valuation(int N) {
  int v = 0;
  while (N % 2 == 0) {
    N /= 2;
    ++v;
  }
  return v;
}

// Mean oscillation sweep over the dyadic cube family for a real component.
// Cubes of side L/2^j (N/2^j lattice points per axis), all aligned positions
// plus the half-side-shifted mesh in every axis combination, wrapping
// periodically.
double bmo_real(const Grid& g, const std::vector<double>& comp) {
  int levels = 0;
  {
    int jmax_geom = 0;
    while ((1 << (jmax_geom + 1)) <= g.N) ++jmax_geom;  // floor(log2 N)
    levels = std::min(jmax_geom - 2, dyadic_valuation(g.N));
  }
  double best = 0.0;
  for (int j = 1; j <= levels; ++j) {
    int side = g.N >> j;          // lattice points per axis
    int cubes_per_axis = 1 << j;  // aligned cube count per axis
    int half = side / 2;
    int nshift = g.n == 1 ? 2 : 4;
    for (int shift_mask = 0; shift_mask < nshift; ++shift_mask) {
      int s0 = (shift_mask & 1) ? half : 0;
      int s1 = (shift_mask & 2) ? half : 0;
      std::size_t ncubes = g.n == 1
                               ? static_cast<std::size_t>(cubes_per_axis)
                               : static_cast<std::size_t>(cubes_per_axis) *
                                     static_cast<std::size_t>(cubes_per_axis);
      double lvl = par::max_term(ncubes, [&](std::size_t c) {
        int c0 = g.n == 1 ? static_cast<int>(c)
                          : static_cast<int>(c) / cubes_per_axis;
        int c1 = g.n == 1 ? 0 : static_cast<int>(c) % cubes_per_axis;
        int base0 = c0 * side + s0;
        int base1 = c1 * side + s1;
        double mean = 0.0;
        int count = g.n == 1 ? side : side * side;
        if (g.n == 1) {
          for (int a = 0; a < side; ++a) mean += comp[(base0 + a) % g.N];
        } else {
          for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b)
              mean += comp[g.flat((base0 + a) % g.N, (base1 + b) % g.N)];
        }
        mean /= count;
        double osc = 0.0;
        if (g.n == 1) {
          for (int a = 0; a < side; ++a)
            osc += std::abs(comp[(base0 + a) % g.N] - mean);
        } else {
          for (int a = 0; a < side; ++a)
            for (int b = 0; b < side; ++b)
              osc += std::abs(comp[g.flat((base0 + a) % g.N,
                                          (base1 + b) % g.N)] -
                              mean);
        }
        return osc / count;
      });
      if (lvl > best) best = lvl;
    }
  }
  return best;
}

}  // namespace

double bmo_norm(const ComplexField& f) {
  require(f.rep == Rep::spatial, "bmo_norm: spatial representation required");
  std::vector<double> re(f.v.size()), im(f.v.size());
  bool has_im = false;
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    re[i] = f.v[i].real();
    im[i] = f.v[i].imag();
    if (im[i] != 0.0) has_im = true;
  }
  double out = bmo_real(f.grid, re);
  if (has_im) out += bmo_real(f.grid, im);
  return out;
}

ComplexField dilate(const ComplexField& f, int k) {
  require(f.rep == Rep::spatial, "dilate: spatial representation required");
  require(k >= 0 && k <= 40, "dilate: k must be in [0, 40]");
  ComplexField out = f;
  out.grid.L = f.grid.L * std::pow(0.5, k);
  return out;
}

namespace {
void check_match(const ComplexField& a, const ComplexField& b) {
  require(a.grid == b.grid && a.rep == b.rep,
          "field arithmetic: grid or representation mismatch");
}
}  // namespace

ComplexField operator+(const ComplexField& a, const ComplexField& b) {
  check_match(a, b);
  ComplexField out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
  return out;
}

ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  check_match(a, b);
  ComplexField out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
  return out;
}

ComplexField pointwise_product(const ComplexField& a, const ComplexField& b) {
  check_match(a, b);
  ComplexField out = a;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] *= b.v[i];
  return out;
}

ComplexField scaled(const ComplexField& a, cplx c) {
  ComplexField out = a;
  for (auto& z : out.v) z *= c;
  return out;
}

double LebesgueExponents::target_q(int n, QReading r) const {
  require(s.has_value(), "target_q: Sobolev index not set");
  double inv_q = r == QReading::symmetric
                     ? inv(p1) + inv(p2) - *s / n
                     : inv(p1) + inv(p1) - *s / n;
  require(inv_q > 0.0, "target_q: exponent relation gives q <= 0");
  return 1.0 / inv_q;
}

LebesgueExponents make_exponents(double p1, double p2, std::optional<double> s,
                                 int n) {
  auto ok = [](double p) { return std::isinf(p) || p >= 1.0; };
  require(ok(p1) && ok(p2), "make_exponents: p1, p2 must lie in [1, inf]");
  LebesgueExponents e{p1, p2, s};
  if (s.has_value()) {
    require(*s >= 0.0, "make_exponents: s must be nonnegative");
    e.target_q(n);  // validates q > 0
  }
  return e;
}

}  // namespace bpdo
