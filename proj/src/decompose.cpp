#include "bpdo/decompose.hpp"

#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "bpdo/smooth.hpp"

namespace bpdo {

namespace {

double joint_radius(int n, const Vec& xi, const Vec& eta) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += xi[a] * xi[a] + eta[a] * eta[a];
  return std::sqrt(s);
}

double slot_norm2(int n, const Vec& v) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += v[a] * v[a];
  return s;
}

}  // namespace

DyadicPartition dyadic_partition(const Grid& grid, int j_max) {
  require(j_max >= 0, "dyadic_partition: j_max must be nonnegative");
  const double nyquist = pi * grid.N / grid.L;
  require(std::pow(2.0, j_max + 1) <= nyquist * (1.0 + 1e-12),
          "dyadic_partition: 2^(j_max+1) exceeds the largest representable "
          "frequency radius");

  auto profile = [](double r) { return cutoff_one_zero(r, 1.0, 2.0); };

  DyadicPartition part;
  part.j_max = j_max;
  part.profile = profile;
  const int n = grid.n;
  for (int j = 0; j <= j_max; ++j) {
    SymbolEval eval;
    if (j == 0) {
      eval = [n, profile](const Vec&, const Vec& xi, const Vec& eta) -> cplx {
        return cplx(profile(joint_radius(n, xi, eta)), 0.0);
      };
      part.radii.push_back({0.0, 2.0});
    } else {
      const double lo = std::pow(2.0, j);      // outer cutoff scale
      const double hi = std::pow(2.0, j - 1);  // inner cutoff scale
      eval = [n, profile, lo, hi](const Vec&, const Vec& xi,
                                  const Vec& eta) -> cplx {
        const double r = joint_radius(n, xi, eta);
        return cplx(profile(r / lo) - profile(r / hi), 0.0);
      };
      part.radii.push_back({std::pow(2.0, j - 1), std::pow(2.0, j + 1)});
    }
    std::optional<SupportDesc> supp;
    if (j == 0) supp = SupportDesc{SupportKind::ball, 2.0};
    part.pieces.push_back(make_symbol(n, std::move(eval),
                                      SymbolClassParams{0.0, 1.0, 0.0}, true,
                                      supp,
                                      "dyadic_piece_" + std::to_string(j)));
  }
  return part;
}

LeibnizPair leibniz_split(const Symbol& sigma, double m, double s) {
  require(s > 0.0, "leibniz_split: s must be positive");
  const int n = sigma.n;
  const double w = m + s;
  const SymbolEval base = sigma.eval;

  auto eval1 = [n, w, base](const Vec& x, const Vec& xi,
                            const Vec& eta) -> cplx {
    const double wxi = 1.0 + slot_norm2(n, xi);
    const double weta = 1.0 + slot_norm2(n, eta);
    const double cut = leibniz_phi(weta / wxi);
    if (cut == 0.0) return cplx(0.0, 0.0);
    return base(x, xi, eta) * (cut * std::pow(wxi, -0.5 * w));
  };
  auto eval2 = [n, w, base](const Vec& x, const Vec& xi,
                            const Vec& eta) -> cplx {
    const double wxi = 1.0 + slot_norm2(n, xi);
    const double weta = 1.0 + slot_norm2(n, eta);
    const double cut = leibniz_phi(wxi / weta);
    if (cut == 0.0) return cplx(0.0, 0.0);
    return base(x, xi, eta) * (cut * std::pow(weta, -0.5 * w));
  };

  std::optional<SymbolClassParams> cls;
  if (sigma.declared_class)
    cls = SymbolClassParams{-s, sigma.declared_class->rho,
                            sigma.declared_class->delta};

  LeibnizPair out;
  out.weight_order = w;
  out.sigma1 = make_symbol(n, std::move(eval1), cls, sigma.x_independent,
                           sigma.support, sigma.name + "_weighted_low_eta");
  out.sigma2 = make_symbol(n, std::move(eval2), cls, sigma.x_independent,
                           sigma.support, sigma.name + "_weighted_low_xi");
  return out;
}

LowHighPair low_high_split(const Symbol& sigma, double d) {
  require(d > 0.0, "low_high_split: d must be positive");
  const int n = sigma.n;
  const double cut = 1.0 / d;
  const double eps = cut / (8.0 * n);
  const SymbolEval base = sigma.eval;

  // Ramp in the componentwise-regularized l1 norm
  //   s = sum_a sqrt(xi_a^2+eps^2) + sqrt(eta_a^2+eps^2),
  // which brackets |xi|+|eta| within [l1, l1 + 2n*eps]; with eps = cut/(8n)
  // the ramp is exactly 0 for |xi|+|eta| <= cut and exactly 1 for
  // |xi|+|eta| >= 2*cut, in both dimensions.
  auto ramp = [n, cut, eps](const Vec& xi, const Vec& eta) -> double {
    double s = 0.0;
    for (int a = 0; a < n; ++a)
      s += std::sqrt(xi[a] * xi[a] + eps * eps) +
           std::sqrt(eta[a] * eta[a] + eps * eps);
    return transition01((s - 1.3 * cut) / (0.4 * cut));
  };
  // Whichever factor is >= 1/2 is applied as a product; the other piece is
  // the remainder, which is then exact (Sterbenz) and makes the sum of the
  // two pieces reproduce sigma without rounding error.
  auto eval_low = [base, ramp](const Vec& x, const Vec& xi,
                               const Vec& eta) -> cplx {
    const double t = ramp(xi, eta);
    const cplx sv = base(x, xi, eta);
    if (t >= 0.5) return sv - sv * t;
    return sv * (1.0 - t);
  };
  auto eval_high = [base, ramp](const Vec& x, const Vec& xi,
                                const Vec& eta) -> cplx {
    const double t = ramp(xi, eta);
    const cplx sv = base(x, xi, eta);
    if (t >= 0.5) return sv * t;
    return sv - sv * (1.0 - t);
  };

  auto bounded = [](const std::optional<SupportDesc>& sd) {
    return sd && sd->kind != SupportKind::highpass;
  };
  std::optional<SupportDesc> supp1, supp2;
  if (bounded(sigma.support)) {
    supp1 = sigma.support;
    supp2 = sigma.support;
  } else {
    supp1 = SupportDesc{SupportKind::lowpass, 2.0 * cut};
    const double hp =
        sigma.support ? std::max(sigma.support->radius, cut) : cut;
    supp2 = SupportDesc{SupportKind::highpass, hp};
  }

  LowHighPair out;
  out.d = d;
  out.sigma1 = make_symbol(n, std::move(eval_low), sigma.declared_class,
                           sigma.x_independent, supp1, sigma.name + "_low");
  out.sigma2 = make_symbol(n, std::move(eval_high), sigma.declared_class,
                           sigma.x_independent, supp2, sigma.name + "_high");
  return out;
}

BandLimitedBump make_bump(const Grid& grid, double d, double rho,
                          bool flat_top) {
  require(d > 0.0, "make_bump: d must be positive");
  const double band = std::pow(d, -rho) / 8.0;
  const double step = 2.0 * pi / grid.L;
  require(band >= step * (1.0 - 1e-12),
          "make_bump: spectral budget d^(-rho)/8 is below one lattice "
          "frequency step");
  const double rq = band / 2.0;
  const int n = grid.n;

  // Window moments on the lattice (for the optional second-moment
  // cancellation that flattens the bump at the origin).
  const std::size_t sz = grid.size();
  std::vector<double> w0(sz);
  double s2 = 0.0, s4 = 0.0;
  for (std::size_t a = 0; a < sz; ++a) {
    const Vec xi = grid.frequency(a);
    const double r = std::sqrt(slot_norm2(n, xi));
    w0[a] = bump_profile(r / rq);
    s2 += w0[a] * xi[0] * xi[0];
    s4 += w0[a] * (r * r) * xi[0] * xi[0];
  }
  const double lambda = (flat_top && s4 > 0.0) ? s2 / s4 : 0.0;

  ComplexField qhat = make_field(grid, Rep::spectral);
  double total = 0.0;
  for (std::size_t a = 0; a < sz; ++a) {
    const Vec xi = grid.frequency(a);
    const double w = w0[a] * (1.0 - lambda * slot_norm2(n, xi));
    qhat.v[a] = cplx(w, 0.0);
    total += w;
  }
  require(total > 0.0, "make_bump: degenerate spectral window");
  const double scale = std::pow(grid.L, n) / total;  // q(0) = 1
  for (auto& c : qhat.v) c *= scale;

  const ComplexField q = as_spatial(qhat);
  BandLimitedBump bump;
  bump.field = make_field(grid, Rep::spatial);
  for (std::size_t j = 0; j < sz; ++j) {
    const double re = q.v[j].real();
    bump.field.v[j] = cplx(re * re, 0.0);
  }
  bump.d = d;
  bump.rho = rho;
  bump.band_radius = band;
  bump.flat_top = flat_top;
  bump.l2_norm = lp_norm(bump.field, 2.0);
  bump.l2_scale_ratio = bump.l2_norm / std::pow(d, 0.5 * n * rho);
  return bump;
}

ComplexField commutator_R(const Symbol& sigma, const BandLimitedBump& phi,
                          const ComplexField& f, const ComplexField& g) {
  const Grid& gr = phi.field.grid;
  require(f.grid == gr && g.grid == gr,
          "commutator_R: fields must share the bump's grid");

  auto apply = [&sigma](const ComplexField& a,
                        const ComplexField& b) -> ComplexField {
    if (sigma.x_independent) return apply_fft_diag(sigma, a, b).field;
    return apply_direct(sigma, a, b).field;
  };

  const ComplexField fs = as_spatial(f);
  const ComplexField gs = as_spatial(g);
  const ComplexField phi2 = pointwise_product(phi.field, phi.field);
  const ComplexField t_plain = as_spatial(apply(fs, gs));
  const ComplexField t_local = as_spatial(
      apply(pointwise_product(phi.field, fs), pointwise_product(phi.field, gs)));
  return pointwise_product(phi2, t_plain) - t_local;
}

}  // namespace bpdo
