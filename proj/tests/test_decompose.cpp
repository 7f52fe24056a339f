#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bpdo/decompose.hpp"
#include "bpdo/grid.hpp"
#include "bpdo/operator.hpp"
#include "bpdo/smooth.hpp"
#include "bpdo/symbol.hpp"

using namespace bpdo;

namespace {

double sup_gap(const ComplexField& a, const ComplexField& b) {
  double w = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    w = std::max(w, std::abs(a.v[i] - b.v[i]));
  return w;
}

double sup_abs(const ComplexField& a) {
  double w = 0;
  for (const auto& c : a.v) w = std::max(w, std::abs(c));
  return w;
}

ComplexField random_bandlimited(const Grid& g, std::mt19937_64& rng, int kmax) {
  std::normal_distribution<double> nd;
  ComplexField f = make_field(g, Rep::spectral);
  for (std::size_t i = 0; i < g.size(); ++i) {
    bool in = true;
    for (int a = 0; a < g.n; ++a)
      if (std::abs(g.k_of_index(g.axis_index(i, a))) > kmax) in = false;
    if (in) f.v[i] = cplx(nd(rng), nd(rng));
  }
  return as_spatial(f);
}

}  // namespace

TEST_CASE("dyadic partition sums to one and respects shell supports") {
  std::mt19937_64 rng(123);
  Grid g{1, 128, 2.0 * pi};
  auto part = dyadic_partition(g, 5);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  double worst = 0;
  int covered = 0;
  while (covered < 20000) {
    Vec xi = g.frequency(static_cast<std::size_t>(pick(rng)));
    Vec eta = g.frequency(static_cast<std::size_t>(pick(rng)));
    if (std::sqrt(vnorm2(xi) + vnorm2(eta)) > 32.0) continue;
    ++covered;
    cplx s = 0;
    for (const auto& p : part.pieces) s += p({0, 0}, xi, eta);
    worst = std::max(worst, std::abs(s - 1.0));
  }
  CHECK(worst == 0.0);
  CHECK(std::abs(part.pieces[2]({0, 0}, {16.0, 0.0}, {0.0, 0.0})) == 0.0);
  CHECK(part.pieces[0]({0, 0}, {0, 0}, {0, 0}).real() ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dyadic pieces keep the class seminorm up to a fixed factor") {
  Grid g{1, 128, 2.0 * pi};
  auto part = dyadic_partition(g, 5);
  Symbol base = sym_bracket(1, -1.0);
  SymbolClassParams cls{-1.0, 1.0, 0.0};
  auto nb = hormander_norm(base, cls, 0, 2);
  CHECK(nb.value == doctest::Approx(131.479988).epsilon(1e-6));
  const double frozen[5] = {19.129087, 9.313387, 5.772496, 10.687614,
                            10.564786};
  for (int j = 1; j <= 5; ++j) {
    CAPTURE(j);
    Symbol sj = sym_multiply(base, part.pieces[static_cast<std::size_t>(j)]);
    auto nj = hormander_norm(sj, cls, 0, 2);
    const double ratio = nj.value / nb.value;
    CHECK(ratio == doctest::Approx(frozen[j - 1]).epsilon(1e-5));
    CHECK(ratio < 25.0);
  }
}

TEST_CASE("frequency-split pair reconstructs the operator exactly") {
  std::mt19937_64 rng(321);
  Grid g{1, 64, 16.0};
  CHECK(leibniz_phi(1.0) == 0.5);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    Symbol sig;
    double m;
    switch (t % 4) {
      case 0: m = -1.5 + t * 0.1; sig = sym_bracket(1, m); break;
      case 1: m = 0.0; sig = sym_one(1); break;
      case 2: m = -1.0; sig = sym_scatter_heat_halfwave(1); break;
      default: m = 0.0; sig = sym_gaussian_bump(1, {1.0, 0.0}, 3.0); break;
    }
    const double s = 0.25 + 0.5 * (t % 3);
    auto lp = leibniz_split(sig, m, s);
    ComplexField f = random_bandlimited(g, rng, 20);
    ComplexField h = random_bandlimited(g, rng, 20);
    ComplexField lhs = apply_fft_diag(sig, f, h).field;
    ComplexField r1 =
        apply_fft_diag(lp.sigma1, bessel_potential(f, lp.weight_order), h)
            .field;
    ComplexField r2 =
        apply_fft_diag(lp.sigma2, f, bessel_potential(h, lp.weight_order))
            .field;
    worst = std::max(worst, sup_gap(lhs, r1 + r2));
  }
  CHECK(worst < 1e-13);

  // First piece vanishes once |eta|^2 >= 2 (1+|xi|^2).
  auto lp = leibniz_split(sym_bracket(1, 0.5), 0.5, 1.0);
  double w = 0;
  for (double xi : {0.0, 1.0, 3.0, -2.0}) {
    const double bound = std::sqrt(2.0 * (1.0 + xi * xi));
    for (double extra : {0.0, 0.5, 4.0})
      w = std::max(w, std::abs(lp.sigma1({0, 0}, {xi, 0}, {bound + extra, 0})));
  }
  CHECK(w == 0.0);
}

TEST_CASE("low/high split: exact sum and certified supports") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(-40.0, 40.0);
  for (int n : {1, 2}) {
    Symbol sig = sym_bracket(n, -0.75);
    for (double d : {0.25, 1.0, 3.0}) {
      CAPTURE(n);
      CAPTURE(d);
      auto lh = low_high_split(sig, d);
      double worst = 0;
      bool support_ok = true;
      for (int t = 0; t < 4000; ++t) {
        Vec xi{ur(rng), n == 2 ? ur(rng) : 0.0};
        Vec eta{ur(rng), n == 2 ? ur(rng) : 0.0};
        cplx sv = sig({0, 0}, xi, eta);
        cplx gap =
            lh.sigma1({0, 0}, xi, eta) + lh.sigma2({0, 0}, xi, eta) - sv;
        worst = std::max(worst, std::abs(gap));
        const double l1 = std::abs(xi[0]) + std::abs(xi[1]) +
                          std::abs(eta[0]) + std::abs(eta[1]);
        if (l1 <= 1.0 / d && std::abs(lh.sigma2({0, 0}, xi, eta)) != 0.0)
          support_ok = false;
        if (l1 >= 2.0 / d && std::abs(lh.sigma1({0, 0}, xi, eta)) != 0.0)
          support_ok = false;
      }
      CHECK(worst == 0.0);
      CHECK(support_ok);
      CHECK(std::abs(lh.sigma2({0, 0}, {0, 0}, {0, 0})) == 0.0);
    }
  }
}

TEST_CASE("low/high pieces: class norms and high-piece slice scaling") {
  Symbol sig = sym_bracket(1, -0.75);
  SymbolClassParams cls{-0.75, 0.25, 0.0};
  auto nb = hormander_norm(sig, cls, 1, 4);
  CHECK(nb.value == doctest::Approx(977.143573).epsilon(1e-6));

  // At d=1 the cut's transition sharpness dominates both pieces; as the cut
  // moves outward the low piece settles to the base norm and the high
  // piece's contribution decays.
  std::vector<double> highs;
  for (double d : {1.0, 0.5, 0.25}) {
    auto lh = low_high_split(sig, d);
    auto n1 = hormander_norm(lh.sigma1, cls, 1, 4);
    auto n2 = hormander_norm(lh.sigma2, cls, 1, 4);
    CHECK(n1.value / nb.value < 14000.0);
    highs.push_back(n2.value / nb.value);
  }
  CHECK(highs[0] > highs[1]);
  CHECK(highs[1] > highs[2]);

  std::vector<double> ds{1.0, 0.5, 0.25, 0.125};
  std::vector<double> slices;
  for (double d : ds) {
    auto lh = low_high_split(sig, d);
    auto rep = c_sigma_constant(lh.sigma2, 1);
    CHECK(rep.summable);
    slices.push_back(rep.slice_norm);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double x = std::log(ds[i]), y = std::log(slices[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(ds.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  // exponent n/2 - rho n at n=1, rho=1/4
  CHECK(std::abs(slope - 0.25) < 0.1);
  CHECK(slope == doctest::Approx(0.2318).epsilon(1e-2));
}

TEST_CASE("band-limited bump: positivity, band support, L2 scaling") {
  Grid g{1, 512, 256.0};
  const double frozen_l2[3] = {6.956312, 6.958971, 7.015151};
  int i = 0;
  for (double d : {1.0, 0.5, 0.25}) {
    CAPTURE(d);
    auto b = make_bump(g, d, 0.25, false);
    double mn = 1e300;
    for (const auto& c : b.field.v) mn = std::min(mn, c.real());
    CHECK(mn >= 0.0);
    ComplexField fh = as_spectral(b.field);
    double beyond = 0, peak = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double a = std::abs(fh.v[j]);
      peak = std::max(peak, a);
      if (vnorm(g.frequency(j)) > b.band_radius) beyond = std::max(beyond, a);
    }
    CHECK(beyond / peak < 1e-15);
    CHECK(b.l2_scale_ratio == doctest::Approx(frozen_l2[i]).epsilon(1e-5));
    ++i;
  }

  for (double d : {1.0, 0.5}) {
    CAPTURE(d);
    auto b = make_bump(g, d, 0.25, true);
    double dev = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      Vec x = g.point(j);
      const double xc = x[0] > g.L / 2 ? x[0] - g.L : x[0];
      if (std::abs(xc) <= d / 2)
        dev = std::max(dev, std::abs(b.field.v[j].real() - 1.0));
    }
    CHECK(dev < 1e-8);
  }

  CHECK_THROWS_AS(make_bump(g, 1e9, 0.25, false), contract_error);
}

TEST_CASE("commutator remainder: vanishing cases and a stable generic ratio") {
  std::mt19937_64 rng(11);
  Grid g{1, 128, 64.0};
  auto triv = make_bump(g, 1e9, 0.0, false);
  ComplexField f = random_bandlimited(g, rng, 10);
  ComplexField h = random_bandlimited(g, rng, 10);
  CHECK(sup_abs(commutator_R(sym_bracket(1, -1.0), triv, f, h)) == 0.0);

  Symbol hi = low_high_split(sym_one(1), 0.125).sigma2;  // zero for l1 <= 8
  auto b = make_bump(g, 7.0, 0.0, false);
  ComplexField fl = random_bandlimited(g, rng, 20);
  ComplexField hl = random_bandlimited(g, rng, 20);
  CHECK(sup_abs(commutator_R(hi, b, fl, hl)) == 0.0);

  const double frozen[2] = {1.546127e-01, 1.546128e-01};
  const int Ns[2] = {128, 256};
  for (int t = 0; t < 2; ++t) {
    Grid gg{1, Ns[t], 64.0};
    auto bb = make_bump(gg, 1e-3, 0.5, false);
    ComplexField ff = make_field(gg, Rep::spatial, [](const Vec& x) {
      const double xc = x[0] > 32.0 ? x[0] - 64.0 : x[0];
      return cplx(std::exp(-0.5 * xc * xc), 0.0);
    });
    ComplexField hh = make_field(gg, Rep::spatial, [](const Vec& x) {
      const double xc = x[0] > 32.0 ? x[0] - 64.0 : x[0];
      return cplx(std::exp(-0.25 * (xc - 0.5) * (xc - 0.5)), 0.0);
    });
    ComplexField rr = commutator_R(sym_bracket(1, -1.0), bb, ff, hh);
    const double ratio = sup_abs(rr) / (sup_abs(ff) * sup_abs(hh));
    CHECK(ratio == doctest::Approx(frozen[t]).epsilon(1e-5));
  }
}
