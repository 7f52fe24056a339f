#pragma once

#include <array>
#include <functional>
#include <vector>

#include "bpdo/grid.hpp"
#include "bpdo/operator.hpp"
#include "bpdo/symbol.hpp"

namespace bpdo {

// Frequency-region splits: dyadic shell partition, the derivative-
// distributing split with Bessel weights, the low/high cut at a scale, the
// nonnegative band-limited bump, and the localization commutator.

// Radial partition of unity in the joint frequency |(xi,eta)|.  Piece 0 is a
// smooth bump equal to 1 inside joint radius 1 and supported in radius <= 2;
// piece j >= 1 is supported in the shell [2^(j-1), 2^(j+1)].  The pieces
// telescope, so their sum is exactly 1 wherever the outermost cutoff is 1
// (joint radius <= 2^j_max).
struct DyadicPartition {
  int j_max = 0;
  std::vector<Symbol> pieces;                // x-independent, index 0..j_max
  std::function<double(double)> profile;     // 1 for r <= 1, 0 for r >= 2
  std::vector<std::array<double, 2>> radii;  // joint-radius support bounds
};

// Requires 2^(j_max+1) <= pi*N/L (largest representable frequency radius).
DyadicPartition dyadic_partition(const Grid& grid, int j_max);

// Split sigma so that one Bessel weight of order m+s can be moved onto each
// argument in turn:
//   sigma1 = sigma * phi((1+|eta|^2)/(1+|xi|^2))  * (1+|xi|^2)^(-(m+s)/2)
//   sigma2 = sigma * phi((1+|xi|^2)/(1+|eta|^2))  * (1+|eta|^2)^(-(m+s)/2)
// with the ratio cutoff phi satisfying phi(r) + phi(1/r) = 1 exactly, so
//   T_sigma(f,g) = T_sigma1(J^(m+s) f, g) + T_sigma2(f, J^(m+s) g)
// holds identically on the lattice.  `m` is the order of sigma and s > 0 the
// extra smoothness spent; both pieces drop to declared order -s.
struct LeibnizPair {
  Symbol sigma1;
  Symbol sigma2;
  double weight_order = 0.0;  // m + s, the Bessel order to apply
};
LeibnizPair leibniz_split(const Symbol& sigma, double m, double s);

// Low/high split at cut radius 1/d: sigma = sigma1 + sigma2 exactly (the
// smaller factor is recovered by subtraction, so the identity has no rounding
// error), sigma2 vanishes identically for |xi|+|eta| <= 1/d and sigma1 for
// |xi|+|eta| >= 2/d.  The transition profile is a smooth ramp in the
// componentwise-regularized l1 norm sum_a sqrt(xi_a^2+eps^2) +
// sqrt(eta_a^2+eps^2) with eps = 1/(8nd), so the family is self-similar
// across d and the pieces keep the class bounds of sigma with constants
// independent of d <= 1.
struct LowHighPair {
  Symbol sigma1;  // low piece
  Symbol sigma2;  // high piece
  double d = 1.0;
};
LowHighPair low_high_split(const Symbol& sigma, double d);

// Nonnegative band-limited bump: the square of the inverse transform of an
// even real spectral window supported in |z| <= d^(-rho)/16, so the bump's
// own spectrum lives in |z| <= d^(-rho)/8 and the bump is >= 0 exactly.
// With flat_top the window's second moment is cancelled, flattening the bump
// to fourth order at the origin (within 1e-6 on a cube of diameter d at the
// scales used here).  Normalized to value 1 at x = 0.
struct BandLimitedBump {
  ComplexField field;           // spatial, real part carries the bump
  double d = 1.0;
  double rho = 0.0;
  double band_radius = 0.0;     // d^(-rho)/8, the smoothness budget
  double l2_norm = 0.0;
  double l2_scale_ratio = 0.0;  // l2_norm / d^(n*rho/2), reported constant
  bool flat_top = false;
};

// Requires band_radius >= one lattice frequency step (2*pi/L).
BandLimitedBump make_bump(const Grid& grid, double d, double rho,
                          bool flat_top = false);

// Localization commutator R(f,g) = phi^2 * T_sigma(f,g) - T_sigma(phi f,
// phi g).  All fields must share the bump's grid.
ComplexField commutator_R(const Symbol& sigma, const BandLimitedBump& phi,
                          const ComplexField& f, const ComplexField& g);

}  // namespace bpdo
