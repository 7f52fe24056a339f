#pragma once

// Bilinear operator application (direct quadrature oracle and FFT fast
// paths), kernel slices with the associated distance functional, Bessel
// potentials, the bilinear fractional integral, and the two L2-theory
// constants (the derivative-sup constant and the Cauchy-Schwarz slice bound).

#include <optional>
#include <string>
#include <vector>

#include "bpdo/grid.hpp"
#include "bpdo/symbol.hpp"

namespace bpdo {

// Result of one bilinear application.
struct ApplicationResult {
  ComplexField field;
  std::string method;              // "direct" | "fft_diag" | "separable"
  std::optional<double> residual;  // relative sup gap vs the direct oracle;
                                   // present iff a crosscheck ran
};

// Direct quadrature oracle over the full frequency lattice:
//   T(x) = L^{-2n} sum_{xi,eta} sigma(x,xi,eta) fhat(xi) ghat(eta)
//          e^{i x.(xi+eta)}.
// O(N^{3n}) products (plus one symbol evaluation per (x,xi,eta) when sigma
// depends on x), so the grid is guarded to N <= 256 (n=1) / N <= 32 (n=2).
// The parallel path splits over output points only and sums in a fixed
// order, so serial and parallel runs produce identical bits.
ApplicationResult apply_direct(const Symbol& sigma, const ComplexField& f,
                               const ComplexField& g, bool parallel = true);

// Fast path for x-independent symbols: tabulate tau(xi,eta) fhat(xi)
// ghat(eta) on the 2n-dimensional product lattice, inverse-transform, and
// restrict to the diagonal.  O(N^{2n} log N).  crosscheck=true additionally
// runs apply_direct (subject to its cost guard) and records the relative
// sup-norm gap.
ApplicationResult apply_fft_diag(const Symbol& tau, const ComplexField& f,
                                 const ComplexField& g,
                                 bool crosscheck = false);

// Separable expansion sigma(x,xi,eta) = sum_k a_k(x) b_k(xi,eta): each
// factor b_k is applied by the fast path and recombined with its spatial
// envelope a_k.  An empty term list yields the zero field.
struct SeparableTerm {
  ComplexField envelope;  // a_k, sampled on the spatial lattice
  Symbol factor;          // b_k, x-independent
};
ApplicationResult apply_separable(const std::vector<SeparableTerm>& terms,
                                  const ComplexField& f,
                                  const ComplexField& g);

// Frequency-taper policy for kernel slices.  Symbols that neither decay
// (declared order >= 0, or no declared class) nor have bounded frequency
// support produce lattice sums dominated by the truncation edge; `automatic`
// tapers exactly those, `force` always tapers, `off` never tapers and
// rejects the divergent case.
enum class Taper { automatic, force, off };

// Gaussian frequency-taper weight w(xi,eta) = exp(-(|xi|^2+|eta|^2)/Lambda^2)
// with Lambda = one quarter of the grid's Nyquist radius, packaged as an
// x-independent symbol so tapered computations can be reproduced exactly.
Symbol kernel_taper_symbol(const Grid& grid);

// Kernel values at a fixed base point x:
//   K(x,u,v) = L^{-2n} sum_{xi,eta} sigma(x,xi,eta) w(xi,eta)
//              e^{i(xi.u + eta.v)},
// sampled for offsets (u,v) on the product lattice (w is the taper weight or
// 1).  Entry pair_index(iu,iv) holds K at (u,v) = (point(iu), point(iv));
// S holds the matching distance functional |u| + |v| + |u - v| in the torus
// metric (the distances |x-y|, |x-z|, |y-z| for y = x-u, z = x-v).
struct KernelSlice {
  Grid grid;
  Vec x{0.0, 0.0};
  bool tapered = false;
  double taper_scale = 0.0;  // Lambda; 0 when untapered
  std::vector<cplx> values;  // size N^{2n} squared over pairs: M*M entries
  std::vector<double> S;     // same layout as values

  std::size_t pair_index(std::size_t iu, std::size_t iv) const {
    return iu * grid.size() + iv;
  }
};

KernelSlice kernel_slice(const Symbol& sigma, const Vec& x, const Grid& grid,
                         Taper taper = Taper::automatic);

// Reference route for the same quantity: a naive double sum per offset pair,
// with no transform involved.  O(N^{4n}); guarded to tiny grids.  Used to
// self-check kernel_slice.
KernelSlice kernel_slice_reference(const Symbol& sigma, const Vec& x,
                                   const Grid& grid,
                                   Taper taper = Taper::automatic);

// Discrete kernel representation of the application at the slice's base
// point (which must lie on the spatial lattice):
//   T(x) = h^{2n} sum_{y,z} K(x, x-y, x-z) f(y) g(z).
// For an untapered slice this reproduces apply_direct at x exactly (up to
// roundoff); for a tapered slice it reproduces the tapered symbol's
// application.
cplx kernel_reconstruct(const KernelSlice& ks, const ComplexField& f,
                        const ComplexField& g);

// Bessel potential J^s: spectral multiplication by (1+|xi|^2)^{s/2}.
// s = 0 returns the input unchanged.
ComplexField bessel_potential(const ComplexField& f, double s);

// Bilinear fractional integral, s in (0, 2n):
//   I_s(f,g)(x) = h^{2n} sum_{y,z} f(y) g(z) (|x-y| + |x-z|)^{s-2n}
// in the torus metric.  The (y,z) = (x,x) self-term takes the average of
// the integrand over the h/2-shifted corner points, which all sit at
// distance sqrt(n) h/2 from x, giving weight (sqrt(n) h)^{s-2n}.
// O(N^{3n}) lookups; same cost guard as apply_direct.
ComplexField fractional_integral(double s, const ComplexField& f,
                                 const ComplexField& g, bool parallel = true);

// Options for the derivative-sup constant.  Zero spacing/radius selects the
// per-dimension defaults (0.25 / 512 for n=1, 0.5 / 64 for n=2); negative
// order caps select the full ranges 2(2n+1) in frequency and floor(n/2)+1
// in space.
struct CSigmaOptions {
  double eta_spacing = 0.0;
  double eta_radius = 0.0;
  int max_freq_order = -1;
  int max_space_order = -1;
};

// Report of the derivative-sup constant sweep.  `value` is the sampled sup
// over base points y, frequencies xi, and derivative orders (alpha in the
// first frequency slot, beta in space, within the ranges above) of the
// lattice L2 norm in eta (weight spacing^{n/2}) of
//   d^alpha_xi d^beta_y sigma(y, xi - eta, eta),
// derivatives by central differences.  `slice_norm` is the underived
// component of the same sup (alpha = beta = 0); it isolates how much L2 mass
// the slice carries, which is the quantity whose scaling in a support
// truncation is predicted by the theory, whereas `value` also carries the
// fixed derivative constants of whatever cutoff profiles the symbol was
// built from.  Summability of the eta sum is judged per dyadic shell: a
// slice is flagged divergent when its outermost shell both carries more than
// 2% of the total and has stopped decaying relative to the shell before it
// (convergent slices anchored at large frequencies legitimately keep a few
// percent in the last shell, but their shell sums still shrink).  Slices far
// below the sup are excluded from the judgment as finite-difference noise.
// `worst_tail_fraction` records the largest outer-shell share seen among the
// judged slices, and `divergent_radius` the radius where growth was detected.
struct CSigmaReport {
  double value = 0.0;
  double slice_norm = 0.0;
  bool summable = true;
  double worst_tail_fraction = 0.0;
  double divergent_radius = 0.0;  // 0 when no divergence was detected
};

CSigmaReport c_sigma_constant(const Symbol& sigma, int n,
                              const CSigmaOptions& opts = {});

// sup over the frequency lattice of the discrete L2 norm (weight
// (2 pi / L)^{n/2}) of eta -> tau(zeta - eta, eta), with the difference
// wrapped on the lattice.  Under the module normalization the L2 x L2 -> L2
// operator norm of the application obeys
//   ||T_tau(f,g)||_2 <= (2 pi)^{-n/2} * cs_bound_rhs(tau) * ||f||_2 ||g||_2,
// an exact discrete Cauchy-Schwarz inequality.
double cs_bound_rhs(const Symbol& tau, const Grid& grid);

}  // namespace bpdo
