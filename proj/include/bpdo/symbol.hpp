#pragma once

// Bilinear symbols sigma(x, xi, eta): evaluation, weighted-derivative seminorms
// measured by finite differences on dyadic frequency shells, order estimation,
// dilation/mollification, and a catalogue of built-in symbols.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bpdo/common.hpp"

namespace bpdo {

// Class parameters (m, rho, delta): a symbol of order m with smoothness
// exponents rho (gain per frequency derivative) and delta (loss per space
// derivative).  The weighted sup defining the seminorm is
//   |d^alpha_x d^beta_xi d^gamma_eta sigma| * (1+|xi|+|eta|)^(-m - delta|alpha| + rho(|beta|+|gamma|)).
struct SymbolClassParams {
  double m = 0.0;
  double rho = 1.0;
  double delta = 0.0;
};

// Optional support certificate carried by a symbol.  Radii refer to the joint
// frequency variable (xi, eta):
//   ball     : vanishes outside Euclidean joint radius  sqrt(|xi|^2+|eta|^2) <= radius
//   annulus  : vanishes outside { radius <= |xi|+|eta| <= 4*radius }
//   lowpass  : vanishes for |xi|+|eta| >= radius
//   highpass : vanishes for |xi|+|eta| <= radius
enum class SupportKind { ball, annulus, lowpass, highpass };

struct SupportDesc {
  SupportKind kind = SupportKind::ball;
  double radius = 0.0;
};

using SymbolEval = std::function<cplx(const Vec& x, const Vec& xi, const Vec& eta)>;

struct Symbol {
  int n = 1;  // spatial dimension; unused vector slots are ignored
  SymbolEval eval;
  std::optional<SymbolClassParams> declared_class;
  bool x_independent = false;
  std::optional<SupportDesc> support;
  std::string name = "custom";

  cplx operator()(const Vec& x, const Vec& xi, const Vec& eta) const { return eval(x, xi, eta); }
  // Convenience for x-independent symbols.
  cplx at(const Vec& xi, const Vec& eta) const { return eval(Vec{0.0, 0.0}, xi, eta); }
};

// Constructor with validation.  When x_independent is set, the evaluator is
// spot-checked on a handful of seeded triples; a mismatch throws.
Symbol make_symbol(int n, SymbolEval eval, std::optional<SymbolClassParams> cls, bool x_independent,
                   std::optional<SupportDesc> support = std::nullopt, std::string name = "custom");

// Multi-index over at most two coordinates (components beyond dimension n stay 0).
struct MultiIdx {
  std::array<int, 2> k{0, 0};
  int order() const { return k[0] + k[1]; }
};

// All multi-indices in dimension n with total order <= max_total, in a fixed
// deterministic order starting with (0,0).
std::vector<MultiIdx> multi_indices(int n, int max_total);

// Where the sampled sup over (x, xi, eta) is taken.  Frequencies are sampled
// on dyadic shells |xi|+|eta| = 2^j, j = shell_min..shell_max, with
// dirs_per_shell direction/split configurations that are identical across
// shells (so dilation by powers of two maps sample points onto sample
// points), plus axis-adjacent "edge" samples with one slot held at magnitude
// 1 or 2.  include_origin adds (xi,eta) = (0,0); disable it for symbols with
// a cone singularity at the origin (e.g. a |eta| kink).
struct SamplingSpec {
  int shell_min = 0;
  int shell_max = 9;
  int dirs_per_shell = 16;
  bool edge_samples = true;
  bool include_origin = true;
  int x_samples = 4;       // used only for x-dependent symbols
  double x_extent = 16.0;  // x ranges over [0, x_extent)
  std::uint64_t seed = 1234;
};

struct SamplePoint {
  Vec x{0.0, 0.0};
  Vec xi{0.0, 0.0};
  Vec eta{0.0, 0.0};
  int shell = -1;  // dyadic shell index, -1 for the origin sample
};

std::vector<SamplePoint> make_samples(int n, const SamplingSpec& spec, bool x_dependent);

// Central-difference derivative d^alpha_x d^beta_xi d^gamma_eta sigma at
// (x, xi, eta).  Steps are balanced against roundoff for the total derivative
// order and scaled by (1+|xi|+|eta|)^rho in the frequency slots; two step
// sizes {h, h/2} are combined by Richardson extrapolation.  step_sensitive
// (optional) is set when the two levels disagree by more than 5%; gap
// (optional) receives the absolute disagreement.
cplx fd_derivative(const Symbol& s, const Vec& x, const Vec& xi, const Vec& eta,
                   const MultiIdx& alpha, const MultiIdx& beta, const MultiIdx& gamma, double rho,
                   bool* step_sensitive = nullptr, double* gap = nullptr);

// Finite-difference base step balancing truncation against roundoff for a
// nested central difference of total order k (with Richardson refinement).
double fd_base_step(int k);

struct HormanderNormReport {
  int K = 0;
  int N = 0;
  double value = 0.0;
  // Arg-max location over the sample set.
  Vec worst_x{0.0, 0.0};
  Vec worst_xi{0.0, 0.0};
  Vec worst_eta{0.0, 0.0};
  MultiIdx worst_alpha, worst_beta, worst_gamma;
  double step_x = 0.0;     // finite-difference step at the worst point (space slots)
  double step_freq = 0.0;  // finite-difference step at the worst point (frequency slots)
  bool step_sensitive = false;  // some sampled derivative disagreed >5% between step levels
};

// Sampled seminorm: max over samples and |alpha| <= K, |beta|,|gamma| <= N of
// the weighted derivative.  Monotone nondecreasing in K and N by construction.
HormanderNormReport hormander_norm(const Symbol& s, const SymbolClassParams& params, int K, int N,
                                   const SamplingSpec& sampling = SamplingSpec{});

// Sampled sup of |d^beta_xi d^gamma_eta sigma| * (1+|xi|+|eta|)^(rho(|beta|+|gamma|))
// for an x-independent symbol.
double c_seminorm(const Symbol& s, const MultiIdx& beta, const MultiIdx& gamma, double rho,
                  const SamplingSpec& sampling = SamplingSpec{});

// sigma_lambda(xi, eta) = sigma(lambda xi, lambda eta); x-independent only.
Symbol dilate_symbol(const Symbol& s, double lambda);

// sigma_eps(xi, eta) = phi(eps xi, eps eta) sigma(xi, eta) with the default
// radial cutoff phi (1 on joint radius <= 1, 0 beyond 2), yielding compact
// support of Euclidean joint radius 2/eps.
Symbol mollify(const Symbol& s, double eps);
// Custom cutoff: profile must satisfy profile(0,0) = 1, 0 <= profile <= 1, and
// vanish outside joint radius support_radius (spot-checked; violation throws).
Symbol mollify(const Symbol& s, double eps, const std::function<double(const Vec&, const Vec&)>& profile,
               double support_radius);

// Catalogue ------------------------------------------------------------------
Symbol sym_one(int n);                                        // 1, order 0
Symbol sym_bracket(int n, double m);                          // (1+|xi|^2+|eta|^2)^(m/2), class (m,1,0)
Symbol sym_scatter_heat_halfwave(int n);                      // (1+|xi|^2+|eta|)^(-1), class (-1,1/2,0)
Symbol sym_scatter_laplace_heat_halfwave(int n);              // (1+|xi+eta|^2+|xi|^2+|eta|)^(-1), class (-2,1,0)
Symbol sym_modulated(int n, const Vec& a);                    // e^(-i a.(xi+eta)), class (0,1,0)
Symbol sym_gaussian_bump(int n, const Vec& center, double w); // exp(-(|xi-c|^2+|eta-c|^2)/w^2)
// base restricted to the annulus { R <= |xi|+|eta| <= 4R } by smooth per-slot
// radial bumps supported in |xi|, |eta| in [R/2, 2R].
Symbol sym_annulus(const Symbol& base, double R);

// Pointwise combinators (declared class: orders add, rho = min, delta = max).
Symbol sym_multiply(const Symbol& a, const Symbol& b);
Symbol sym_add(const Symbol& a, const Symbol& b);
Symbol sym_scale(const Symbol& a, cplx c);

// Builtin factory by catalogue name (for config-driven use).  Parameter slots:
// bracket -> p0 = m; modulated -> (p0,p1) = shift vector; gaussian_bump ->
// (p0,p1) = center, p2 = width; annulus -> p0 = m of a bracket base, p1 = R.
Symbol builtin(const std::string& name, int n, const std::vector<double>& params = {});

// Least order m (bisection to 0.01 over [-8, 8]) at which the sampled
// seminorm is stable (<5% growth) as the cumulative shell radius runs over
// 2^4 .. 2^9.  Non-convergence at a bracket end is reported via converged.
struct ClassifyResult {
  double lower = 0.0;
  double upper = 0.0;
  bool converged = false;
  double value() const { return 0.5 * (lower + upper); }
};

ClassifyResult classify_order(const Symbol& s, double rho, double delta, int K, int N,
                              const SamplingSpec& sampling = SamplingSpec{});

// Samples the joint frequency lattice with the given spacing up to
// max_radius (per-axis), returning false if |sigma| > tol anywhere outside
// the symbol's declared support.  Symbols without a support descriptor
// certify trivially.
bool certify_support(const Symbol& s, double max_radius, double spacing, double tol = 1e-12);

}  // namespace bpdo
