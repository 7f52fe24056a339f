#include "bpdo/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "bpdo/parallel.hpp"
#include "bpdo/rng.hpp"
#include "bpdo/smooth.hpp"

namespace bpdo {

namespace {

Vec pair_point(int n, Rng& rng, double mag, double angle_lo = 0.12) {
  if (n == 1) return vec1(rng.sign() * mag);
  double th = rng.uniform(angle_lo, 0.5 * pi - angle_lo);
  return vec2(rng.sign() * mag * std::cos(th), rng.sign() * mag * std::sin(th));
}

}  // namespace

Symbol make_symbol(int n, SymbolEval eval, std::optional<SymbolClassParams> cls, bool x_independent,
                   std::optional<SupportDesc> support, std::string name) {
  require(n == 1 || n == 2, "make_symbol: dimension must be 1 or 2");
  require(static_cast<bool>(eval), "make_symbol: evaluator must be callable");
  if (cls)
    require(cls->rho >= 0.0 && cls->rho <= 1.0 && cls->delta >= 0.0 && cls->delta <= 1.0,
            "make_symbol: rho and delta must lie in [0, 1]");
  if (support) require(support->radius >= 0.0, "make_symbol: support radius must be nonnegative");
  Symbol s;
  s.n = n;
  s.eval = std::move(eval);
  s.declared_class = cls;
  s.x_independent = x_independent;
  s.support = support;
  s.name = std::move(name);
  if (x_independent) {
    Rng rng(0xB5D0B5D0ull);
    for (int i = 0; i < 8; ++i) {
      double r = std::exp(rng.uniform(0.0, 5.0));
      double frac = rng.uniform(0.15, 0.85);
      Vec xi = pair_point(n, rng, frac * r);
      Vec eta = pair_point(n, rng, (1.0 - frac) * r);
      Vec x1 = n == 1 ? vec1(rng.uniform(0.0, 16.0)) : vec2(rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0));
      Vec x2 = n == 1 ? vec1(rng.uniform(0.0, 16.0)) : vec2(rng.uniform(0.0, 16.0), rng.uniform(0.0, 16.0));
      cplx v0 = s.eval(Vec{0.0, 0.0}, xi, eta);
      cplx v1 = s.eval(x1, xi, eta);
      cplx v2 = s.eval(x2, xi, eta);
      // Samples that overflow the double range make the difference test
      // meaningless (inf - inf); they carry no evidence of x-dependence.
      if (!std::isfinite(std::abs(v0))) continue;
      double scale = std::abs(v0) + 1.0;
      require(std::abs(v1 - v0) <= 1e-10 * scale && std::abs(v2 - v0) <= 1e-10 * scale,
              "make_symbol: evaluator marked x-independent but depends on x");
    }
  }
  return s;
}

std::vector<MultiIdx> multi_indices(int n, int max_total) {
  require(n == 1 || n == 2, "multi_indices: dimension must be 1 or 2");
  require(max_total >= 0, "multi_indices: order must be nonnegative");
  std::vector<MultiIdx> out;
  if (n == 1) {
    for (int k = 0; k <= max_total; ++k) out.push_back(MultiIdx{{k, 0}});
  } else {
    for (int t = 0; t <= max_total; ++t)
      for (int k0 = t; k0 >= 0; --k0) out.push_back(MultiIdx{{k0, t - k0}});
  }
  return out;
}

std::vector<SamplePoint> make_samples(int n, const SamplingSpec& spec, bool x_dependent) {
  require(n == 1 || n == 2, "make_samples: dimension must be 1 or 2");
  require(spec.shell_min >= 0 && spec.shell_max >= spec.shell_min && spec.shell_max <= 24,
          "make_samples: shell range must satisfy 0 <= shell_min <= shell_max <= 24");
  require(spec.dirs_per_shell >= 1, "make_samples: need at least one direction per shell");

  std::vector<Vec> xs;
  if (x_dependent) {
    int cnt = std::max(1, spec.x_samples);
    for (int i = 0; i < cnt; ++i) {
      double t0 = std::fmod(0.37 + 0.618033988749895 * i, 1.0);
      double t1 = std::fmod(0.71 + 0.381966011250105 * i, 1.0);
      xs.push_back(n == 1 ? vec1(spec.x_extent * t0) : vec2(spec.x_extent * t0, spec.x_extent * t1));
    }
  } else {
    xs.push_back(Vec{0.0, 0.0});
  }

  // Frequency samples.  Direction/split configurations are drawn once per
  // direction index and reused for every shell, so scaling a sample by a
  // power of two lands exactly on the corresponding sample of another shell.
  std::vector<SamplePoint> freq;
  for (int k = 0; k < spec.dirs_per_shell; ++k) {
    Rng rng = Rng::for_trial(spec.seed, static_cast<std::uint64_t>(k));
    double frac = rng.uniform(0.15, 0.85);
    double ax = rng.uniform(0.12, 0.5 * pi - 0.12);
    double ae = rng.uniform(0.12, 0.5 * pi - 0.12);
    double sg[4] = {rng.sign(), rng.sign(), rng.sign(), rng.sign()};
    for (int j = spec.shell_min; j <= spec.shell_max; ++j) {
      double r = std::ldexp(1.0, j);
      SamplePoint p;
      p.shell = j;
      if (n == 1) {
        p.xi = vec1(sg[0] * frac * r);
        p.eta = vec1(sg[1] * (1.0 - frac) * r);
      } else {
        p.xi = vec2(sg[0] * frac * r * std::cos(ax), sg[1] * frac * r * std::sin(ax));
        p.eta = vec2(sg[2] * (1.0 - frac) * r * std::cos(ae), sg[3] * (1.0 - frac) * r * std::sin(ae));
      }
      freq.push_back(p);
    }
  }

  // Axis-adjacent samples: one slot held at magnitude c in {1, 2} while the
  // other carries the rest of the shell.  These witness derivative growth
  // that balanced-cone samples cannot see (a slot frozen at O(1) while the
  // total radius grows).
  if (spec.edge_samples) {
    const Vec u = n == 1 ? vec1(1.0) : vec2(std::cos(0.9), std::sin(0.9));
    const Vec v = n == 1 ? vec1(1.0) : vec2(std::cos(0.45), std::sin(0.45));
    for (int j = spec.shell_min; j <= spec.shell_max; ++j) {
      double r = std::ldexp(1.0, j);
      for (double c : {1.0, 2.0}) {
        if (r <= 2.0 * c) continue;
        for (double s1 : {1.0, -1.0})
          for (double s2 : {1.0, -1.0}) {
            SamplePoint p;
            p.shell = j;
            p.xi = vscale(s1 * c, u);
            p.eta = vscale(s2 * (r - c), v);
            freq.push_back(p);
            std::swap(p.xi, p.eta);
            freq.push_back(p);
          }
      }
    }
  }

  if (spec.include_origin) {
    SamplePoint p;
    p.shell = -1;
    freq.push_back(p);
  }

  std::vector<SamplePoint> out;
  out.reserve(xs.size() * freq.size());
  for (const Vec& x : xs)
    for (SamplePoint p : freq) {
      p.x = x;
      out.push_back(p);
    }
  return out;
}

double fd_base_step(int k) {
  // Noise ~ eps/h^k vs truncation ~ h^4 after Richardson: balance at
  // h = eps^(1/(k+4)), floored at the smooth-scale default 1e-3.
  return std::max(1.0e-3, std::pow(2.2e-16, 1.0 / (k + 4)));
}

namespace {

struct EvalPoint {
  Vec x, xi, eta;
};

double& coord(EvalPoint& p, int slot) {
  switch (slot) {
    case 0: return p.x[0];
    case 1: return p.x[1];
    case 2: return p.xi[0];
    case 3: return p.xi[1];
    case 4: return p.eta[0];
    default: return p.eta[1];
  }
}

cplx nested_central(const Symbol& s, const EvalPoint& p, std::array<int, 6> ord,
                    const std::array<double, 6>& step) {
  for (int slot = 0; slot < 6; ++slot) {
    if (ord[slot] > 0) {
      ord[slot] -= 1;
      EvalPoint pp = p, pm = p;
      coord(pp, slot) += step[slot];
      coord(pm, slot) -= step[slot];
      return (nested_central(s, pp, ord, step) - nested_central(s, pm, ord, step)) / (2.0 * step[slot]);
    }
  }
  return s.eval(p.x, p.xi, p.eta);
}

}  // namespace

cplx fd_derivative(const Symbol& s, const Vec& x, const Vec& xi, const Vec& eta,
                   const MultiIdx& alpha, const MultiIdx& beta, const MultiIdx& gamma, double rho,
                   bool* step_sensitive, double* gap) {
  int ktot = alpha.order() + beta.order() + gamma.order();
  if (ktot == 0) {
    cplx v = s.eval(x, xi, eta);
    require(std::isfinite(v.real()) && std::isfinite(v.imag()),
            "fd_derivative: evaluator returned a non-finite value");
    if (step_sensitive) *step_sensitive = false;
    if (gap) *gap = 0.0;
    return v;
  }
  double base = fd_base_step(ktot);
  double fs = std::pow(1.0 + vnorm(xi) + vnorm(eta), rho);
  std::array<double, 6> step{base, base, base * fs, base * fs, base * fs, base * fs};
  std::array<int, 6> ord{alpha.k[0], alpha.k[1], beta.k[0], beta.k[1], gamma.k[0], gamma.k[1]};
  EvalPoint p{x, xi, eta};
  cplx d1 = nested_central(s, p, ord, step);
  std::array<double, 6> half;
  for (int i = 0; i < 6; ++i) half[i] = 0.5 * step[i];
  cplx d2 = nested_central(s, p, ord, half);
  cplx refined = (4.0 * d2 - d1) / 3.0;
  require(std::isfinite(refined.real()) && std::isfinite(refined.imag()),
          "fd_derivative: evaluator returned a non-finite value");
  double dis = std::abs(d2 - d1);
  if (step_sensitive) *step_sensitive = dis > 0.05 * std::max(std::abs(refined), 1e-9) && dis > 1e-9;
  if (gap) *gap = dis;
  return refined;
}

namespace {

// Per-sample result of a weighted-derivative sweep.  q0 carries every weight
// factor except (1+|xi|+|eta|)^(-m), which callers apply via lg = log(lead);
// the arg-max triple and the worst weighted step disagreement come along.
struct SweepEntry {
  double q0 = 0.0;
  double gapw = 0.0;
  int a = 0, b = 0, g = 0;
  double lg = 0.0;
  int shell = -1;
};

std::vector<SweepEntry> derivative_sweep(const Symbol& s, double rho, double delta, int K, int N,
                                         const std::vector<SamplePoint>& samples) {
  const auto alphas = s.x_independent ? std::vector<MultiIdx>{MultiIdx{}} : multi_indices(s.n, K);
  const auto betas = multi_indices(s.n, N);
  const auto gammas = multi_indices(s.n, N);
  std::vector<SweepEntry> out(samples.size());
  par::for_each(samples.size(), [&](std::size_t i) {
    const SamplePoint& pt = samples[i];
    double lead = 1.0 + vnorm(pt.xi) + vnorm(pt.eta);
    SweepEntry e;
    e.lg = std::log(lead);
    e.shell = pt.shell;
    bool first = true;
    for (std::size_t ia = 0; ia < alphas.size(); ++ia)
      for (std::size_t ib = 0; ib < betas.size(); ++ib)
        for (std::size_t ig = 0; ig < gammas.size(); ++ig) {
          double dgap = 0.0;
          cplx d = fd_derivative(s, pt.x, pt.xi, pt.eta, alphas[ia], betas[ib], gammas[ig], rho,
                                 nullptr, &dgap);
          double w = std::pow(lead, -delta * alphas[ia].order() +
                                        rho * (betas[ib].order() + gammas[ig].order()));
          double q = std::abs(d) * w;
          if (first || q > e.q0) {
            e.q0 = q;
            e.a = static_cast<int>(ia);
            e.b = static_cast<int>(ib);
            e.g = static_cast<int>(ig);
            first = false;
          }
          e.gapw = std::max(e.gapw, dgap * w);
        }
    out[i] = e;
  });
  return out;
}

}  // namespace

HormanderNormReport hormander_norm(const Symbol& s, const SymbolClassParams& params, int K, int N,
                                   const SamplingSpec& sampling) {
  require(K >= 0 && K <= 4 && N >= 0 && N <= 4, "hormander_norm: K and N must lie in [0, 4]");
  require(params.rho >= 0.0 && params.rho <= 1.0 && params.delta >= 0.0 && params.delta <= 1.0,
          "hormander_norm: rho and delta must lie in [0, 1]");
  const auto samples = make_samples(s.n, sampling, !s.x_independent);
  const auto entries = derivative_sweep(s, params.rho, params.delta, K, N, samples);

  double best = 0.0;
  std::size_t wi = entries.size();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    double q = entries[i].q0 * std::exp(-params.m * entries[i].lg);
    if (wi == entries.size() || q > best) {
      best = q;
      wi = i;
    }
  }

  HormanderNormReport rep;
  rep.K = K;
  rep.N = N;
  rep.value = best;
  if (wi < entries.size()) {
    const auto alphas = s.x_independent ? std::vector<MultiIdx>{MultiIdx{}} : multi_indices(s.n, K);
    const auto betas = multi_indices(s.n, N);
    const auto gammas = multi_indices(s.n, N);
    const SamplePoint& pt = samples[wi];
    rep.worst_x = pt.x;
    rep.worst_xi = pt.xi;
    rep.worst_eta = pt.eta;
    rep.worst_alpha = alphas[static_cast<std::size_t>(entries[wi].a)];
    rep.worst_beta = betas[static_cast<std::size_t>(entries[wi].b)];
    rep.worst_gamma = gammas[static_cast<std::size_t>(entries[wi].g)];
    int ktot = rep.worst_alpha.order() + rep.worst_beta.order() + rep.worst_gamma.order();
    rep.step_x = ktot == 0 ? 0.0 : fd_base_step(ktot);
    double lead = 1.0 + vnorm(pt.xi) + vnorm(pt.eta);
    rep.step_freq = rep.step_x * std::pow(lead, params.rho);
  }
  double scale = std::max(best, 1e-12);
  for (const auto& e : entries) {
    if (e.gapw * std::exp(-params.m * e.lg) > 0.05 * scale) {
      rep.step_sensitive = true;
      break;
    }
  }
  return rep;
}

namespace {

void check_multiidx(int n, const MultiIdx& mi, const char* what) {
  require(mi.k[0] >= 0 && mi.k[1] >= 0, std::string(what) + ": multi-index components must be nonnegative");
  require(n == 2 || mi.k[1] == 0, std::string(what) + ": second component unused in dimension 1");
}

}  // namespace

double c_seminorm(const Symbol& s, const MultiIdx& beta, const MultiIdx& gamma, double rho,
                  const SamplingSpec& sampling) {
  require(s.x_independent, "c_seminorm: symbol must be x-independent");
  require(rho >= 0.0 && rho <= 1.0, "c_seminorm: rho must lie in [0, 1]");
  check_multiidx(s.n, beta, "c_seminorm");
  check_multiidx(s.n, gamma, "c_seminorm");
  require(beta.order() <= 4 && gamma.order() <= 4, "c_seminorm: derivative order capped at 4 per slot");
  const auto samples = make_samples(s.n, sampling, false);
  const MultiIdx zero;
  return par::max_term(samples.size(), [&](std::size_t i) {
    const SamplePoint& pt = samples[i];
    cplx d = fd_derivative(s, pt.x, pt.xi, pt.eta, zero, beta, gamma, rho);
    double lead = 1.0 + vnorm(pt.xi) + vnorm(pt.eta);
    return std::abs(d) * std::pow(lead, rho * (beta.order() + gamma.order()));
  });
}

Symbol dilate_symbol(const Symbol& s, double lambda) {
  require(s.x_independent, "dilate_symbol: symbol must be x-independent");
  require(std::isfinite(lambda) && lambda > 0.0, "dilate_symbol: scale must be positive");
  Symbol out = s;
  SymbolEval inner = s.eval;
  out.eval = [inner, lambda](const Vec& x, const Vec& xi, const Vec& eta) {
    return inner(x, vscale(lambda, xi), vscale(lambda, eta));
  };
  if (out.support) out.support->radius = s.support->radius / lambda;
  out.name = s.name + "_dilated";
  return out;
}

Symbol mollify(const Symbol& s, double eps) {
  return mollify(
      s, eps,
      [](const Vec& xi, const Vec& eta) {
        return cutoff_one_zero(std::sqrt(vnorm2(xi) + vnorm2(eta)), 1.0, 2.0);
      },
      2.0);
}

Symbol mollify(const Symbol& s, double eps, const std::function<double(const Vec&, const Vec&)>& profile,
               double support_radius) {
  require(std::isfinite(eps) && eps > 0.0, "mollify: eps must be positive");
  require(support_radius > 0.0, "mollify: cutoff support radius must be positive");
  require(static_cast<bool>(profile), "mollify: cutoff must be callable");
  require(std::abs(profile(Vec{0.0, 0.0}, Vec{0.0, 0.0}) - 1.0) <= 1e-12,
          "mollify: cutoff must equal 1 at the origin");
  Rng rng(0x10E5C0DEull);
  for (int i = 0; i < 64; ++i) {
    double r = rng.uniform(0.0, 1.5 * support_radius);
    double ang = rng.uniform(0.0, 0.5 * pi);
    Vec xi = pair_point(s.n, rng, r * std::cos(ang));
    Vec eta = pair_point(s.n, rng, r * std::sin(ang));
    double v = profile(xi, eta);
    require(std::isfinite(v) && v >= -1e-12 && v <= 1.0 + 1e-12,
            "mollify: cutoff must take values in [0, 1]");
    if (std::sqrt(vnorm2(xi) + vnorm2(eta)) >= support_radius)
      require(std::abs(v) <= 1e-12, "mollify: cutoff must vanish outside its declared support");
  }
  Symbol out = s;
  SymbolEval inner = s.eval;
  auto prof = profile;
  out.eval = [inner, prof, eps](const Vec& x, const Vec& xi, const Vec& eta) {
    double c = prof(vscale(eps, xi), vscale(eps, eta));
    if (c == 0.0) return cplx(0.0, 0.0);
    return c * inner(x, xi, eta);
  };
  double rad = support_radius / eps;
  if (s.support && s.support->kind == SupportKind::ball) rad = std::min(rad, s.support->radius);
  out.support = SupportDesc{SupportKind::ball, rad};
  out.name = s.name + "_mollified";
  return out;
}

Symbol sym_one(int n) {
  return make_symbol(
      n, [](const Vec&, const Vec&, const Vec&) { return cplx(1.0, 0.0); },
      SymbolClassParams{0.0, 1.0, 0.0}, true, std::nullopt, "one");
}

Symbol sym_bracket(int n, double m) {
  return make_symbol(
      n,
      [m](const Vec&, const Vec& xi, const Vec& eta) {
        return cplx(std::pow(1.0 + vnorm2(xi) + vnorm2(eta), 0.5 * m), 0.0);
      },
      SymbolClassParams{m, 1.0, 0.0}, true, std::nullopt, "bracket");
}

Symbol sym_scatter_heat_halfwave(int n) {
  return make_symbol(
      n,
      [](const Vec&, const Vec& xi, const Vec& eta) {
        return cplx(1.0 / (1.0 + vnorm2(xi) + vnorm(eta)), 0.0);
      },
      SymbolClassParams{-1.0, 0.5, 0.0}, true, std::nullopt, "scatter_heat_halfwave");
}

Symbol sym_scatter_laplace_heat_halfwave(int n) {
  return make_symbol(
      n,
      [](const Vec&, const Vec& xi, const Vec& eta) {
        Vec sum = vadd(xi, eta);
        return cplx(1.0 / (1.0 + vnorm2(sum) + vnorm2(xi) + vnorm(eta)), 0.0);
      },
      SymbolClassParams{-2.0, 1.0, 0.0}, true, std::nullopt, "scatter_laplace_heat_halfwave");
}

Symbol sym_modulated(int n, const Vec& a) {
  Vec aa = n == 1 ? vec1(a[0]) : a;
  return make_symbol(
      n,
      [aa](const Vec&, const Vec& xi, const Vec& eta) {
        double ph = -vdot(aa, vadd(xi, eta));
        return cplx(std::cos(ph), std::sin(ph));
      },
      SymbolClassParams{0.0, 1.0, 0.0}, true, std::nullopt, "modulated");
}

Symbol sym_gaussian_bump(int n, const Vec& center, double w) {
  require(std::isfinite(w) && w > 0.0, "sym_gaussian_bump: width must be positive");
  Vec c = n == 1 ? vec1(center[0]) : center;
  double iw2 = 1.0 / (w * w);
  return make_symbol(
      n,
      [c, iw2](const Vec&, const Vec& xi, const Vec& eta) {
        double q = vnorm2(vsub(xi, c)) + vnorm2(vsub(eta, c));
        return cplx(std::exp(-q * iw2), 0.0);
      },
      SymbolClassParams{0.0, 1.0, 0.0}, true, std::nullopt, "gaussian_bump");
}

Symbol sym_annulus(const Symbol& base, double R) {
  require(std::isfinite(R) && R > 0.0, "sym_annulus: radius must be positive");
  require(base.x_independent, "sym_annulus: base symbol must be x-independent");
  // Per-slot radial bump supported in [1/2, 2] (equal to 1 on [3/4, 3/2]), so
  // the product over both slots vanishes outside { R <= |xi|+|eta| <= 4R }.
  auto slot_bump = [](double t) {
    if (t <= 0.5 || t >= 2.0) return 0.0;
    return transition01((t - 0.5) / 0.25) * cutoff_one_zero(t, 1.5, 2.0);
  };
  Symbol out = base;
  SymbolEval inner = base.eval;
  double invR = 1.0 / R;
  out.eval = [inner, invR, slot_bump](const Vec& x, const Vec& xi, const Vec& eta) {
    double bx = slot_bump(vnorm(xi) * invR);
    if (bx == 0.0) return cplx(0.0, 0.0);
    double be = slot_bump(vnorm(eta) * invR);
    if (be == 0.0) return cplx(0.0, 0.0);
    return bx * be * inner(x, xi, eta);
  };
  out.support = SupportDesc{SupportKind::annulus, R};
  out.name = base.name + "_annulus";
  return out;
}

Symbol sym_multiply(const Symbol& a, const Symbol& b) {
  require(a.n == b.n, "sym_multiply: dimension mismatch");
  Symbol out;
  out.n = a.n;
  if (a.declared_class && b.declared_class)
    out.declared_class = SymbolClassParams{a.declared_class->m + b.declared_class->m,
                                           std::min(a.declared_class->rho, b.declared_class->rho),
                                           std::max(a.declared_class->delta, b.declared_class->delta)};
  SymbolEval ea = a.eval, eb = b.eval;
  out.eval = [ea, eb](const Vec& x, const Vec& xi, const Vec& eta) {
    return ea(x, xi, eta) * eb(x, xi, eta);
  };
  out.x_independent = a.x_independent && b.x_independent;
  out.support = a.support ? a.support : b.support;
  out.name = a.name + "*" + b.name;
  return out;
}

Symbol sym_add(const Symbol& a, const Symbol& b) {
  require(a.n == b.n, "sym_add: dimension mismatch");
  Symbol out;
  out.n = a.n;
  if (a.declared_class && b.declared_class)
    out.declared_class = SymbolClassParams{std::max(a.declared_class->m, b.declared_class->m),
                                           std::min(a.declared_class->rho, b.declared_class->rho),
                                           std::max(a.declared_class->delta, b.declared_class->delta)};
  SymbolEval ea = a.eval, eb = b.eval;
  out.eval = [ea, eb](const Vec& x, const Vec& xi, const Vec& eta) {
    return ea(x, xi, eta) + eb(x, xi, eta);
  };
  out.x_independent = a.x_independent && b.x_independent;
  if (a.support && b.support && a.support->kind == b.support->kind &&
      a.support->radius == b.support->radius)
    out.support = a.support;
  out.name = a.name + "+" + b.name;
  return out;
}

Symbol sym_scale(const Symbol& a, cplx c) {
  Symbol out = a;
  SymbolEval ea = a.eval;
  out.eval = [ea, c](const Vec& x, const Vec& xi, const Vec& eta) { return c * ea(x, xi, eta); };
  return out;
}

Symbol builtin(const std::string& name, int n, const std::vector<double>& params) {
  auto need = [&](std::size_t k) {
    require(params.size() >= k,
            "builtin: symbol '" + name + "' needs " + std::to_string(k) + " parameter(s)");
  };
  if (name == "one") return sym_one(n);
  if (name == "bracket") {
    need(1);
    return sym_bracket(n, params[0]);
  }
  if (name == "scatter_heat_halfwave") return sym_scatter_heat_halfwave(n);
  if (name == "scatter_laplace_heat_halfwave") return sym_scatter_laplace_heat_halfwave(n);
  if (name == "modulated") {
    need(static_cast<std::size_t>(n));
    return sym_modulated(n, Vec{params[0], n == 2 ? params[1] : 0.0});
  }
  if (name == "gaussian_bump") {
    need(static_cast<std::size_t>(n) + 1);
    return sym_gaussian_bump(n, Vec{params[0], n == 2 ? params[1] : 0.0}, params[n == 2 ? 2 : 1]);
  }
  if (name == "annulus") {
    need(2);
    return sym_annulus(sym_bracket(n, params[0]), params[1]);
  }
  throw contract_error("builtin: unknown symbol name '" + name + "'");
}

ClassifyResult classify_order(const Symbol& s, double rho, double delta, int K, int N,
                              const SamplingSpec& sampling) {
  require(K >= 0 && K <= 4 && N >= 0 && N <= 4, "classify_order: K and N must lie in [0, 4]");
  require(rho >= 0.0 && rho <= 1.0 && delta >= 0.0 && delta <= 1.0,
          "classify_order: rho and delta must lie in [0, 1]");
  SamplingSpec spec = sampling;
  if (spec.shell_max < 9) spec.shell_max = 9;
  if (spec.shell_min > 4) spec.shell_min = 4;
  const auto samples = make_samples(s.n, spec, !s.x_independent);
  const auto entries = derivative_sweep(s, rho, delta, K, N, samples);

  // Stability across nested radii 2^4..2^9: the per-shell norm may not grow
  // by more than 5% between any two nested shells of the window.
  const int jlo = 4;
  const int jhi = 9;
  auto stable = [&](double m) {
    std::array<double, 10> shellv{};
    for (const auto& e : entries)
      if (e.shell >= jlo && e.shell <= jhi)
        shellv[static_cast<std::size_t>(e.shell)] =
            std::max(shellv[static_cast<std::size_t>(e.shell)], e.q0 * std::exp(-m * e.lg));
    double runmin = shellv[jlo];
    for (int j = jlo + 1; j <= jhi; ++j) {
      if (shellv[static_cast<std::size_t>(j)] > 1.05 * runmin) return false;
      runmin = std::min(runmin, shellv[static_cast<std::size_t>(j)]);
    }
    return true;
  };

  double lo = -8.0, hi = 8.0;
  if (stable(lo)) return ClassifyResult{lo, lo, false};
  if (!stable(hi)) return ClassifyResult{hi, hi, false};
  while (hi - lo > 0.01) {
    double mid = 0.5 * (lo + hi);
    if (stable(mid))
      hi = mid;
    else
      lo = mid;
  }
  return ClassifyResult{lo, hi, true};
}

bool certify_support(const Symbol& s, double max_radius, double spacing, double tol) {
  if (!s.support) return true;
  require(max_radius > 0.0 && spacing > 0.0, "certify_support: radius and spacing must be positive");
  const SupportDesc sd = *s.support;
  auto outside = [sd](const Vec& xi, const Vec& eta) {
    double l1 = vnorm(xi) + vnorm(eta);
    switch (sd.kind) {
      case SupportKind::ball: return std::sqrt(vnorm2(xi) + vnorm2(eta)) > sd.radius;
      case SupportKind::annulus: return l1 < sd.radius || l1 > 4.0 * sd.radius;
      case SupportKind::lowpass: return l1 >= sd.radius;
      case SupportKind::highpass: return l1 <= sd.radius;
    }
    return false;
  };

  std::vector<double> axis;
  for (double t = -max_radius; t <= max_radius + 0.5 * spacing; t += spacing) axis.push_back(t);
  std::vector<Vec> slot;
  if (s.n == 1) {
    for (double t : axis) slot.push_back(vec1(t));
  } else {
    for (double t0 : axis)
      for (double t1 : axis) slot.push_back(vec2(t0, t1));
  }
  const std::size_t m = slot.size();
  require(m * m <= 30000000ull, "certify_support: sampling lattice too large; use a coarser spacing");

  std::vector<Vec> xs{Vec{0.0, 0.0}};
  if (!s.x_independent) xs.push_back(s.n == 1 ? vec1(5.23) : vec2(5.23, 2.11));

  for (const Vec& x : xs) {
    double worst = par::max_term(m * m, [&](std::size_t i) {
      const Vec& xi = slot[i / m];
      const Vec& eta = slot[i % m];
      if (!outside(xi, eta)) return 0.0;
      return std::abs(s.eval(x, xi, eta));
    });
    if (worst > tol) return false;
  }
  return true;
}

}  // namespace bpdo
