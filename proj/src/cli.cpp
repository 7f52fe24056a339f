#include "bpdo/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bpdo/common.hpp"
#include "bpdo/decompose.hpp"
#include "bpdo/grid.hpp"
#include "bpdo/io.hpp"
#include "bpdo/operator.hpp"
#include "bpdo/parallel.hpp"
#include "bpdo/probes.hpp"
#include "bpdo/scatter.hpp"
#include "bpdo/symbol.hpp"

namespace bpdo::cli {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// The default configuration doubles as the schema: every user key must
// exist here with the same shape, and these values apply wherever the user
// is silent.
constexpr const char* kDefaultConfigText = R"json({
  "schema_version": 1,
  "command": "probe",
  "grid": {"n": 1, "N": 128, "L": 16.0},
  "symbol": {"name": "bracket", "params": [-1.0], "file": ""},
  "exponents": {"p1": 2.0, "p2": 2.0},
  "seed": 2024,
  "threads": 0,
  "output": {"dir": "", "json": true, "csv": true, "svg": false},
  "apply": {"trial": 0, "crosscheck": false, "tolerance": 1e-10},
  "kernel": {"x": [0.0, 0.0], "taper": "automatic", "bins": 48},
  "norm": {"K": 0, "N": 2, "use_declared": true, "m": 0.0, "rho": 1.0, "delta": 0.0},
  "leibniz": {"s": 1.0, "trials": 5, "use_declared_m": true, "m": 0.0, "tolerance": 1e-10},
  "scatter": {"triple": "heat_halfwave", "times": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
              "dt": 0.01, "r": 0.0, "p": 2.0},
  "probe": {
    "kind": "dilation",
    "opnorm": {"trials": 40, "bound": "cs", "ratio_bound": 1.0,
               "family": "mixed", "kmax": 12},
    "scaling": {"branch": "annulus", "radii": [4.0, 8.0, 16.0, 32.0],
                "rho": 0.5, "use_declared_m": true, "m": 0.0,
                "N": 2048, "L": 32.0, "tolerance": 0.15},
    "decay": {"M": 0, "holder": false, "epsilon": 0.5,
              "N": 512, "L": 2.0, "tolerance": 0.2},
    "dilation": {"k": 0},
    "domination": {"s": 1.0, "f_box": [4.0, 8.0], "g_box": [6.0, 12.0],
                   "tolerance": 0.25},
    "bmo": {"trials": 6, "rho": 0.25, "tolerance": 0.25},
    "cseminorm": {"use_declared_rho": true, "rho": 1.0, "tolerance": 0.01},
    "weights": {"a1": 0.5, "a2": 0.0, "p1": 2.0, "p2": 2.0, "q": 1.0,
                "max_level": 6}
  }
})json";

constexpr const char* kUsage =
    "usage: bpdo <command> [args] [flags]\n"
    "commands: apply | kernel | norm | leibniz | scatter |\n"
    "          probe {opnorm|scaling|decay|dilation|domination|bmo|cseminorm|weights}\n"
    "flags:\n"
    "  --config FILE      load a JSON config (defaults apply to absent keys)\n"
    "  --set PATH=VALUE   override one config entry (repeatable), e.g. --set grid.N=256\n"
    "  --symbol NAME      shorthand for --set symbol.name=NAME\n"
    "  --symbol-file F    shorthand for --set symbol.file=F\n"
    "  --out DIR          output directory (default: $BPDO_OUT_DIR or ./bpdo_out)\n"
    "  --seed N           RNG seed for trial families\n"
    "  --threads N        worker thread count (0 = leave default)\n"
    "  --emit LIST        comma list from json,csv,svg (or none)\n"
    "  --dump-config      print the resolved config and exit\n"
    "  --help             this text\n"
    "exit codes: 0 all checks passed, 1 a check failed, 2 config error";

const char* type_class(const json& j) {
  if (j.is_object()) return "object";
  if (j.is_array()) return "array";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_number()) return "number";
  return "null";
}

// Rejects any key absent from the default document and any value whose
// shape differs.  All schema arrays are numeric lists.
void check_against_schema(const json& user, const json& schema, const std::string& path) {
  const std::string where = path.empty() ? "top level" : "'" + path + "'";
  if (schema.is_object()) {
    require(user.is_object(), "config: " + where + " must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string sub = path.empty() ? it.key() : path + "." + it.key();
      require(schema.contains(it.key()), "config: unknown key '" + sub + "'");
      check_against_schema(it.value(), schema.at(it.key()), sub);
    }
    return;
  }
  if (schema.is_array()) {
    require(user.is_array(), "config: " + where + " must be an array of numbers");
    for (const auto& el : user)
      require(el.is_number(), "config: " + where + " must be an array of numbers");
    return;
  }
  require(std::string(type_class(user)) == type_class(schema),
          "config: " + where + " must be a " + type_class(schema));
}

void merge_into(json& dst, const json& src) {
  if (!src.is_object()) {
    dst = src;
    return;
  }
  for (auto it = src.begin(); it != src.end(); ++it) {
    if (dst.contains(it.key()) && dst[it.key()].is_object() && it.value().is_object())
      merge_into(dst[it.key()], it.value());
    else
      dst[it.key()] = it.value();
  }
}

// One "PATH=VALUE" override.  VALUE is parsed as JSON when possible; bare
// words become strings.  The path must name an existing scalar or array.
void apply_override(json& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  require(eq != std::string::npos && eq > 0,
          "--set expects PATH=VALUE, got '" + spec + "'");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  json* node = &cfg;
  std::size_t start = 0;
  std::string leaf_key;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos
                                                     ? std::string::npos
                                                     : dot - start);
    require(!part.empty(), "config: bad key path '" + path + "'");
    require(node->is_object() && node->contains(part),
            "config: unknown key '" + path + "'");
    if (dot == std::string::npos) {
      leaf_key = part;
      break;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
  json& leaf = (*node)[leaf_key];
  require(!leaf.is_object(), "config: '" + path + "' is a section, not a value");

  json parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || (leaf.is_string() && !parsed.is_string()))
    parsed = json(raw);
  require(std::string(type_class(parsed)) == type_class(leaf),
          "config: '" + path + "' must be a " + type_class(leaf));
  if (parsed.is_array())
    for (const auto& el : parsed)
      require(el.is_number(), "config: '" + path + "' must be an array of numbers");
  leaf = parsed;
}

double jd(const json& j) { return j.get<double>(); }
bool jb(const json& j) { return j.get<bool>(); }
std::string js(const json& j) { return j.get<std::string>(); }

long long jint(const json& j, const std::string& what) {
  const double d = j.get<double>();
  require(std::abs(d - static_cast<double>(std::llround(d))) < 1e-9,
          "config: '" + what + "' must be an integer");
  return std::llround(d);
}

std::vector<double> jvec(const json& j) { return j.get<std::vector<double>>(); }

// ---- command execution -----------------------------------------------------

// Everything a command produces, gathered before any file is written so a
// rejected configuration leaves the output directory untouched.
struct Emission {
  std::string label;  // e.g. "probe scaling"
  std::vector<std::pair<std::string, ProbeReport>> reports;  // stem -> report
  std::vector<std::pair<std::string, std::string>> curves;   // filename -> CSV
  bool curves_loglog = false;
  std::string curve_title;
  std::vector<std::pair<std::string, ComplexField>> fields;  // filename -> field
};

Grid main_grid(const json& cfg) {
  const int n = static_cast<int>(jint(cfg["grid"]["n"], "grid.n"));
  const int N = static_cast<int>(jint(cfg["grid"]["N"], "grid.N"));
  return make_grid(n, N, jd(cfg["grid"]["L"]));
}

// Probe-local grid override: N = 0 or L = 0 inherits the main grid's value.
Grid probe_grid(const json& cfg, const json& sub) {
  const Grid base = main_grid(cfg);
  int N = static_cast<int>(jint(sub["N"], "probe grid N"));
  double L = jd(sub["L"]);
  if (N == 0) N = base.N;
  if (L == 0.0) L = base.L;
  return make_grid(base.n, N, L);
}

Symbol config_symbol(const json& cfg, int n) {
  const std::string file = js(cfg["symbol"]["file"]);
  if (!file.empty()) return read_symbol(file);
  return builtin(js(cfg["symbol"]["name"]), n, jvec(cfg["symbol"]["params"]));
}

std::uint64_t config_seed(const json& cfg) {
  const long long s = jint(cfg["seed"], "seed");
  require(s >= 0, "config: 'seed' must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

SymbolClassParams declared_or(const Symbol& sigma, const json& sub,
                              bool use_declared, const char* what) {
  if (use_declared) {
    require(sigma.declared_class.has_value(),
            std::string("config: symbol '") + sigma.name +
                "' has no declared class; set " + what);
    return *sigma.declared_class;
  }
  return SymbolClassParams{jd(sub["m"]), jd(sub["rho"]), jd(sub["delta"])};
}

ApplicationResult apply_any(const Symbol& sigma, const ComplexField& f,
                            const ComplexField& g, bool crosscheck = false) {
  if (sigma.x_independent) return apply_fft_diag(sigma, f, g, crosscheck);
  return apply_direct(sigma, f, g);
}

Emission cmd_apply(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const long long trial = jint(cfg["apply"]["trial"], "apply.trial");
  require(trial >= 0, "config: 'apply.trial' must be nonnegative");
  const bool crosscheck = jb(cfg["apply"]["crosscheck"]);

  TrialFamily fam{grid, "mixed", 12, config_seed(cfg)};
  const ComplexField f = trial_function(fam, static_cast<int>(2 * trial));
  const ComplexField g = trial_function(fam, static_cast<int>(2 * trial + 1));
  const ApplicationResult ar = apply_any(sigma, f, g, crosscheck);

  ProbeReport rep;
  rep.name = "apply";
  rep.inputs = "symbol " + sigma.name + ", trial pair " + std::to_string(trial) +
               ", method " + ar.method;
  rep.params["f_l2"] = lp_norm(f, 2.0);
  rep.params["g_l2"] = lp_norm(g, 2.0);
  rep.params["u_l2"] = lp_norm(ar.field, 2.0);
  rep.params["u_sup"] = lp_norm(ar.field, kInf);
  rep.params["crosscheck"] = ar.residual.has_value() ? 1.0 : 0.0;
  if (ar.residual) {
    rep.comparison = "abs";
    rep.measured = *ar.residual;
    rep.target = 0.0;
    rep.tolerance = jd(cfg["apply"]["tolerance"]);
  } else {
    rep.comparison = "none";
    rep.measured = rep.params["u_l2"];
  }
  finalize_report(rep);

  Emission em;
  em.label = "apply";
  em.reports.emplace_back("report", rep);
  em.fields.emplace_back("f.bfld", f);
  em.fields.emplace_back("g.bfld", g);
  em.fields.emplace_back("u.bfld", ar.field);
  return em;
}

Emission cmd_kernel(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const std::size_t M = grid.size();
  require(M * M <= (std::size_t{1} << 22),
          "config: kernel slice needs N^{2n} <= 2^22; reduce grid.N");
  const Symbol sigma = config_symbol(cfg, grid.n);

  const std::vector<double> xv = jvec(cfg["kernel"]["x"]);
  require(xv.size() >= static_cast<std::size_t>(grid.n),
          "config: 'kernel.x' needs one entry per axis");
  Vec x{0.0, 0.0};
  for (int a = 0; a < grid.n; ++a) x[a] = xv[static_cast<std::size_t>(a)];

  const std::string tname = js(cfg["kernel"]["taper"]);
  Taper taper = Taper::automatic;
  if (tname == "force")
    taper = Taper::force;
  else if (tname == "off")
    taper = Taper::off;
  else
    require(tname == "automatic",
            "config: 'kernel.taper' must be automatic|force|off");

  const long long bins = jint(cfg["kernel"]["bins"], "kernel.bins");
  require(bins >= 4 && bins <= 4096, "config: 'kernel.bins' must be in [4, 4096]");

  const KernelSlice ks = kernel_slice(sigma, x, grid, taper);

  double sup_k = 0.0, l1 = 0.0, smin = kInf, smax = 0.0;
  for (std::size_t i = 0; i < ks.values.size(); ++i) {
    const double a = std::abs(ks.values[i]);
    if (a > sup_k) sup_k = a;
    l1 += a;
    const double s = ks.S[i];
    if (s > 0.0 && s < smin) smin = s;
    if (s > smax) smax = s;
  }
  const double cell = std::pow(grid.h(), 2 * grid.n);
  l1 *= cell;

  // Log-binned magnitude envelope over the distance functional.
  std::vector<std::pair<double, double>> env;
  if (smin < smax) {
    const auto nb = static_cast<std::size_t>(bins);
    std::vector<double> best(nb, 0.0);
    const double lo = std::log(smin), span = std::log(smax) - lo;
    for (std::size_t i = 0; i < ks.values.size(); ++i) {
      if (ks.S[i] <= 0.0) continue;
      auto b = static_cast<std::size_t>(
          std::floor((std::log(ks.S[i]) - lo) / span * static_cast<double>(nb)));
      if (b >= nb) b = nb - 1;
      best[b] = std::max(best[b], std::abs(ks.values[i]));
    }
    for (std::size_t b = 0; b < nb; ++b) {
      if (best[b] <= 0.0) continue;
      const double mid = std::exp(lo + span * (static_cast<double>(b) + 0.5) /
                                           static_cast<double>(nb));
      env.emplace_back(mid, best[b]);
    }
  }

  ProbeReport rep;
  rep.name = "kernel";
  rep.inputs = "symbol " + sigma.name + ", slice at the configured base point";
  rep.comparison = "none";
  rep.measured = sup_k;
  rep.params["x0"] = ks.x[0];
  rep.params["x1"] = ks.x[1];
  rep.params["tapered"] = ks.tapered ? 1.0 : 0.0;
  rep.params["taper_scale"] = ks.taper_scale;
  rep.params["sup_abs"] = sup_k;
  rep.params["l1_mass"] = l1;
  rep.params["pairs"] = static_cast<double>(ks.values.size());
  finalize_report(rep);

  Emission em;
  em.label = "kernel";
  em.reports.emplace_back("report", rep);
  if (!env.empty()) {
    em.curves.emplace_back("kernel_envelope.csv", curve_to_csv("S", "max_abs_K", env));
    em.curves_loglog = true;
    em.curve_title = "kernel envelope";
  }
  if (grid.n == 1) {
    // Pack the (u, v) pair lattice as a 2-d field: row-major layouts match.
    ComplexField kf = make_field(make_grid(2, grid.N, grid.L), Rep::spatial);
    kf.v = ks.values;
    em.fields.emplace_back("kernel.bfld", kf);
  }
  return em;
}

Emission cmd_norm(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["norm"];
  const SymbolClassParams params =
      declared_or(sigma, sub, jb(sub["use_declared"]), "norm.use_declared=false");
  const int K = static_cast<int>(jint(sub["K"], "norm.K"));
  const int Nord = static_cast<int>(jint(sub["N"], "norm.N"));
  require(K >= 0 && Nord >= 0, "config: norm orders must be nonnegative");

  const HormanderNormReport hn = hormander_norm(sigma, params, K, Nord);

  ProbeReport rep;
  rep.name = "norm";
  rep.inputs = "symbol " + sigma.name + ", orders (" + std::to_string(K) + ", " +
               std::to_string(Nord) + ")";
  rep.comparison = "none";
  rep.measured = hn.value;
  rep.params["K"] = hn.K;
  rep.params["N"] = hn.N;
  rep.params["m"] = params.m;
  rep.params["rho"] = params.rho;
  rep.params["delta"] = params.delta;
  rep.params["worst_x0"] = hn.worst_x[0];
  rep.params["worst_xi0"] = hn.worst_xi[0];
  rep.params["worst_eta0"] = hn.worst_eta[0];
  rep.params["worst_alpha"] = hn.worst_alpha.order();
  rep.params["worst_beta"] = hn.worst_beta.order();
  rep.params["worst_gamma"] = hn.worst_gamma.order();
  rep.params["step_x"] = hn.step_x;
  rep.params["step_freq"] = hn.step_freq;
  rep.params["step_sensitive"] = hn.step_sensitive ? 1.0 : 0.0;
  finalize_report(rep);

  Emission em;
  em.label = "norm";
  em.reports.emplace_back("report", rep);
  return em;
}

Emission cmd_leibniz(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["leibniz"];
  const double s = jd(sub["s"]);
  require(s > 0.0, "config: 'leibniz.s' must be positive");
  const long long trials = jint(sub["trials"], "leibniz.trials");
  require(trials >= 1, "config: 'leibniz.trials' must be >= 1");
  double m = jd(sub["m"]);
  if (jb(sub["use_declared_m"])) {
    require(sigma.declared_class.has_value(),
            "config: symbol '" + sigma.name +
                "' has no declared class; set leibniz.use_declared_m=false");
    m = sigma.declared_class->m;
  }

  const LeibnizPair pieces = leibniz_split(sigma, m, s);
  TrialFamily fam{grid, "mixed", 12, config_seed(cfg)};

  ProbeReport rep;
  rep.name = "leibniz";
  rep.inputs = "symbol " + sigma.name + ", m " + std::to_string(m) + ", s " +
               std::to_string(s);
  rep.comparison = "abs";
  rep.target = 0.0;
  rep.tolerance = jd(sub["tolerance"]);
  double worst = 0.0;
  for (long long t = 0; t < trials; ++t) {
    const ComplexField f = trial_function(fam, static_cast<int>(2 * t));
    const ComplexField g = trial_function(fam, static_cast<int>(2 * t + 1));
    const ComplexField lhs = apply_any(sigma, f, g).field;
    const ComplexField rhs =
        apply_any(pieces.sigma1, bessel_potential(f, pieces.weight_order), g).field +
        apply_any(pieces.sigma2, f, bessel_potential(g, pieces.weight_order)).field;
    const double den = std::max(lp_norm(lhs, kInf), 1e-300);
    const double rel = lp_norm(lhs - rhs, kInf) / den;
    rep.trials.push_back({static_cast<int>(t), "trial", rel, true});
    worst = std::max(worst, rel);
  }
  rep.measured = worst;
  rep.params["weight_order"] = pieces.weight_order;
  rep.params["trials"] = static_cast<double>(trials);
  finalize_report(rep);

  Emission em;
  em.label = "leibniz";
  em.reports.emplace_back("report", rep);
  return em;
}

Emission cmd_scatter(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const json& sub = cfg["scatter"];
  const std::string triple = js(sub["triple"]);
  PhaseTriple pt;
  if (triple == "heat_halfwave")
    pt = pt_heat_halfwave(grid.n);
  else if (triple == "laplace_heat_halfwave")
    pt = pt_laplace_heat_halfwave(grid.n);
  else
    throw contract_error(
        "config: 'scatter.triple' must be heat_halfwave|laplace_heat_halfwave");

  const std::vector<double> times = jvec(sub["times"]);
  const double dt = jd(sub["dt"]);
  require(dt > 0.0, "config: 'scatter.dt' must be positive");
  const double r = jd(sub["r"]);
  const double p = jd(sub["p"]);

  const ComplexField f = make_field(grid, Rep::spatial, [&](const Vec& x) {
    double q = 0.0;
    for (int a = 0; a < grid.n; ++a) q += (x[a] - 6.0) * (x[a] - 6.0);
    return cplx{std::exp(-0.5 * q), 0.0};
  });
  const ComplexField g = make_field(grid, Rep::spatial, [&](const Vec& x) {
    double q = 0.0;
    for (int a = 0; a < grid.n; ++a) q += (x[a] - 10.0) * (x[a] - 10.0);
    return cplx{std::exp(-0.35 * q), 0.1 * std::sin(x[0])};
  });

  const ProbeReport conv = convergence_report(pt, f, g, times, r, p);
  const ProbeReport ode = residual_vs_ode(pt, f, g, times.back(), dt);
  const ComplexField limit = scatter_limit(pt, f, g);

  std::vector<std::pair<double, double>> gaps;
  for (std::size_t i = 0; i < times.size() && i < conv.trials.size(); ++i)
    gaps.emplace_back(times[i], conv.trials[i].value);

  Emission em;
  em.label = "scatter " + triple;
  em.reports.emplace_back("report", conv);
  em.reports.emplace_back("ode_report", ode);
  em.curves.emplace_back("gaps.csv", curve_to_csv("t", "gap", gaps));
  em.curves_loglog = false;
  em.curve_title = "limit gap vs time";
  em.fields.emplace_back("limit.bfld", limit);
  return em;
}

Emission probe_opnorm(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["probe"]["opnorm"];
  const LebesgueExponents exps = make_exponents(
      jd(cfg["exponents"]["p1"]), jd(cfg["exponents"]["p2"]), std::nullopt, grid.n);
  const long long trials = jint(sub["trials"], "probe.opnorm.trials");
  require(trials >= 1, "config: 'probe.opnorm.trials' must be >= 1");
  const std::string kind = js(sub["family"]);
  const long long kmax = jint(sub["kmax"], "probe.opnorm.kmax");
  require(kmax >= 1, "config: 'probe.opnorm.kmax' must be >= 1");

  double bound = kInf;
  const std::string mode = js(sub["bound"]);
  if (mode == "cs") {
    require(sigma.x_independent,
            "config: probe.opnorm.bound=cs needs an x-independent symbol");
    bound = std::pow(2.0 * pi, -0.5 * grid.n) * cs_bound_rhs(sigma, grid);
  } else if (mode == "fixed") {
    bound = jd(sub["ratio_bound"]);
    require(bound > 0.0, "config: 'probe.opnorm.ratio_bound' must be positive");
  } else {
    require(mode == "none", "config: 'probe.opnorm.bound' must be none|cs|fixed");
  }

  TrialFamily fam{grid, kind, static_cast<int>(kmax), config_seed(cfg)};
  Emission em;
  em.label = "probe opnorm";
  em.reports.emplace_back(
      "report", opnorm_probe(sigma, exps, fam, static_cast<int>(trials), bound));
  return em;
}

Emission probe_scaling(const json& cfg) {
  const json& sub = cfg["probe"]["scaling"];
  const Grid grid = probe_grid(cfg, sub);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const std::string bname = js(sub["branch"]);
  ScalingBranch branch;
  if (bname == "ball")
    branch = ScalingBranch::ball;
  else if (bname == "annulus")
    branch = ScalingBranch::annulus;
  else
    throw contract_error("config: 'probe.scaling.branch' must be ball|annulus");

  const double rho = jd(sub["rho"]);
  double m = jd(sub["m"]);
  if (jb(sub["use_declared_m"])) {
    require(sigma.declared_class.has_value(),
            "config: symbol '" + sigma.name +
                "' has no declared class; set probe.scaling.use_declared_m=false");
    m = sigma.declared_class->m;
  }
  const std::vector<double> radii = jvec(sub["radii"]);

  ProbeReport rep = scaling_probe(sigma, rho, m, radii, grid, branch,
                                  jd(sub["tolerance"]));

  Emission em;
  em.label = "probe scaling";
  if (rep.trials.size() == radii.size()) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (rep.trials[i].used && rep.trials[i].value > 0.0)
        pts.emplace_back(radii[i], rep.trials[i].value);
    if (pts.size() >= 2) {
      em.curves.emplace_back("curve.csv", curve_to_csv("R", "mass", pts));
      em.curves_loglog = true;
      em.curve_title = "kernel mass vs localization radius";
    }
  }
  em.reports.emplace_back("report", std::move(rep));
  return em;
}

Emission probe_decay(const json& cfg) {
  const json& sub = cfg["probe"]["decay"];
  const Grid grid = probe_grid(cfg, sub);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const long long M = jint(sub["M"], "probe.decay.M");
  require(M >= 0, "config: 'probe.decay.M' must be nonnegative");
  DecayMode mode{jb(sub["holder"]), jd(sub["epsilon"])};

  Emission em;
  em.label = "probe decay";
  em.reports.emplace_back("report",
                          decay_probe(sigma, static_cast<int>(M), mode, grid,
                                      jd(sub["tolerance"])));
  return em;
}

Emission probe_dilation(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const long long k = jint(cfg["probe"]["dilation"]["k"], "probe.dilation.k");
  require(k >= 0, "config: 'probe.dilation.k' must be nonnegative");

  const ComplexField f = make_field(grid, Rep::spatial, [&](const Vec& x) {
    double q = 0.0;
    for (int a = 0; a < grid.n; ++a) q += (x[a] - 5.0) * (x[a] - 5.0);
    return cplx{std::exp(-0.5 * q), 0.0};
  });
  const ComplexField g = make_field(grid, Rep::spatial, [&](const Vec& x) {
    double q = 0.0;
    for (int a = 0; a < grid.n; ++a) q += (x[a] - 9.0) * (x[a] - 9.0);
    return cplx{std::exp(-0.3 * q), 0.1 * std::sin(x[0])};
  });

  Emission em;
  em.label = "probe dilation";
  em.reports.emplace_back("report", dilation_check(sigma, f, g, static_cast<int>(k)));
  return em;
}

Emission probe_domination(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["probe"]["domination"];
  const double s = jd(sub["s"]);
  const std::vector<double> fb = jvec(sub["f_box"]);
  const std::vector<double> gb = jvec(sub["g_box"]);
  require(fb.size() == 2 && gb.size() == 2 && fb[0] < fb[1] && gb[0] < gb[1],
          "config: domination boxes must be ascending [lo, hi] pairs");

  const auto box = [n = grid.n](std::vector<double> b) {
    return [n, b](const Vec& x) {
      for (int a = 0; a < n; ++a)
        if (x[a] < b[0] || x[a] >= b[1]) return 0.0;
      return 1.0;
    };
  };

  Emission em;
  em.label = "probe domination";
  em.reports.emplace_back("report", domination_check(sigma, s, box(fb), box(gb),
                                                     grid, jd(sub["tolerance"])));
  return em;
}

Emission probe_bmo(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["probe"]["bmo"];
  const long long trials = jint(sub["trials"], "probe.bmo.trials");
  const double rho = jd(sub["rho"]);
  require(rho > 0.0 && rho < 0.5, "config: 'probe.bmo.rho' must be in (0, 1/2)");

  // The endpoint statement concerns the critical order n(rho - 1); view the
  // symbol as a member of that class (valid whenever its own class is
  // contained in it, e.g. a bracket of order <= n(rho - 1)).
  const double mc = grid.n * (rho - 1.0);
  if (sigma.declared_class) {
    const SymbolClassParams& dc = *sigma.declared_class;
    require(dc.m <= mc + 1e-12 && dc.rho >= rho && dc.delta <= 0.0,
            "config: probe bmo needs a symbol of order <= n(rho-1); got m=" +
                std::to_string(dc.m));
  }
  const Symbol viewed = reclassify(sigma, SymbolClassParams{mc, rho, 0.0});

  Emission em;
  em.label = "probe bmo";
  em.reports.emplace_back(
      "report", bmo_probe(viewed, static_cast<int>(trials), jd(sub["tolerance"])));
  return em;
}

Emission probe_cseminorm(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const Symbol sigma = config_symbol(cfg, grid.n);
  const json& sub = cfg["probe"]["cseminorm"];
  double rho = jd(sub["rho"]);
  if (jb(sub["use_declared_rho"])) {
    require(sigma.declared_class.has_value(),
            "config: symbol '" + sigma.name +
                "' has no declared class; set probe.cseminorm.use_declared_rho=false");
    rho = sigma.declared_class->rho;
  }

  Emission em;
  em.label = "probe cseminorm";
  em.reports.emplace_back("report",
                          c_seminorm_decay_probe(sigma, rho, jd(sub["tolerance"])));
  return em;
}

Emission probe_weights(const json& cfg) {
  const Grid grid = main_grid(cfg);
  const json& sub = cfg["probe"]["weights"];
  const double a1 = jd(sub["a1"]), a2 = jd(sub["a2"]);
  const double p1 = jd(sub["p1"]), p2 = jd(sub["p2"]), q = jd(sub["q"]);
  const long long max_level = jint(sub["max_level"], "probe.weights.max_level");
  require(max_level >= 0, "config: 'probe.weights.max_level' must be nonnegative");

  // Power weights |x - c|^a around an off-lattice center, so every sample is
  // strictly positive; a = 0 gives the unit weight exactly.
  Vec c{0.0, 0.0};
  for (int a = 0; a < grid.n; ++a) c[a] = grid.L / 2.0 + grid.h() / 2.0;
  const auto power_weight = [&](double expo) {
    return make_field(grid, Rep::spatial, [&grid, c, expo](const Vec& x) {
      return cplx{std::pow(grid.dist(x, c), expo), 0.0};
    });
  };
  const WeightPair wp = make_weight_pair(power_weight(a1), power_weight(a2), p1, p2, q);
  const double constant =
      muckenhoupt_constant(wp, BallFamily{static_cast<int>(max_level)});

  ProbeReport rep;
  rep.name = "weights";
  rep.inputs = "power weights, exponents (" + std::to_string(p1) + ", " +
               std::to_string(p2) + ") -> " + std::to_string(q);
  rep.comparison = "none";
  rep.measured = constant;
  rep.params["a1"] = a1;
  rep.params["a2"] = a2;
  rep.params["p1"] = p1;
  rep.params["p2"] = p2;
  rep.params["q"] = q;
  rep.params["max_level"] = static_cast<double>(max_level);
  finalize_report(rep);

  Emission em;
  em.label = "probe weights";
  em.reports.emplace_back("report", rep);
  return em;
}

Emission dispatch(const json& cfg) {
  const std::string command = js(cfg["command"]);
  if (command == "apply") return cmd_apply(cfg);
  if (command == "kernel") return cmd_kernel(cfg);
  if (command == "norm") return cmd_norm(cfg);
  if (command == "leibniz") return cmd_leibniz(cfg);
  if (command == "scatter") return cmd_scatter(cfg);
  if (command == "probe") {
    const std::string kind = js(cfg["probe"]["kind"]);
    if (kind == "opnorm") return probe_opnorm(cfg);
    if (kind == "scaling") return probe_scaling(cfg);
    if (kind == "decay") return probe_decay(cfg);
    if (kind == "dilation") return probe_dilation(cfg);
    if (kind == "domination") return probe_domination(cfg);
    if (kind == "bmo") return probe_bmo(cfg);
    if (kind == "cseminorm") return probe_cseminorm(cfg);
    if (kind == "weights") return probe_weights(cfg);
    throw contract_error("config: unknown probe kind '" + kind + "'");
  }
  throw contract_error("config: unknown command '" + command + "'");
}

// ---- argument parsing -------------------------------------------------------

struct ParsedArgs {
  std::string config_file;
  std::vector<std::string> overrides;  // PATH=VALUE, applied in order
  bool dump_config = false;
  bool help = false;
};

ParsedArgs parse_args(const std::vector<std::string>& args) {
  ParsedArgs out;
  std::vector<std::string> positionals;
  const auto value_of = [&args](std::size_t& i, const std::string& flag) {
    require(i + 1 < args.size(), "flag " + flag + " needs a value");
    return args[++i];
  };
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--help" || a == "-h") {
      out.help = true;
    } else if (a == "--dump-config") {
      out.dump_config = true;
    } else if (a == "--config") {
      out.config_file = value_of(i, a);
    } else if (a == "--set") {
      out.overrides.push_back(value_of(i, a));
    } else if (a == "--out") {
      out.overrides.push_back("output.dir=" + value_of(i, a));
    } else if (a == "--seed") {
      out.overrides.push_back("seed=" + value_of(i, a));
    } else if (a == "--threads") {
      out.overrides.push_back("threads=" + value_of(i, a));
    } else if (a == "--symbol") {
      out.overrides.push_back("symbol.name=" + value_of(i, a));
    } else if (a == "--symbol-file") {
      out.overrides.push_back("symbol.file=" + value_of(i, a));
    } else if (a == "--emit") {
      const std::string list = value_of(i, a);
      bool ejson = false, ecsv = false, esvg = false;
      std::stringstream ss(list);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (tok == "json")
          ejson = true;
        else if (tok == "csv")
          ecsv = true;
        else if (tok == "svg")
          esvg = true;
        else
          require(tok == "none", "--emit accepts json,csv,svg or none; got '" +
                                     tok + "'");
      }
      out.overrides.push_back(std::string("output.json=") + (ejson ? "true" : "false"));
      out.overrides.push_back(std::string("output.csv=") + (ecsv ? "true" : "false"));
      out.overrides.push_back(std::string("output.svg=") + (esvg ? "true" : "false"));
    } else if (a.rfind("--", 0) == 0) {
      throw contract_error("unknown flag '" + a + "'");
    } else {
      positionals.push_back(a);
    }
  }
  if (!positionals.empty()) {
    out.overrides.push_back("command=" + positionals[0]);
    if (positionals.size() > 1) {
      require(positionals[0] == "probe",
              "command '" + positionals[0] + "' takes no extra argument");
      out.overrides.push_back("probe.kind=" + positionals[1]);
      require(positionals.size() == 2, "too many arguments");
    }
  }
  return out;
}

json resolve_config(const ParsedArgs& pa) {
  const json schema = json::parse(kDefaultConfigText);
  json cfg = schema;
  if (!pa.config_file.empty()) {
    std::ifstream in(pa.config_file);
    require(in.good(), "config: cannot open '" + pa.config_file + "'");
    json user;
    try {
      user = json::parse(in);
    } catch (const json::exception& e) {
      throw contract_error("config: " + pa.config_file + ": " + e.what());
    }
    check_against_schema(user, schema, "");
    merge_into(cfg, user);
  }
  for (const std::string& spec : pa.overrides) apply_override(cfg, spec);
  require(jint(cfg["schema_version"], "schema_version") == 1,
          "config: unsupported schema_version");
  return cfg;
}

std::string output_dir(const json& cfg) {
  std::string dir = js(cfg["output"]["dir"]);
  if (dir.empty()) {
    if (const char* env = std::getenv("BPDO_OUT_DIR")) dir = env;
    if (dir.empty()) dir = "bpdo_out";
  }
  return dir;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

RunResult run_impl(const std::vector<std::string>& args) {
  const ParsedArgs pa = parse_args(args);
  if (pa.help) return {0, kUsage, ""};

  json cfg = resolve_config(pa);
  if (pa.dump_config) return {0, cfg.dump(2), ""};

  const long long threads = jint(cfg["threads"], "threads");
  require(threads >= 0, "config: 'threads' must be nonnegative");
  if (threads > 0) par::set_thread_count(static_cast<int>(threads));

  const Emission em = dispatch(cfg);

  const bool ejson = jb(cfg["output"]["json"]);
  const bool ecsv = jb(cfg["output"]["csv"]);
  const bool esvg = jb(cfg["output"]["svg"]);

  const std::string dir = output_dir(cfg);
  ArtifactSession session{dir};
  session.emit("config.json", cfg.dump(2) + "\n");
  for (const auto& [name, field] : em.fields) session.emit(name, encode_field(field));
  for (const auto& [stem, rep] : em.reports) {
    if (ejson) session.emit(stem + ".json", report_to_json(rep));
    if (ecsv && !rep.trials.empty())
      session.emit(stem + "_trials.csv", trials_to_csv(rep));
  }
  for (const auto& [name, csv] : em.curves) {
    if (ecsv) session.emit(name, csv);
  }
  if (esvg && !em.curves.empty())
    session.emit("plot.svg", svg_from_csv(em.curves.front().second, 0, 1,
                                          em.curves_loglog, em.curve_title));
  session.finish();

  bool all_pass = true;
  std::string diag = em.label + ":";
  for (const auto& [stem, rep] : em.reports) {
    all_pass = all_pass && rep.pass;
    diag += " " + stem + (rep.pass ? " pass" : " FAIL") +
            " (measured=" + format_double(rep.measured);
    if (rep.comparison != "none") diag += ", target=" + format_double(rep.target);
    diag += ")";
  }
  diag += "; artifacts: " + dir;
  return {all_pass ? 0 : 1, diag, dir};
}

}  // namespace

const std::string& default_config() {
  static const std::string text = json::parse(kDefaultConfigText).dump(2) + "\n";
  return text;
}

RunResult run(const std::vector<std::string>& args) {
  try {
    return run_impl(args);
  } catch (const contract_error& e) {
    return {2, std::string("config error: ") + e.what(), ""};
  } catch (const std::exception& e) {
    return {2, std::string("error: ") + e.what(), ""};
  }
}

}  // namespace bpdo::cli
