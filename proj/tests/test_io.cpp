#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bpdo/grid.hpp"
#include "bpdo/io.hpp"
#include "bpdo/operator.hpp"
#include "bpdo/probes.hpp"
#include "bpdo/symbol.hpp"

using namespace bpdo;
namespace fs = std::filesystem;

namespace {

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "bpdo_io_test";
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("field container round-trips bits, header, and representation") {
  Grid g = make_grid(1, 32, 16.0);
  ComplexField f = make_field(g, Rep::spatial, [](const Vec& x) {
    return cplx(std::sin(x[0]) * 1e-7, std::cos(3 * x[0]) * 1e5);
  });
  auto bytes = encode_field(f);
  CHECK(bytes.size() == 4 + 4 + 4 + 4 + 8 + 1 + 32 * 16);  // == 537
  ComplexField f2 = decode_field(bytes);
  CHECK(f2.grid == g);
  CHECK(f2.rep == Rep::spatial);
  REQUIRE(f2.v.size() == f.v.size());
  for (std::size_t i = 0; i < f.v.size(); ++i) REQUIRE(f.v[i] == f2.v[i]);
  CHECK(encode_field(f2) == bytes);

  fs::path d = work_dir();
  write_field(d / "f.bfld", f);
  CHECK(read_field(d / "f.bfld").v == f.v);
  CHECK(!fs::exists(d / "f.bfld.tmp"));  // atomic write cleans up

  ComplexField s = as_spectral(f);
  ComplexField s2 = decode_field(encode_field(s));
  CHECK(s2.rep == Rep::spectral);
  CHECK(s2.v == s.v);

  Grid g2 = make_grid(2, 8, 4.0);
  ComplexField h = make_field(
      g2, Rep::spatial,
      [](const Vec& x) { return cplx(x[0] - x[1], x[0] * x[1]); });
  ComplexField h2 = decode_field(encode_field(h));
  CHECK(h2.grid == g2);
  CHECK(h2.v == h.v);
}

TEST_CASE("field decoder rejects bad magic, truncation, trailing bytes") {
  ComplexField f = make_field(make_grid(1, 8, 4.0), Rep::spatial);
  auto bytes = encode_field(f);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_field(bad), contract_error);

  auto trunc = bytes;
  trunc.resize(trunc.size() - 3);
  CHECK_THROWS_AS(decode_field(trunc), contract_error);

  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(decode_field(extra), contract_error);
}

TEST_CASE("tabulated symbols reproduce the original application exactly") {
  Grid g = make_grid(1, 32, 16.0);
  Symbol base = sym_bracket(1, -1.0);
  auto bytes = encode_symbol(base, g, false);
  CHECK(bytes.size() == 16409);
  Grid gout;
  Symbol tab = decode_symbol(bytes, &gout);
  CHECK(gout == g);
  CHECK(tab.x_independent);

  ComplexField f = make_field(g, Rep::spatial, [](const Vec& x) {
    return cplx(std::exp(-0.4 * (x[0] - 7) * (x[0] - 7)), 0.1 * x[0]);
  });
  ComplexField h = make_field(
      g, Rep::spatial, [](const Vec& x) { return cplx(std::cos(x[0]), 0.0); });
  ComplexField a = apply_fft_diag(base, f, h).field;
  ComplexField b = apply_fft_diag(tab, f, h).field;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i)
    worst = std::max(worst, std::abs(a.v[i] - b.v[i]));
  CHECK(worst == 0.0);  // lattice queries hit stored samples bit-for-bit

  const Vec xi = g.frequency(5), eta = g.frequency(30);
  CHECK(tab({0, 0}, xi, eta) == base({0, 0}, xi, eta));
  const Vec nudged{xi[0] + 0.1, 0.0};  // off-lattice snaps to the neighbor
  CHECK(tab({0, 0}, nudged, eta) == base({0, 0}, xi, eta));
}

TEST_CASE("x-dependent tabulation stores the full (x, xi, eta) tensor") {
  Grid g = make_grid(1, 16, 8.0);
  Symbol mod = make_symbol(
      1,
      [](const Vec& x, const Vec& xi, const Vec& eta) {
        return cplx(std::cos(x[0]), 0.0) *
               std::pow(1.0 + xi[0] * xi[0] + eta[0] * eta[0], -0.5);
      },
      std::nullopt, false, std::nullopt, "xdep");
  auto bytes = encode_symbol(mod, g, true);
  CHECK(bytes.size() == 65561);
  Symbol tab = decode_symbol(bytes);
  CHECK(!tab.x_independent);
  const Vec x = g.point(3), xi = g.frequency(2), eta = g.frequency(9);
  CHECK(tab(x, xi, eta) == mod(x, xi, eta));

  CHECK_THROWS_AS(encode_symbol(mod, make_grid(2, 8, 4.0), true),
                  contract_error);
}

TEST_CASE("probe report JSON round-trips losslessly and reserializes "
          "byte-identically") {
  ProbeReport rep;
  rep.name = "scaling";
  rep.inputs = "bracket(-1) rho=0.5";
  rep.comparison = "abs";
  rep.params["chirped"] = 1.0;
  rep.params["radii"] = 4.0;
  rep.trials.push_back({0, "R=4", 2.72001154, true});
  rep.trials.push_back({1, "R=8", 1.8301061, false});
  rep.measured = -0.5814944321098765;
  rep.target = -0.5;
  rep.tolerance = 0.15;
  rep.pass = true;
  rep.skipped = 3;

  const std::string text = report_to_json(rep);
  ProbeReport back = report_from_json(text);
  CHECK(back.name == rep.name);
  CHECK(back.inputs == rep.inputs);
  CHECK(back.comparison == rep.comparison);
  CHECK(back.params == rep.params);
  REQUIRE(back.trials.size() == 2);
  CHECK(back.trials[0].label == "R=4");
  CHECK(back.trials[0].value == rep.trials[0].value);
  CHECK(back.trials[1].used == false);
  CHECK(back.measured == rep.measured);
  CHECK(back.target == rep.target);
  CHECK(back.tolerance == rep.tolerance);
  CHECK(back.pass == rep.pass);
  CHECK(back.skipped == rep.skipped);
  CHECK(report_to_json(back) == text);

  CHECK_THROWS_AS(report_from_json("{\"schema_version\": 2}"), contract_error);
  CHECK_THROWS_AS(report_from_json("not json"), contract_error);
}

TEST_CASE("CSV tables and the SVG view derived from them") {
  ProbeReport rep;
  rep.trials.push_back({0, "R=4", 2.5, true});
  rep.trials.push_back({1, "odd,label", 0.125, false});
  const std::string csv = trials_to_csv(rep);
  CHECK(csv.rfind("index,label,value,used\n", 0) == 0);
  CHECK(csv.find("odd;label") != std::string::npos);  // separator made safe
  CHECK(csv.find("2.5,1") != std::string::npos);

  const std::string curve =
      curve_to_csv("R", "mass", {{4.0, 2.72}, {8.0, 1.83}, {16.0, 1.22}});
  CHECK(curve.rfind("R,mass\n", 0) == 0);
  const std::string svg = svg_from_csv(curve, 0, 1, true, "mass vs R");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  std::size_t circles = 0, at = 0;
  while ((at = svg.find("<circle", at)) != std::string::npos) {
    ++circles;
    at += 7;
  }
  CHECK(circles == 3);  // one marker per CSV row, nothing plot-only
  CHECK(svg_from_csv(curve, 0, 1, true, "mass vs R") == svg);

  CHECK_THROWS_AS(svg_from_csv("x,y\n-1,2\n", 0, 1, true, "bad"),
                  contract_error);
  CHECK_THROWS_AS(svg_from_csv("x,y\n", 0, 1, false, "empty"), contract_error);
}

TEST_CASE("FNV-1a 64 matches the published test vectors") {
  CHECK(fnv1a64("", 0) == 14695981039346656037ull);
  CHECK(fnv1a64("a", 1) == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar", 6) == 0x85944171f73967e8ull);
  CHECK(hex64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
}

TEST_CASE("artifact session manifests every emitted file with its hash") {
  fs::path d = work_dir() / "session";
  ArtifactSession ses(d);
  ses.emit("report.json", std::string("{\"x\": 1}\n"));
  ses.emit("curve.csv", std::string("a,b\n1,2\n"));
  fs::path man = ses.finish();
  REQUIRE(fs::exists(man));
  CHECK(fs::exists(d / "metadata.json"));

  auto bytes = read_file_bytes(man);
  const std::string mtext(bytes.begin(), bytes.end());
  CHECK(mtext.find("report.json") != std::string::npos);
  CHECK(mtext.find("curve.csv") != std::string::npos);
  CHECK(mtext.find("metadata.json") != std::string::npos);
  CHECK(mtext.find("manifest.json") == std::string::npos);  // not self-listed
  CHECK(mtext.find(hex64(fnv1a64("{\"x\": 1}\n", 9))) != std::string::npos);

  CHECK_THROWS_AS(ses.emit("late.txt", std::string("x")), contract_error);
  ArtifactSession s2(d);
  CHECK_THROWS_AS(s2.emit("sub/dir.txt", std::string("x")), contract_error);
  CHECK_THROWS_AS(s2.emit("manifest.json", std::string("x")), contract_error);
}
