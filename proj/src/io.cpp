#include "bpdo/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace bpdo {

namespace {

using json = nlohmann::json;

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

void put_f64(std::vector<std::uint8_t>& b, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  for (int i = 0; i < 8; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}

// Bounds-checked little-endian reader.
struct Cursor {
  const std::vector<std::uint8_t>& b;
  std::size_t off = 0;

  const std::uint8_t* need(std::size_t k, const char* what) {
    require(off + k <= b.size(),
            std::string("decode: truncated input while reading ") + what);
    const std::uint8_t* p = b.data() + off;
    off += k;
    return p;
  }
  std::uint32_t u32(const char* what) {
    const std::uint8_t* p = need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
  }
  double f64(const char* what) {
    const std::uint8_t* p = need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::uint8_t u8(const char* what) { return need(1, what)[0]; }
  void magic(const char* m) {
    const std::uint8_t* p = need(4, "magic");
    require(std::memcmp(p, m, 4) == 0,
            std::string("decode: magic bytes are not '") + m + "'");
  }
};

// Shared tail: grid header (n, N per axis, L per axis) and sample payload.
void encode_grid_header(std::vector<std::uint8_t>& out, const Grid& g) {
  put_u32(out, static_cast<std::uint32_t>(g.n));
  for (int a = 0; a < g.n; ++a) put_u32(out, static_cast<std::uint32_t>(g.N));
  for (int a = 0; a < g.n; ++a) put_f64(out, g.L);
}

Grid decode_grid_header(Cursor& c) {
  const std::uint32_t n = c.u32("dimension");
  require(n == 1 || n == 2, "decode: dimension must be 1 or 2");
  std::uint32_t N0 = c.u32("samples per axis");
  for (std::uint32_t a = 1; a < n; ++a)
    require(c.u32("samples per axis") == N0,
            "decode: axes must have equal sample counts");
  double L0 = c.f64("period per axis");
  for (std::uint32_t a = 1; a < n; ++a)
    require(c.f64("period per axis") == L0,
            "decode: axes must have equal periods");
  return make_grid(static_cast<int>(n), static_cast<int>(N0), L0);
}

void encode_samples(std::vector<std::uint8_t>& out,
                    const std::vector<cplx>& v) {
  out.reserve(out.size() + 16 * v.size());
  for (const cplx& z : v) {
    put_f64(out, z.real());
    put_f64(out, z.imag());
  }
}

std::vector<cplx> decode_samples(Cursor& c, std::size_t count) {
  std::vector<cplx> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double re = c.f64("sample");
    const double im = c.f64("sample");
    v[i] = cplx(re, im);
  }
  require(c.off == c.b.size(), "decode: trailing bytes after samples");
  return v;
}

constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_field(const ComplexField& f) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'B', 'F', 'L', 'D'});
  put_u32(out, kFormatVersion);
  encode_grid_header(out, f.grid);
  out.push_back(f.rep == Rep::spatial ? 0 : 1);
  encode_samples(out, f.v);
  return out;
}

ComplexField decode_field(const std::vector<std::uint8_t>& bytes) {
  Cursor c{bytes};
  c.magic("BFLD");
  require(c.u32("version") == kFormatVersion,
          "decode: unsupported field format version");
  const Grid g = decode_grid_header(c);
  const std::uint8_t rep = c.u8("representation flag");
  require(rep == 0 || rep == 1, "decode: representation flag must be 0 or 1");
  ComplexField f = make_field(g, rep == 0 ? Rep::spatial : Rep::spectral);
  f.v = decode_samples(c, g.size());
  return f;
}

void write_field(const std::filesystem::path& path, const ComplexField& f) {
  write_file_atomic(path, encode_field(f));
}

ComplexField read_field(const std::filesystem::path& path) {
  return decode_field(read_file_bytes(path));
}

std::vector<std::uint8_t> encode_symbol(const Symbol& s, const Grid& grid,
                                        bool with_x) {
  require(s.n == grid.n, "encode_symbol: dimension mismatch");
  if (with_x)
    require(grid.n == 1,
            "encode_symbol: x-dependent tabulation supports n = 1 only");
  const std::size_t M = grid.size();
  require(M * M <= (std::size_t(1) << 26),
          "encode_symbol: tabulation would exceed the size guard");

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'B', 'S', 'Y', 'M'});
  put_u32(out, kFormatVersion);
  encode_grid_header(out, grid);
  out.push_back(with_x ? 1 : 0);

  std::vector<cplx> v;
  v.reserve(with_x ? M * M * M : M * M);
  const Vec x0{0.0, 0.0};
  if (with_x) {
    for (std::size_t ix = 0; ix < M; ++ix) {
      const Vec x = grid.point(ix);
      for (std::size_t i = 0; i < M; ++i) {
        const Vec xi = grid.frequency(i);
        for (std::size_t j = 0; j < M; ++j)
          v.push_back(s(x, xi, grid.frequency(j)));
      }
    }
  } else {
    for (std::size_t i = 0; i < M; ++i) {
      const Vec xi = grid.frequency(i);
      for (std::size_t j = 0; j < M; ++j)
        v.push_back(s(x0, xi, grid.frequency(j)));
    }
  }
  encode_samples(out, v);
  return out;
}

Symbol decode_symbol(const std::vector<std::uint8_t>& bytes, Grid* grid_out) {
  Cursor c{bytes};
  c.magic("BSYM");
  require(c.u32("version") == kFormatVersion,
          "decode: unsupported symbol format version");
  const Grid g = decode_grid_header(c);
  const std::uint8_t axes = c.u8("axes flag");
  require(axes == 0 || axes == 1, "decode: axes flag must be 0 or 1");
  require(axes == 0 || g.n == 1,
          "decode: x-dependent tabulation supports n = 1 only");
  const std::size_t M = g.size();
  auto samples = std::make_shared<std::vector<cplx>>(
      decode_samples(c, axes == 1 ? M * M * M : M * M));
  if (grid_out) *grid_out = g;

  // Snap a frequency to its nearest lattice index, clamping past the edge.
  auto freq_index = [g](double w) {
    long k = std::lround(w * g.L / (2.0 * pi));
    k = std::max<long>(-g.N / 2, std::min<long>(g.N / 2 - 1, k));
    return static_cast<std::size_t>(g.index_of_k(static_cast<int>(k)));
  };
  auto flat_freq = [g, freq_index](const Vec& w) {
    std::size_t i = freq_index(w[0]);
    if (g.n == 2) i = i * g.N + freq_index(w[1]);
    return i;
  };

  const bool with_x = axes == 1;
  auto eval = [g, samples, flat_freq, with_x](const Vec& x, const Vec& xi,
                                              const Vec& eta) {
    const std::size_t M2 = g.size();
    std::size_t idx = flat_freq(xi) * M2 + flat_freq(eta);
    if (with_x) {
      long ix = std::lround(x[0] / g.h());
      ix = ((ix % g.N) + g.N) % g.N;
      idx += static_cast<std::size_t>(ix) * M2 * M2;
    }
    return (*samples)[idx];
  };
  return make_symbol(g.n, eval, std::nullopt, !with_x, std::nullopt,
                     "tabulated");
}

void write_symbol(const std::filesystem::path& path, const Symbol& s,
                  const Grid& grid, bool with_x) {
  write_file_atomic(path, encode_symbol(s, grid, with_x));
}

Symbol read_symbol(const std::filesystem::path& path, Grid* grid_out) {
  return decode_symbol(read_file_bytes(path), grid_out);
}

std::string report_to_json(const ProbeReport& rep) {
  json j;
  j["schema_version"] = 1;
  j["name"] = rep.name;
  j["inputs"] = rep.inputs;
  j["comparison"] = rep.comparison;
  j["params"] = json::object();
  for (const auto& [k, v] : rep.params) j["params"][k] = v;
  j["trials"] = json::array();
  for (const TrialRow& t : rep.trials)
    j["trials"].push_back({{"index", t.index},
                           {"label", t.label},
                           {"value", t.value},
                           {"used", t.used}});
  j["measured"] = rep.measured;
  j["target"] = rep.target;
  j["tolerance"] = rep.tolerance;
  j["pass"] = rep.pass;
  j["skipped"] = rep.skipped;
  return j.dump(2) + "\n";
}

ProbeReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw contract_error(std::string("report_from_json: ") + e.what());
  }
  require(j.is_object() && j.value("schema_version", 0) == 1,
          "report_from_json: unsupported schema version");
  ProbeReport rep;
  rep.name = j.at("name").get<std::string>();
  rep.inputs = j.at("inputs").get<std::string>();
  rep.comparison = j.at("comparison").get<std::string>();
  for (const auto& [k, v] : j.at("params").items())
    rep.params[k] = v.get<double>();
  for (const auto& t : j.at("trials")) {
    TrialRow row;
    row.index = t.at("index").get<int>();
    row.label = t.at("label").get<std::string>();
    row.value = t.at("value").get<double>();
    row.used = t.at("used").get<bool>();
    rep.trials.push_back(row);
  }
  rep.measured = j.at("measured").get<double>();
  rep.target = j.at("target").get<double>();
  rep.tolerance = j.at("tolerance").get<double>();
  rep.pass = j.at("pass").get<bool>();
  rep.skipped = j.at("skipped").get<int>();
  return rep;
}

namespace {

std::string round_trip_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_safe(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n') c = ';';
  return out;
}

}  // namespace

std::string trials_to_csv(const ProbeReport& rep) {
  std::string out = "index,label,value,used\n";
  for (const TrialRow& t : rep.trials) {
    out += std::to_string(t.index) + "," + csv_safe(t.label) + "," +
           round_trip_double(t.value) + "," + (t.used ? "1" : "0") + "\n";
  }
  return out;
}

std::string curve_to_csv(const std::string& xname, const std::string& yname,
                         const std::vector<std::pair<double, double>>& pts) {
  std::string out = csv_safe(xname) + "," + csv_safe(yname) + "\n";
  for (const auto& [x, y] : pts)
    out += round_trip_double(x) + "," + round_trip_double(y) + "\n";
  return out;
}

std::string svg_from_csv(const std::string& csv, int xcol, int ycol,
                         bool loglog, const std::string& title) {
  require(xcol >= 0 && ycol >= 0, "svg_from_csv: column indices");
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(csv);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {  // header
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    const int need = std::max(xcol, ycol);
    require(static_cast<int>(cells.size()) > need,
            "svg_from_csv: row has too few columns");
    double x = 0.0, y = 0.0;
    try {
      x = std::stod(cells[xcol]);
      y = std::stod(cells[ycol]);
    } catch (const std::exception&) {
      throw contract_error("svg_from_csv: non-numeric cell");
    }
    if (loglog) {
      require(x > 0.0 && y > 0.0,
              "svg_from_csv: log-log plot needs positive data");
      x = std::log10(x);
      y = std::log10(y);
    }
    pts.emplace_back(x, y);
  }
  require(!pts.empty(), "svg_from_csv: no data rows");

  double xmin = pts[0].first, xmax = xmin, ymin = pts[0].second, ymax = ymin;
  for (const auto& [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;

  const double W = 480, H = 360, ml = 56, mr = 16, mt = 28, mb = 40;
  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" "
       "height=\"360\" viewBox=\"0 0 480 360\">\n";
  s += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
  s += "<text x=\"240\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" +
       title + (loglog ? " (log-log)" : "") + "</text>\n";
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(H - mb) + "\" x2=\"" +
       num(W - mr) + "\" y2=\"" + num(H - mb) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) +
       "\" y2=\"" + num(H - mb) +
       "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + num(ml) + "\" y=\"" + num(H - mb + 16) +
       "\" font-size=\"11\">" + num(xmin) + "</text>\n";
  s += "<text x=\"" + num(W - mr) + "\" y=\"" + num(H - mb + 16) +
       "\" text-anchor=\"end\" font-size=\"11\">" + num(xmax) + "</text>\n";
  s += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(H - mb) +
       "\" text-anchor=\"end\" font-size=\"11\">" + num(ymin) + "</text>\n";
  s += "<text x=\"" + num(ml - 6) + "\" y=\"" + num(mt + 4) +
       "\" text-anchor=\"end\" font-size=\"11\">" + num(ymax) + "</text>\n";
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" "
       "points=\"";
  for (const auto& [x, y] : pts) s += num(px(x)) + "," + num(py(y)) + " ";
  s += "\"/>\n";
  for (const auto& [x, y] : pts)
    s += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
         "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  s += "</svg>\n";
  return s;
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const std::uint8_t* p = static_cast<const std::uint8_t*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const void* data,
                       std::size_t len) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "write_file_atomic: cannot open " + tmp.string());
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(len));
    require(out.good(), "write_file_atomic: short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  require(!ec, "write_file_atomic: rename failed for " + path.string());
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_file_bytes: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  require(!in.bad(), "read_file_bytes: read failed for " + path.string());
  return bytes;
}

ArtifactSession::ArtifactSession(std::filesystem::path dir)
    : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  require(!ec, "ArtifactSession: cannot create " + dir_.string());
}

void ArtifactSession::emit(const std::string& name, const void* data,
                           std::size_t len) {
  require(!finished_, "ArtifactSession: emit after finish");
  require(!name.empty() && name.find('/') == std::string::npos &&
              name.find('\\') == std::string::npos,
          "ArtifactSession: name must be a bare file name");
  require(name != "manifest.json",
          "ArtifactSession: manifest.json is written by finish()");
  write_file_atomic(dir_ / name, data, len);
  entries_[name] = {len, hex64(fnv1a64(data, len))};
}

void ArtifactSession::emit(const std::string& name, const std::string& text) {
  emit(name, text.data(), text.size());
}

void ArtifactSession::emit(const std::string& name,
                           const std::vector<std::uint8_t>& bytes) {
  emit(name, bytes.data(), bytes.size());
}

std::filesystem::path ArtifactSession::path_of(const std::string& name) const {
  return dir_ / name;
}

std::filesystem::path ArtifactSession::finish() {
  require(!finished_, "ArtifactSession: finish called twice");

  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::json meta;
  meta["schema_version"] = 1;
  meta["written_at"] = stamp;
  meta["files_written"] = entries_.size();
  emit("metadata.json", meta.dump(2) + "\n");

  finished_ = true;
  nlohmann::json man;
  man["schema_version"] = 1;
  man["files"] = nlohmann::json::object();
  for (const auto& [name, info] : entries_) {
    man["files"][name] = {{"bytes", info.first}, {"fnv1a64", info.second}};
  }
  const std::filesystem::path path = dir_ / "manifest.json";
  write_file_atomic(path, man.dump(2) + "\n");
  return path;
}

}  // namespace bpdo
