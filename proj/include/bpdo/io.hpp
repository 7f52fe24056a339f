#pragma once
// Serialization and artifact emission: binary field and tabulated-symbol
// containers, JSON probe reports, CSV curves, minimal SVG plots derived from
// the CSV text, FNV-1a content hashes, atomic file writes, and an output
// session that records every emitted file into a manifest.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "bpdo/grid.hpp"
#include "bpdo/probes.hpp"
#include "bpdo/symbol.hpp"

namespace bpdo {

// ---- binary field container ---------------------------------------------
// Layout: "BFLD" | u32 version=1 | u32 n | u32 N per axis | f64 L per axis |
// u8 representation (0 spatial, 1 spectral) | N^n samples as interleaved
// little-endian f64 pairs (re, im), row-major.  All integers little-endian.
std::vector<std::uint8_t> encode_field(const ComplexField& f);
ComplexField decode_field(const std::vector<std::uint8_t>& bytes);
void write_field(const std::filesystem::path& path, const ComplexField& f);
ComplexField read_field(const std::filesystem::path& path);

// ---- tabulated symbol container -----------------------------------------
// Same tensor conventions with magic "BSYM" and an axes flag after the grid
// header: 0 = samples over (xi, eta) for an x-independent symbol (size
// grid.size()^2, row-major in the flattened xi index then eta index);
// 1 = samples over (x, xi, eta), restricted to n = 1 (size N^3).
// Decoding yields a Symbol whose evaluator snaps each query to the nearest
// lattice point (exact on lattice queries, which is all the apply and
// kernel paths use) and clamps frequencies beyond the lattice edge.
std::vector<std::uint8_t> encode_symbol(const Symbol& s, const Grid& grid,
                                        bool with_x);
Symbol decode_symbol(const std::vector<std::uint8_t>& bytes,
                     Grid* grid_out = nullptr);
void write_symbol(const std::filesystem::path& path, const Symbol& s,
                  const Grid& grid, bool with_x);
Symbol read_symbol(const std::filesystem::path& path,
                   Grid* grid_out = nullptr);

// ---- probe report JSON ----------------------------------------------------
// Versioned schema (schema_version = 1) carrying every ProbeReport field;
// serialization is key-sorted and round-trips all doubles exactly, so equal
// reports produce byte-identical text.
std::string report_to_json(const ProbeReport& rep);
ProbeReport report_from_json(const std::string& text);

// ---- CSV curves ------------------------------------------------------------
// Trials table: header "index,label,value,used".  Curve: header
// "<xname>,<yname>".  Values are printed with round-trip precision.
std::string trials_to_csv(const ProbeReport& rep);
std::string curve_to_csv(const std::string& xname, const std::string& yname,
                         const std::vector<std::pair<double, double>>& pts);

// ---- SVG plot ---------------------------------------------------------------
// A small scatter/line plot generated from CSV text alone (a view of the
// CSV, never of extra data).  Columns are selected by index; loglog maps
// both axes through log10 and requires positive data there.
std::string svg_from_csv(const std::string& csv, int xcol, int ycol,
                         bool loglog, const std::string& title);

// ---- hashing and atomic writes ----------------------------------------------
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string hex64(std::uint64_t v);

// Writes to "<path>.tmp" then renames, so readers never observe a partial
// file.
void write_file_atomic(const std::filesystem::path& path, const void* data,
                       std::size_t len);
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& text);
void write_file_atomic(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// ---- output session ------------------------------------------------------
// Collects emitted files under one directory.  finish() writes
// metadata.json (wall-clock timestamp, kept out of every other file so that
// reports stay byte-reproducible) and manifest.json (size and FNV-1a hash
// of every emitted file, metadata.json included; the manifest does not list
// itself).
class ArtifactSession {
 public:
  explicit ArtifactSession(std::filesystem::path dir);

  void emit(const std::string& name, const void* data, std::size_t len);
  void emit(const std::string& name, const std::string& text);
  void emit(const std::string& name, const std::vector<std::uint8_t>& bytes);

  std::filesystem::path path_of(const std::string& name) const;
  const std::map<std::string, std::pair<std::uint64_t, std::string>>&
  entries() const {
    return entries_;  // name -> (bytes, hash hex)
  }

  std::filesystem::path finish();

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::pair<std::uint64_t, std::string>> entries_;
  bool finished_ = false;
};

}  // namespace bpdo
