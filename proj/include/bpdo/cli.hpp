#pragma once
// Config-driven front end.  One JSON configuration document (nested
// key-value, versioned schema) drives every run; command-line flags override
// individual entries.  Each run writes its artifacts -- resolved config,
// probe reports, CSV curves, optional SVG plots, binary fields -- into one
// output directory through an ArtifactSession, so every file is hashed into
// a manifest and report bytes are reproducible for a fixed config and seed
// (timestamps live only in metadata.json).
//
// Commands:
//   apply    apply the configured symbol to a deterministic trial pair
//   kernel   kernel slice at a base point: values, decay envelope
//   norm     sampled weighted-derivative seminorm of the symbol
//   leibniz  two-piece splitting reconstruction check
//   scatter  trilinear evolution: gap decay to the limit symbol + ODE check
//   probe    one of: opnorm scaling decay dilation domination bmo
//                    cseminorm weights
//
// Exit codes: 0 every executed check passed; 1 some check failed (reports
// are still written); 2 configuration or usage error (single-line
// diagnostic, nothing written).

#include <string>
#include <vector>

namespace bpdo::cli {

// The embedded default configuration (JSON text).  It doubles as the
// schema: user configs may override any subset of these keys, and any key
// not present here is rejected.
const std::string& default_config();

struct RunResult {
  int exit_code = 0;        // 0 pass | 1 check failure | 2 config error
  std::string diagnostic;   // single line on exit 2; summary otherwise
  std::string output_dir;   // where artifacts were written ("" if none)
};

// Runs one command from argv-style arguments (program name excluded).
// Never throws; failures are reported through the exit code.
RunResult run(const std::vector<std::string>& args);

}  // namespace bpdo::cli
