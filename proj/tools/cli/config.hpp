#pragma once

// Run configuration read from a JSON document.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bifl/errors.hpp"
#include "bifl/fields.hpp"
#include "bifl/grid.hpp"
#include "bifl/solvers.hpp"
#include "bifl/sources.hpp"

namespace bifl::cli {

/// Malformed or invalid configuration; maps to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct OutputConfig {
  std::string dump;     ///< binary field dump
  std::string csv;      ///< radial profile
  std::string summary;  ///< JSON run summary
  std::string log;      ///< text log (appended to stderr output)
};

struct ProbeOptions {
  int n_starts = 8;
};

struct PerturbOptions {
  int order = 2;
};

struct RunConfig {
  GridSpec grid;
  ModelParams model;
  SourceSpec sources;
  SolveConfig solve;
  OutputConfig output;
  ProbeOptions probe;
  PerturbOptions perturb;
  /// The document with every default filled in; dump() is canonical.
  nlohmann::json canonical;
};

/// Parses and validates a configuration. Throws ConfigError with the line and
/// column of a syntax error, the path of an unknown key, or the name of the
/// field whose value is invalid.
RunConfig parse_config(std::string_view document);
RunConfig load_config(const std::string& path);

/// 64-bit FNV-1a of the canonical document, as 16 hex digits.
std::string config_digest(const RunConfig& cfg);
std::string fnv1a_hex(std::string_view text);

}  // namespace bifl::cli
