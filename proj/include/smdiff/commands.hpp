#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "smdiff/config.hpp"
#include "smdiff/error.hpp"

namespace smdiff {

// Command bodies behind the smdiff tool. Each returns the process exit code:
// 0 success, 1 configuration error, 2 numerical failure.

int exit_code_for(const Error& e);

/// Parses SMDIFF_SEED; nullopt when unset, Config error when malformed.
std::optional<std::uint64_t> seed_from_env();

struct RunOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  PresetOverrides overrides;
  std::optional<std::uint64_t> env_seed;  // used only when overrides.seed is unset
  std::optional<std::string> trace_path;  // "-" or unset: stdout
  std::optional<std::string> metrics_path;
  std::optional<double> settle_fraction;
};

struct RootsOptions {
  std::vector<double> lambda;
  double lipschitz = 1.0;
  int m = 0;
};

struct GainsOptions {
  int n = 0;
  int n_f = 1;
  double tau = 0.01;
  std::string d;  // comma-separated roots, same syntax as explicit:<list>
};

struct CertifyOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> preset;
  PresetOverrides overrides;
  // Explicit parameters when neither a config nor a preset is given.
  std::optional<int> n;
  std::optional<int> n_f;
  std::optional<std::vector<double>> lambda;
  std::optional<double> lipschitz;
  std::optional<double> w1_min;
  std::optional<double> w1_max;
  std::optional<int> points;
  std::optional<double> w1;  // single-point shortcut
  bool serial = false;
};

/// Resolved run configuration for `run` (config file or preset, then flags).
CliConfig resolve_run(const RunOptions& options);

/// Trace CSV, metrics JSON. Metrics embed the resolved configuration.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_roots(const RootsOptions& options, std::ostream& out, std::ostream& err);
int cmd_gains(const GainsOptions& options, std::ostream& out, std::ostream& err);
int cmd_certify(const CertifyOptions& options, std::ostream& out, std::ostream& err);

/// Metrics document for a finished run.
nlohmann::json run_metrics(const CliConfig& config, const std::vector<StepRecord>& records);

}  // namespace smdiff
