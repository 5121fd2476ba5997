#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "smdiff/analysis.hpp"
#include "smdiff/harness.hpp"

namespace smdiff {

/// "from-charpoly", "repeated:<x>" or "explicit:<r>,<r>,..." where each root
/// is "a", "a+bi" or "a-bi".
RootSpec parse_root_spec(std::string_view text);

struct CliConfig {
  RunConfig run;
  std::optional<std::string> preset;
  std::optional<std::string> trace_path;
  std::optional<std::string> metrics_path;
  double settle_fraction = 0.5;
  GridSpec grid;
};

/// Strict parse: unknown keys and wrong types are Config errors naming the
/// offending field path. With "preset", only "overrides" may adjust the run.
CliConfig parse_config(const nlohmann::json& doc);
/// Adds line/column information to JSON syntax errors.
CliConfig parse_config_text(std::string_view text);
CliConfig load_config(const std::string& path);

/// Fully resolved run configuration; parse_config accepts it back.
nlohmann::json to_json(const RunConfig& config);
nlohmann::json to_json(const GridSpec& grid);
nlohmann::json to_json(const RootSet& roots);

}  // namespace smdiff
