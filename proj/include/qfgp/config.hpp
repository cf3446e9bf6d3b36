#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfgp/simulation.hpp"
#include "qfgp/sweep.hpp"

namespace qfgp {

struct OutputConfig {
  std::filesystem::path directory = "qfgp-out";
  bool csv = true;
  bool json = false;
  /// Keep every stride-th trajectory sample in trajectory outputs.
  int stride = 1;
};

struct SweepSection {
  std::string name = "sweep";
  std::vector<SweepAxis> axes;
  std::size_t budget = 2000;
  /// Emit every cycle of every point, or only the last cycle.
  bool all_cycles = true;
};

/// A fully resolved run configuration. `defaulted` lists the dotted keys that
/// were not present in the document and took their default value.
struct RunConfig {
  SimulationConfig sim;
  OutputConfig output;
  std::optional<SweepSection> sweep;
  std::vector<std::string> defaulted;

  SweepSpec sweep_spec() const;
};

/// Default configuration: paper-metal preset, calibrated coupling.
RunConfig default_config();

/// Parses a JSON document. Syntax errors carry line and column; unknown keys
/// and violated constraints are reported with the dotted key.
RunConfig parse_config_text(std::string_view text, std::span<const std::string> overrides = {});
RunConfig parse_config_file(const std::filesystem::path& path,
                            std::span<const std::string> overrides = {});
/// `source` is inline JSON if it starts with '{', a file path otherwise.
RunConfig parse_config(std::string_view source, std::span<const std::string> overrides = {});

/// Parses text into a JSON object, throwing kind "syntax" with line/column.
nlohmann::json parse_document(std::string_view text);

/// Applies "section.key=value" to a document. The value is read as JSON when
/// it parses, as a bare string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Resolves a (possibly partial) document against the defaults.
RunConfig from_document(const nlohmann::json& doc);

/// Resolves `doc` on top of a complete base document (a preset's canonical
/// form) instead of the built-in defaults. `defaulted` lists the base keys
/// that `doc` left alone.
RunConfig from_document(const nlohmann::json& doc, const nlohmann::json& base);

/// Complete document with every key; reparsing it gives the same config.
nlohmann::json canonical_json(const RunConfig& cfg);
std::string canonical_text(const RunConfig& cfg);
/// Digest of the canonical document.
std::string config_digest(const RunConfig& cfg);

}  // namespace qfgp
