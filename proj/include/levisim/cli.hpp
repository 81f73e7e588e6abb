#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace levisim::cli {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration ('#' comments, strict keys, schema=1).
/// All values are kept as strings; typed access validates on demand.
struct RunConfig {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
};

/// Parses config text. Lines: blank, '# comment', or key=value.
RunConfig parse_config(const std::string& text);

/// Rejects unknown keys for the config's command and checks schema/command.
void validate_config(const RunConfig& config);

/// Fills in every default so the embedded header is a complete config.
RunConfig resolve_defaults(RunConfig config);

struct Preset {
  std::string name;
  std::string description;
  std::string text;
};

const std::vector<Preset>& presets();
std::optional<std::string> preset_text(const std::string& name);

/// A cell is either empty (missing value) or a double.
using Cell = std::optional<double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Locale-independent shortest-general formatting at fixed precision.
std::string format_double(double value, int precision);

void write_csv(std::ostream& os, const RunConfig& resolved, const Table& table,
               int precision);
void write_json(std::ostream& os, const RunConfig& resolved, const Table& table,
                int precision);

/// Extracts the '# key=value' header block of an emitted file back into
/// config text (the round-trip path).
std::string extract_embedded_config(const std::string& output_text);

/// Executes a resolved config and renders the output table.
Table run_table(const RunConfig& resolved);

/// Full CLI entry: parses argv, runs, writes output, maps errors to exit
/// codes (0 ok, 2 config, 3 numerical/stability).
int run_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace levisim::cli
