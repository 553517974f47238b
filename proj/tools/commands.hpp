#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace bfsens::app {

using Json = nlohmann::json;

inline constexpr const char* kSubcommands[] = {"curve", "surface", "mcmc-study", "bma", "gen-meta", "validate"};

// Command-line flags that override the config document.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::vector<std::string>> estimators;
  std::optional<std::string> strategy;
  bool force = false;
};

// Built-in defaults for a subcommand; every key a config may set is present.
Json default_config(const std::string& subcommand);

// Defaults, then the JSON file (keys must exist in the defaults), then flags.
Json resolve_config(const std::string& subcommand, const std::optional<std::filesystem::path>& file,
                    const Overrides& overrides);

// Runs a subcommand with a resolved config, writing artifacts under
// cfg["out"]. Returns the process exit code; errors are reported on `err`.
int run_subcommand(const std::string& subcommand, const Json& cfg, std::ostream& log, std::ostream& err);

}  // namespace bfsens::app
