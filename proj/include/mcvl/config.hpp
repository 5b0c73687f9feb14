#pragma once
// Text configuration files: localizer parameters (key = value lines) and
// scenario descriptions for the simulator. Writers emit a canonical form so
// write -> read -> write is byte-identical.

#include "mcvl/filter.hpp"
#include "mcvl/simworld.hpp"

#include <filesystem>
#include <string>

namespace mcvl::config {

struct LocalizerConfig {
  filter::FilterConfig filter;
  std::uint64_t seed = 1;
};

LocalizerConfig parse_localizer_config(const std::filesystem::path& path);
void write_localizer_config(const std::filesystem::path& path,
                            const LocalizerConfig& cfg);

simworld::ScenarioConfig parse_scenario(const std::filesystem::path& path);
void write_scenario(const std::filesystem::path& path,
                    const simworld::ScenarioConfig& cfg);

// Per-sequence manifest: name, image count, condition, traversal distance.
std::string scenario_manifest(const simworld::Scenario& sc);

}  // namespace mcvl::config
