#pragma once
#include <string>

#include "relaysim/sim.hpp"

namespace relaysim {

// JSON round trip for run configurations. Durations are plain seconds in the
// file (keys carry an _s suffix) and microseconds in memory. Parsing throws
// std::invalid_argument naming the offending key; unknown keys are errors so
// typos cannot silently fall back to defaults.
SimConfig config_from_json(const std::string& text);
SimConfig load_config_file(const std::string& path);
std::string config_to_json(const SimConfig& cfg);

}  // namespace relaysim
