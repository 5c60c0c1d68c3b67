#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/sim.hpp"

namespace relaysim {

// Canned experiment setups exercising the protocol end to end. A scenario
// expands to one or more labelled runs; multi-run experiments (scaling
// ladders, paired contrasts) come back as several configs that the caller
// executes and compares.
struct PlannedRun {
    std::string label;
    SimConfig config;
};

struct ScenarioOptions {
    std::uint64_t seed{1};
    std::vector<int> relayer_counts{1, 2, 4, 8};
    AllocationMode allocation{AllocationMode::AtCreation};
};

const std::vector<std::string>& scenario_names();
Result<std::vector<PlannedRun>> scenario_plan(const std::string& name,
                                              const ScenarioOptions& opt);

SimConfig delivery_race_config(std::uint64_t seed);
SimConfig overbid_race_config(std::uint64_t seed);
SimConfig subset_sprint_config(std::uint64_t seed);
SimConfig scaling_config(int relayers, bool coordinated, AllocationMode mode,
                         std::uint64_t seed);
SimConfig fair_allocation_config(AllocationMode mode, std::uint64_t seed);
SimConfig slashing_config(AllocationMode mode, std::uint64_t seed);
SimConfig theft_config(AllocationMode mode, std::uint64_t seed);
SimConfig assignment_delay_config(AllocationMode mode, std::uint64_t seed);

}  // namespace relaysim
