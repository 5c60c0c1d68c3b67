#pragma once
#include <string>
#include <vector>

#include "relaysim/chain.hpp"
#include "relaysim/relayer.hpp"
#include "relaysim/trace.hpp"

namespace relaysim {

struct GenesisEntry {
    Address address;
    Tokens amount{0};
};

struct ChainConfig {
    TimeUs block_interval{kSecond};
    std::vector<GenesisEntry> genesis;
};

struct BurstSpec {
    TimeUs at{0};
    int count{0};
    Tokens amount{50};
    Tokens fee{30};
    Height timeout_blocks{60};
};

struct ConstantRate {
    double per_second{0};  // zero disables the stream
    TimeUs start{0};       // zero: first transfer lands one interval in
    TimeUs stop{0};        // zero: runs to the end
    Tokens amount{50};
    Tokens fee{30};
    Height timeout_blocks{60};
};

struct WorkloadConfig {
    Address user{900};
    Tokens funding{0};  // zero: computed so every configured transfer can pay
    Tokens gas_price{1};
    Tokens amount_jitter{0};  // adds a seeded draw from [0, jitter] per transfer
    ConstantRate constant;
    std::vector<BurstSpec> bursts;
};

struct SimConfig {
    std::uint64_t seed{1};
    TimeUs duration{120 * kSecond};
    TimeUs network_delay_bound{50'000};  // uniform in (0, bound] per message
    bool fifo_mempool{false};
    ChainConfig chain_a;
    ChainConfig chain_b;
    CoordinatorParams params;
    CostTable costs;
    WorkloadConfig workload;
    std::vector<AgentConfig> agents;
};

// Field-level diagnostics; empty string means the config is usable.
std::string validate(const SimConfig& cfg);

// All times at which user transfers are due, ascending, duplicates preserved.
std::vector<TimeUs> injection_times(const WorkloadConfig& w, TimeUs duration);

// The transfers due at exactly `now`, with timeouts anchored to the current
// destination height.
std::vector<TransferCall> inject_workload(const WorkloadConfig& w, Height dest_height, TimeUs now,
                                          TimeUs duration);

struct RunResult {
    World world;
    RunTrace trace;
};

// Executes the event loop to `duration`. Throws std::invalid_argument with
// the validation diagnostics when the config does not validate.
RunResult run_world(const SimConfig& cfg);
RunTrace run(const SimConfig& cfg);

}  // namespace relaysim
