#pragma once
#include <set>
#include <string>
#include <vector>

#include "relaysim/chain.hpp"

namespace relaysim {

// CompetitiveDefault   scans every open task and races for the delivery
// CompetitiveOverbid   same, but bids a gas premium on deliveries
// CompetitiveSubsetFirst  rushes the first few tasks instead of scanning all
// Coordinated          only works tasks the allocation rule hands to it
// TaskThief            unregistered, grabs deliveries it was never assigned
// Abandoner            registers, accepts assignments, never lifts a finger
// SilentAfterWithdraw  coordinated until a deadline, then withdraws and stops
// TimeoutReporter      watches for expired tasks and files the proofs
enum class Strategy : std::uint8_t {
    CompetitiveDefault,
    CompetitiveOverbid,
    CompetitiveSubsetFirst,
    Coordinated,
    TaskThief,
    Abandoner,
    SilentAfterWithdraw,
    TimeoutReporter,
};
const char* strategy_name(Strategy s);
Result<Strategy> strategy_from_name(const std::string& s);

struct AgentConfig {
    std::string name;
    Strategy strategy{Strategy::CompetitiveDefault};
    Address address;
    RelayerId relayer_id{-1};  // negative: never registers
    Tokens gas_price{1};
    Tokens overbid_premium{0};
    int subset_batch{2};
    TimeUs withdraw_at{0};
    TimeUs scan_latency{100'000};
    int max_tasks_per_cycle{10};
    TimeUs tick_interval{kSecond};
    bool allocator{false};  // publishes assignments under validated allocation
    Tokens funding_a{0};
    Tokens funding_b{0};
};

struct Intent {
    ChainId chain;
    Payload payload;
    Tokens gas_price;
};

struct AgentState {
    AgentConfig cfg;
    TimeUs busy_until{0};
    bool withdraw_sent{false};
    std::set<Hash256> deliver_attempted;
    std::set<Hash256> prove_attempted;
    std::set<Hash256> report_attempted;
    std::set<Hash256> publish_attempted;
};

struct StepResult {
    std::vector<Intent> intents;
    TimeUs send_at{0};  // cycle end; submissions leave the agent at this time
};

// Net outcome of relaying one task at the quoted prices, before any race is
// lost: the fee minus gas for the delivery and its acknowledgement.
Tokens estimate_profit(Tokens fee, const CostTable& costs, Tokens deliver_price,
                       Tokens prove_price);

// One scheduler tick. The agent reads committed chain state only; reading
// costs nothing, evaluating delivery candidates costs scan latency each, and
// everything it decides to do is sent out together when the cycle ends.
StepResult step(const World& w, AgentState& st, TimeUs now);

}  // namespace relaysim
