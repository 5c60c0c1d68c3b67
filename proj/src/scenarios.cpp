#include "relaysim/scenarios.hpp"

namespace relaysim {

namespace {

AgentConfig agent(const std::string& name, Strategy strategy, std::uint64_t address,
                  Tokens funding_a, Tokens funding_b) {
    AgentConfig a;
    a.name = name;
    a.strategy = strategy;
    a.address = Address{address};
    a.funding_a = funding_a;
    a.funding_b = funding_b;
    return a;
}

}  // namespace

// Three competitive relayers race for three equal-fee tasks arriving in one
// burst. Every task gets one winner and two reverted duplicates.
SimConfig delivery_race_config(std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 12 * kSecond;
    cfg.workload.bursts.push_back({kSecond / 2, 3, 50, 40, 60});
    cfg.agents.push_back(agent("alice", Strategy::CompetitiveDefault, 11, 200, 200));
    cfg.agents.push_back(agent("bob", Strategy::CompetitiveDefault, 12, 200, 200));
    cfg.agents.push_back(agent("carol", Strategy::CompetitiveDefault, 13, 200, 200));
    return cfg;
}

// Same race with a fourth relayer paying a gas premium on deliveries. It
// front-runs every task and keeps a thinner margin.
SimConfig overbid_race_config(std::uint64_t seed) {
    SimConfig cfg = delivery_race_config(seed);
    AgentConfig dave = agent("dave", Strategy::CompetitiveOverbid, 14, 200, 200);
    dave.overbid_premium = 1;
    cfg.agents.push_back(dave);
    return cfg;
}

// Fast destination blocks. A relayer that stops scanning after two candidates
// broadcasts earlier and lands them a block ahead of the full scanners.
SimConfig subset_sprint_config(std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 15 * kSecond;
    cfg.network_delay_bound = 100'000;
    cfg.chain_b.block_interval = kSecond / 2;
    cfg.workload.bursts.push_back({9 * kSecond + kSecond / 2, 3, 50, 40, 60});
    AgentConfig sprinter = agent("sprinter", Strategy::CompetitiveSubsetFirst, 21, 200, 200);
    sprinter.subset_batch = 2;
    sprinter.scan_latency = 200'000;
    AgentConfig scan1 = agent("scan1", Strategy::CompetitiveDefault, 22, 200, 200);
    scan1.scan_latency = 200'000;
    AgentConfig scan2 = agent("scan2", Strategy::CompetitiveDefault, 23, 200, 200);
    scan2.scan_latency = 200'000;
    cfg.agents.push_back(sprinter);
    cfg.agents.push_back(scan1);
    cfg.agents.push_back(scan2);
    return cfg;
}

// Saturating workload against a ladder of relayer counts. Coordinated runs
// split the stream by assignment; the competitive baseline has everyone chase
// the same oldest tasks.
SimConfig scaling_config(int relayers, bool coordinated, AllocationMode mode,
                         std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 60 * kSecond;
    cfg.params.allocation = coordinated ? mode : AllocationMode::Competitive;
    cfg.workload.constant.per_second = 100.0;
    cfg.workload.constant.amount = 50;
    cfg.workload.constant.fee = 30;
    cfg.workload.constant.timeout_blocks = 600;
    for (int i = 1; i <= relayers; ++i) {
        AgentConfig a = agent("r" + std::to_string(i),
                              coordinated ? Strategy::Coordinated
                                          : Strategy::CompetitiveDefault,
                              100 + static_cast<std::uint64_t>(i), 10'000, 10'000);
        a.scan_latency = 50'000;
        if (coordinated) {
            a.relayer_id = i;
            if (i == 1) a.allocator = true;  // only consulted under validated allocation
        }
        cfg.agents.push_back(a);
    }
    return cfg;
}

// 10,000 tasks allocated over four registered relayers. Fees sit below gas so
// nobody acts; the run only exercises the allocation itself. Amount jitter
// keeps task ids distinct across seeds.
SimConfig fair_allocation_config(AllocationMode mode, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 100 * kSecond;
    cfg.params.allocation = mode;
    cfg.workload.constant.per_second = 100.0;
    cfg.workload.constant.amount = 50;
    cfg.workload.constant.fee = 5;
    cfg.workload.constant.timeout_blocks = 100'000;
    cfg.workload.amount_jitter = 1000;
    for (int i = 1; i <= 4; ++i) {
        AgentConfig a = agent("r" + std::to_string(i), Strategy::Coordinated,
                              30 + static_cast<std::uint64_t>(i), 200, 0);
        a.relayer_id = i;
        if (i == 1) a.allocator = true;
        cfg.agents.push_back(a);
    }
    return cfg;
}

// One diligent relayer, one that accepts assignments and never delivers, one
// that withdraws mid-run and orphans its tail. Two reporters race to file the
// resulting timeouts.
SimConfig slashing_config(AllocationMode mode, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 40 * kSecond;
    cfg.params.allocation = mode;
    cfg.params.collateral_required = 400;
    cfg.workload.constant.per_second = 2.0;
    cfg.workload.constant.stop = 20 * kSecond;
    cfg.workload.constant.amount = 50;
    cfg.workload.constant.fee = 30;
    cfg.workload.constant.timeout_blocks = 15;
    cfg.workload.bursts.push_back({9 * kSecond + kSecond / 2, 6, 50, 30, 15});
    AgentConfig good = agent("good", Strategy::Coordinated, 41, 500, 500);
    good.relayer_id = 1;
    good.allocator = true;
    AgentConfig abandoner = agent("abandoner", Strategy::Abandoner, 42, 500, 0);
    abandoner.relayer_id = 2;
    AgentConfig silent = agent("silent", Strategy::SilentAfterWithdraw, 43, 500, 500);
    silent.relayer_id = 3;
    silent.withdraw_at = 10 * kSecond;
    cfg.agents.push_back(good);
    cfg.agents.push_back(abandoner);
    cfg.agents.push_back(silent);
    cfg.agents.push_back(agent("rep1", Strategy::TimeoutReporter, 45, 500, 0));
    cfg.agents.push_back(agent("rep2", Strategy::TimeoutReporter, 46, 500, 0));
    return cfg;
}

// An unregistered relayer with a faster scanner front-runs every delivery the
// assignee would have made, and even proves them, yet the fee still lands
// with the assignee.
SimConfig theft_config(AllocationMode mode, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 30 * kSecond;
    cfg.params.allocation = mode;
    cfg.workload.constant.per_second = 1.0;
    cfg.workload.constant.stop = 15 * kSecond;
    cfg.workload.constant.amount = 50;
    cfg.workload.constant.fee = 30;
    cfg.workload.constant.timeout_blocks = 60;
    AgentConfig good = agent("good", Strategy::Coordinated, 41, 500, 500);
    good.relayer_id = 1;
    good.allocator = true;
    AgentConfig thief = agent("thief", Strategy::TaskThief, 47, 500, 500);
    thief.scan_latency = 20'000;
    cfg.agents.push_back(good);
    cfg.agents.push_back(thief);
    return cfg;
}

// Slow 10 s blocks on both chains. Under validated allocation the published
// assignment can only land a block after the request; at-creation assignment
// happens inside the same block.
SimConfig assignment_delay_config(AllocationMode mode, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.duration = 120 * kSecond;
    cfg.chain_a.block_interval = 10 * kSecond;
    cfg.chain_b.block_interval = 10 * kSecond;
    cfg.params.allocation = mode;
    cfg.workload.constant.per_second = 0.2;
    cfg.workload.constant.stop = 80 * kSecond;
    cfg.workload.constant.amount = 50;
    cfg.workload.constant.fee = 30;
    cfg.workload.constant.timeout_blocks = 30;
    AgentConfig alloc = agent("alloc", Strategy::Coordinated, 61, 2000, 2000);
    alloc.relayer_id = 1;
    alloc.allocator = true;
    AgentConfig r2 = agent("r2", Strategy::Coordinated, 62, 2000, 2000);
    r2.relayer_id = 2;
    cfg.agents.push_back(alloc);
    cfg.agents.push_back(r2);
    return cfg;
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{
        "scenario1",      "scenario2",      "scenario3",      "scalability",
        "fairness",       "accountability", "approach2-delay"};
    return names;
}

Result<std::vector<PlannedRun>> scenario_plan(const std::string& name,
                                              const ScenarioOptions& opt) {
    std::vector<PlannedRun> plan;
    if (name == "scenario1") {
        plan.push_back({"race", delivery_race_config(opt.seed)});
    } else if (name == "scenario2") {
        plan.push_back({"overbid", overbid_race_config(opt.seed)});
    } else if (name == "scenario3") {
        plan.push_back({"sprint", subset_sprint_config(opt.seed)});
    } else if (name == "scalability") {
        for (int n : opt.relayer_counts) {
            if (n < 1) return Err::ConfigError;
            plan.push_back({"coordinated-n" + std::to_string(n),
                            scaling_config(n, true, opt.allocation, opt.seed)});
        }
        for (int n : opt.relayer_counts)
            plan.push_back({"baseline-n" + std::to_string(n),
                            scaling_config(n, false, opt.allocation, opt.seed)});
    } else if (name == "fairness") {
        plan.push_back({"m4", fair_allocation_config(opt.allocation, opt.seed)});
    } else if (name == "accountability") {
        plan.push_back({"slashing", slashing_config(opt.allocation, opt.seed)});
        plan.push_back({"theft", theft_config(opt.allocation, opt.seed)});
    } else if (name == "approach2-delay") {
        plan.push_back(
            {"validated", assignment_delay_config(AllocationMode::Validated, opt.seed)});
        plan.push_back(
            {"at-creation", assignment_delay_config(AllocationMode::AtCreation, opt.seed)});
    } else {
        return Err::ConfigError;
    }
    return plan;
}

}  // namespace relaysim
