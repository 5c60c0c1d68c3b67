#pragma once
#include <map>
#include <string>
#include <vector>

#include "relaysim/trace.hpp"

namespace relaysim {

struct LatencyStats {
    int count{0};
    double min_s{0};
    double median_s{0};
    double p95_s{0};
    double max_s{0};
};

// Profit-and-loss sheet for one roster agent. `net` counts income earned and
// costs paid during the run; locked collateral is neither (it comes back),
// but slashes are gone for good.
struct RelayerMetrics {
    Address address;
    RelayerId relayer_id{-1};
    std::string strategy;
    Tokens rewards{0};          // fee income from acknowledged tasks
    Tokens reporter_income{0};  // share of slashes for filed timeout proofs
    Tokens allocator_income{0};
    Tokens gas_spent{0};
    Tokens slashed{0};
    Tokens net{0};
    int deliveries{0};  // receipt submissions that landed
    int acked_deliveries{0};
    int reverted{0};  // submissions of any kind that reverted
};

struct MetricsReport {
    double duration_s{0};
    double offered_rate{0};
    int coordinated_relayers{0};
    int requested{0};
    int delivered{0};
    int acked{0};
    int timed_out{0};
    double throughput{0};  // acknowledged tasks per second
    LatencyStats latency;  // request submission to acknowledgement
    std::map<std::string, RelayerMetrics> per_relayer;  // keyed by roster name
    int duplicate_reverts{0};
    std::map<RelayerId, long long> allocation_histogram;
    int assignments{0};
    double assignment_delay_min_s{0};  // request inclusion to assignment publication
    double assignment_delay_max_s{0};
    double delivery_share_top1{0};  // acked share of the most active deliverer
    Tokens fees_released{0};
    Tokens rewards_unattributed{0};  // fee income paid outside the roster
    Tokens miner_income{0};
    Tokens burned{0};
    Tokens refunds{0};  // principal and fee returned on timeouts
    Tokens slashed_total{0};
    bool conservation_ok{true};
    bool replay_matches{true};  // ledger replay reproduces the final balances
};

// Pure function of the trace; identical traces yield identical reports.
Result<MetricsReport> compute(const RunTrace& trace);

// Verdict over runs that differ only in coordinated relayer count, ordered by
// that count: throughput must rise strictly at every step until the workload
// is exhausted and may stay flat only after.
Result<bool> compare_scalability(const std::vector<MetricsReport>& reports);

// Upper-tail p-value of the chi-square statistic against a uniform split.
double chi_square_uniform_p(const std::vector<long long>& counts);

std::string metrics_to_json(const MetricsReport& r);
std::string metrics_to_csv(const MetricsReport& r);

}  // namespace relaysim
