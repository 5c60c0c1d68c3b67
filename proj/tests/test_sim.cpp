#include <algorithm>
#include <set>
#include <string>

#include "doctest.h"
#include "relaysim/sim.hpp"

using namespace relaysim;

namespace {

AgentConfig relayer_agent(std::string name, Address addr, RelayerId id) {
    AgentConfig cfg;
    cfg.name = std::move(name);
    cfg.address = addr;
    cfg.relayer_id = id;
    cfg.funding_a = 400;
    cfg.funding_b = 400;
    return cfg;
}

SimConfig small_run() {
    SimConfig cfg;
    cfg.duration = 60 * kSecond;
    cfg.chain_a.block_interval = 5 * kSecond;
    cfg.chain_b.block_interval = 5 * kSecond;
    cfg.workload.constant.per_second = 0.2;
    cfg.workload.constant.stop = 40 * kSecond;
    cfg.agents.push_back(relayer_agent("r1", Address{11}, 1));
    return cfg;
}

int count_acked(const RunTrace& trace) {
    int n = 0;
    for (const auto& ev : trace.events) {
        const auto* life = std::get_if<TaskLifecycleEvent>(&ev.body);
        if (life && life->phase == TaskPhase::Acked) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("config validation names each offending field") {
    SimConfig cfg;
    CHECK(validate(cfg).empty());

    SUBCASE("duration must cover ten blocks of the slower chain") {
        cfg.chain_a.block_interval = 20 * kSecond;
        const std::string diag = validate(cfg);
        CHECK(diag.find("duration") != std::string::npos);
        CHECK(diag.find("10 blocks") != std::string::npos);
    }
    SUBCASE("delay bound must be positive") {
        cfg.network_delay_bound = 0;
        CHECK(validate(cfg).find("network_delay_bound") != std::string::npos);
    }
    SUBCASE("block intervals must be positive") {
        cfg.chain_b.block_interval = 0;
        CHECK(validate(cfg).find("chain_b.block_interval") != std::string::npos);
    }
    SUBCASE("slash shares cannot exceed the whole") {
        cfg.params.reporter_share = 0.7;
        cfg.params.user_refund_share = 0.4;
        CHECK(validate(cfg).find("reporter_share") != std::string::npos);
    }
    SUBCASE("agent names must be unique") {
        cfg.agents.push_back(relayer_agent("x", Address{11}, 1));
        cfg.agents.push_back(relayer_agent("x", Address{12}, 2));
        CHECK(validate(cfg).find("duplicate name x") != std::string::npos);
    }
    SUBCASE("agent addresses cannot collide with the workload user") {
        cfg.agents.push_back(relayer_agent("x", Address{900}, 1));
        CHECK(validate(cfg).find("address collides") != std::string::npos);
    }
    SUBCASE("registering agents must be able to afford the deposit") {
        AgentConfig a = relayer_agent("x", Address{11}, 1);
        a.funding_a = 50;
        cfg.agents.push_back(a);
        CHECK(validate(cfg).find("funding_a") != std::string::npos);
    }
    SUBCASE("several problems are reported together") {
        cfg.network_delay_bound = 0;
        cfg.workload.gas_price = 0;
        const std::string diag = validate(cfg);
        CHECK(diag.find("network_delay_bound") != std::string::npos);
        CHECK(diag.find("gas_price") != std::string::npos);
    }
    SUBCASE("the runner throws with the same diagnostics") {
        cfg.duration = 0;
        CHECK_THROWS_AS((void)run(cfg), std::invalid_argument);
    }
}

TEST_CASE("a constant rate of one transfer per five seconds yields twenty in a hundred") {
    WorkloadConfig w;
    w.constant.per_second = 0.2;
    const auto times = injection_times(w, 100 * kSecond);
    REQUIRE(times.size() == 20);
    CHECK(times.front() == 5 * kSecond);
    CHECK(times.back() == 100 * kSecond);
    for (std::size_t i = 0; i < times.size(); ++i) CHECK(times[i] == TimeUs(i + 1) * 5 * kSecond);

    SUBCASE("start and stop clip the stream") {
        w.constant.start = 20 * kSecond;
        w.constant.stop = 40 * kSecond;
        const auto clipped = injection_times(w, 100 * kSecond);
        REQUIRE(clipped.size() == 5);
        CHECK(clipped.front() == 20 * kSecond);
        CHECK(clipped.back() == 40 * kSecond);
    }
    SUBCASE("bursts add their full count at one instant") {
        w.bursts.push_back({7 * kSecond, 3});
        const auto merged = injection_times(w, 100 * kSecond);
        CHECK(merged.size() == 23);
        CHECK(std::count(merged.begin(), merged.end(), 7 * kSecond) == 3);
        CHECK(std::is_sorted(merged.begin(), merged.end()));
    }
}

TEST_CASE("workload injection emits transfers due at exactly the asked instant") {
    WorkloadConfig w;
    w.constant.per_second = 0.2;
    w.bursts.push_back({10 * kSecond, 2, 80, 40, 30});

    CHECK(inject_workload(w, 3, 5 * kSecond, 100 * kSecond).size() == 1);
    CHECK(inject_workload(w, 3, 6 * kSecond, 100 * kSecond).empty());

    const auto at_burst = inject_workload(w, 3, 10 * kSecond, 100 * kSecond);
    REQUIRE(at_burst.size() == 3);  // one from the stream, two from the burst
    CHECK(at_burst[0].fee == 30);
    CHECK(at_burst[1].fee == 40);
    CHECK(at_burst[1].amount == 80);
    CHECK(at_burst[1].timeout_height == 33);  // anchored to the current head
    CHECK(at_burst[0].timeout_height == 63);
}

TEST_CASE("the same configuration replays to the exact same trace") {
    const SimConfig cfg = small_run();
    const std::string first = to_ndjson(run(cfg));
    const std::string second = to_ndjson(run(cfg));
    CHECK(first == second);

    SimConfig reseeded = cfg;
    reseeded.seed = 2;
    CHECK(to_ndjson(run(reseeded)) != first);
}

TEST_CASE("an empty workload produces blocks and nothing else") {
    SimConfig cfg;
    cfg.duration = 30 * kSecond;
    cfg.chain_a.block_interval = 3 * kSecond;
    cfg.chain_b.block_interval = 2 * kSecond;
    RunResult res = run_world(cfg);

    CHECK(res.world.a.height == 10);
    CHECK(res.world.b.height == 15);
    CHECK(res.trace.meta.offered_rate == 0.0);
    CHECK(res.trace.meta.conservation_ok);
    for (const auto& ev : res.trace.events) {
        const auto* block = std::get_if<BlockEvent>(&ev.body);
        REQUIRE(block != nullptr);
        CHECK(block->txs.empty());
    }
}

TEST_CASE("a lone relayer carries transfers through to acknowledgement") {
    const SimConfig cfg = small_run();
    RunResult res = run_world(cfg);
    const RunTrace& trace = res.trace;

    CHECK(trace.meta.offered_rate == doctest::Approx(8.0 / 60.0));
    CHECK(trace.meta.conservation_ok);
    CHECK(count_acked(trace) == 8);

    int requested = 0;
    for (const auto& ev : trace.events) {
        const auto* life = std::get_if<TaskLifecycleEvent>(&ev.body);
        if (life && life->phase == TaskPhase::Requested) ++requested;
    }
    CHECK(requested == 8);

    // The relayer ends ahead: eight fees minus gas for eight deliveries,
    // eight acknowledgements and one registration.
    const Tokens net_a = res.world.a.balances.at(Address{11}) + 100 - 400;  // collateral locked
    const Tokens net_b = res.world.b.balances.at(Address{11}) - 400;
    CHECK(net_a + net_b == 8 * 30 - 8 * 10 - 8 * 10 - 10);
}

TEST_CASE("every event in a run sits inside the configured horizon") {
    const SimConfig cfg = small_run();
    const RunTrace trace = run(cfg);
    REQUIRE_FALSE(trace.events.empty());
    std::uint64_t last_seq = 0;
    TimeUs last_at = 0;
    for (const auto& ev : trace.events) {
        CHECK(ev.at <= cfg.duration);
        if (&ev != &trace.events.front()) {
            CHECK(ev.seq > last_seq);
            CHECK(ev.at >= last_at);
        }
        last_seq = ev.seq;
        last_at = ev.at;
    }
}

TEST_CASE("replaying the ledger stream lands on the recorded final balances") {
    SimConfig cfg = small_run();
    cfg.workload.constant.fee = 50;  // room for a premium bid, so the race is real
    cfg.agents.push_back(relayer_agent("r2", Address{12}, 2));
    cfg.agents[1].strategy = Strategy::CompetitiveOverbid;
    cfg.agents[1].overbid_premium = 1;
    const RunTrace trace = run(cfg);
    CHECK(balances_match(replay_balances(trace), trace.meta.final_balances));

    SUBCASE("the serialized trace replays identically") {
        const RunTrace back = trace_from_ndjson(to_ndjson(trace));
        CHECK(balances_match(replay_balances(back), back.meta.final_balances));
    }
}

TEST_CASE("fifo mempools ignore the bid but keep the run deterministic") {
    SimConfig cfg = small_run();
    cfg.fifo_mempool = true;
    cfg.agents.push_back(relayer_agent("r2", Address{12}, 2));
    cfg.agents[1].strategy = Strategy::CompetitiveOverbid;
    cfg.agents[1].overbid_premium = 3;
    const std::string first = to_ndjson(run(cfg));
    CHECK(first == to_ndjson(run(cfg)));
    CHECK(run(cfg).meta.conservation_ok);
}
