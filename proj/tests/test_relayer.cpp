#include <algorithm>

#include "doctest.h"
#include "relaysim/chain.hpp"
#include "relaysim/coordinator.hpp"
#include "relaysim/relayer.hpp"

using namespace relaysim;

namespace {

const Address U{50}, O1{11}, O2{12}, V{99};

struct Fx {
    World w;
    TimeUs t{0};
    explicit Fx(CoordinatorParams p = {}) : w(make_world(p)) {}
    void fund(ChainId c, Address a, Tokens amt) { credit_genesis(w, c, a, amt); }
    const Block& mint(ChainId c) {
        t += 10;
        return mint_block(w, c, t);
    }
    Hash256 send(ChainId c, Address who, Payload p, Tokens price = 1) {
        t += 1;
        return submit_tx(w, c, who, std::move(p), price, t);
    }
    const TaskRecord& task(const Hash256& id) const { return w.a.coord.tasks.at(id); }
};

AgentConfig competitive(Address a) {
    AgentConfig cfg;
    cfg.name = "agent";
    cfg.address = a;
    cfg.scan_latency = 100'000;
    return cfg;
}

const DeliverTxCall& as_deliver(const Intent& i) { return std::get<DeliverTxCall>(i.payload); }

}  // namespace

TEST_CASE("profit estimate is fee minus both gas legs") {
    CostTable costs;
    CHECK(estimate_profit(30, costs, 1, 1) == 10);
    CHECK(estimate_profit(20, costs, 1, 1) == 0);
    CHECK(estimate_profit(30, costs, 2, 1) == 0);  // deliver overbid at 2
    CHECK(estimate_profit(5, costs, 1, 1) == -15);
}

TEST_CASE("competitive scan fires on every profitable open task") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    const Hash256 t1 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    const Hash256 t2 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    const Hash256 t3 = fx.send(ChainId::A, U, TransferCall{V, 50, 20, 50});  // fee == gas, no edge
    fx.mint(ChainId::A);

    AgentState st{competitive(O1), 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);

    REQUIRE(r.intents.size() == 2);
    for (const Intent& i : r.intents) {
        CHECK(i.chain == ChainId::B);
        CHECK(i.gas_price == 1);
        CHECK(as_deliver(i).attested_source_head == 1);
        CHECK(as_deliver(i).task != t3);
    }
    CHECK(st.deliver_attempted.contains(t1));
    CHECK(st.deliver_attempted.contains(t2));
    CHECK_FALSE(st.deliver_attempted.contains(t3));

    // Two candidates scanned, one latency charge each.
    CHECK(r.send_at == 1'000'000 + 200'000);
    CHECK(st.busy_until == r.send_at);

    // Mid-scan the agent is deaf; at the boundary it wakes.
    CHECK(step(fx.w, st, 1'100'000).intents.empty());
    StepResult again = step(fx.w, st, st.busy_until);
    CHECK(again.intents.empty());  // everything already attempted
    CHECK(again.send_at == st.busy_until);
}

TEST_CASE("idle cycles cost nothing and expired tasks are skipped") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.send(ChainId::A, U, TransferCall{V, 50, 30, 2});
    fx.mint(ChainId::A);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);  // dest height 2 == timeout, cannot land in time

    AgentState st{competitive(O1), 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);
    CHECK(r.intents.empty());
    CHECK(r.send_at == 1'000'000);
    CHECK(st.busy_until == 0);
}

TEST_CASE("subset-first rushes the oldest tasks up to its batch") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    const Hash256 t1 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    const Hash256 t2 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    const Hash256 t3 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::CompetitiveSubsetFirst;
    cfg.subset_batch = 2;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);

    REQUIRE(r.intents.size() == 2);
    CHECK(as_deliver(r.intents[0]).task == t1);  // older block first
    const Hash256 second = std::min(t2, t3);     // same block, id breaks the tie
    CHECK(as_deliver(r.intents[1]).task == second);
    CHECK(r.send_at == 1'000'000 + 200'000);
}

TEST_CASE("overbid pays the premium on deliveries only") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    const Hash256 rich = fx.send(ChainId::A, U, TransferCall{V, 50, 40, 50});
    fx.mint(ChainId::A);

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::CompetitiveOverbid;
    cfg.overbid_premium = 1;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);
    REQUIRE(r.intents.size() == 1);
    CHECK(r.intents[0].gas_price == 2);

    // The premium eats the margin a base-price agent would still have.
    fx.send(ChainId::A, U, TransferCall{V, 50, 21, 50});
    fx.mint(ChainId::A);
    AgentState st2{cfg, 0, false, {}, {}, {}, {}};
    StepResult r2 = step(fx.w, st2, 2'000'000);
    REQUIRE(r2.intents.size() == 1);
    CHECK(as_deliver(r2.intents[0]).task == rich);
}

TEST_CASE("coordinated agents touch assigned work only, thieves touch everything") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::A, O2, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.send(ChainId::A, O2, RegisterCall{2, 100});
    fx.mint(ChainId::A);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);

    REQUIRE(fx.task(id).assignees.size() == 1);
    const RelayerId winner = fx.task(id).assignees[0];
    const RelayerId loser = winner == 1 ? 2 : 1;

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::Coordinated;
    cfg.relayer_id = winner;
    AgentState assigned{cfg, 0, false, {}, {}, {}, {}};
    CHECK(step(fx.w, assigned, 1'000'000).intents.size() == 1);

    cfg.relayer_id = loser;
    AgentState other{cfg, 0, false, {}, {}, {}, {}};
    CHECK(step(fx.w, other, 1'000'000).intents.empty());

    AgentConfig thief = competitive(Address{66});
    thief.strategy = Strategy::TaskThief;
    AgentState th{thief, 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, th, 1'000'000);
    REQUIRE(r.intents.size() == 1);
    CHECK(as_deliver(r.intents[0]).task == id);
}

TEST_CASE("acknowledgements follow receipts and cost no scan time") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::B, O1, 100);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    fx.send(ChainId::B, O1, DeliverTxCall{id, 1});
    fx.mint(ChainId::B);
    REQUIRE(fx.task(id).phase == TaskPhase::Delivered);

    AgentState mine{competitive(O1), 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, mine, 1'000'000);
    REQUIRE(r.intents.size() == 1);
    CHECK(r.intents[0].chain == ChainId::A);
    const auto& prove = std::get<ProveDeliveryCall>(r.intents[0].payload);
    CHECK(prove.task == id);
    CHECK(prove.receipt == fx.w.b.coord.receipts.at(id).hash);
    CHECK(r.send_at == 1'000'000);  // proving is free
    CHECK(mine.prove_attempted.contains(id));

    // Someone else's receipt is not ours to acknowledge.
    AgentState rival{competitive(O2), 0, false, {}, {}, {}, {}};
    CHECK(step(fx.w, rival, 1'000'000).intents.empty());
}

TEST_CASE("an abandoner never lifts a finger") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    REQUIRE(fx.task(id).assignees == std::vector<RelayerId>{1});

    AgentConfig ab = competitive(O1);
    ab.strategy = Strategy::Abandoner;
    ab.relayer_id = 1;
    AgentState st{ab, 0, false, {}, {}, {}, {}};
    CHECK(step(fx.w, st, 1'000'000).intents.empty());
    CHECK(st.busy_until == 0);
}

TEST_CASE("coordinated assignee acknowledges even a stolen delivery") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::B, Address{66}, 100);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    fx.send(ChainId::B, Address{66}, DeliverTxCall{id, 2});
    fx.mint(ChainId::B);

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::Coordinated;
    cfg.relayer_id = 1;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    st.deliver_attempted.insert(id);
    StepResult r = step(fx.w, st, 1'000'000);
    REQUIRE(r.intents.size() == 1);
    CHECK(std::get<ProveDeliveryCall>(r.intents[0].payload).task == id);
}

TEST_CASE("timeout reporter files proof of absence once") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 2});
    fx.mint(ChainId::A);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);

    AgentConfig cfg = competitive(Address{77});
    cfg.strategy = Strategy::TimeoutReporter;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);
    REQUIRE(r.intents.size() == 1);
    CHECK(r.intents[0].chain == ChainId::A);
    const auto& rep = std::get<SubmitTimeoutCall>(r.intents[0].payload);
    CHECK(rep.task == id);
    CHECK(rep.attested_dest_head == 2);
    CHECK(r.send_at == 1'000'000);  // reporting is free too

    CHECK(step(fx.w, st, 2'000'000).intents.empty());
}

TEST_CASE("silent strategy withdraws at its deadline and goes dark") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);
    const Hash256 id = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    REQUIRE(fx.task(id).assignees == std::vector<RelayerId>{1});

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::SilentAfterWithdraw;
    cfg.relayer_id = 1;
    cfg.withdraw_at = 5'000'000;

    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    StepResult before = step(fx.w, st, 4'000'000);
    REQUIRE(before.intents.size() == 1);  // still doing the job
    CHECK(as_deliver(before.intents[0]).task == id);

    AgentState st2{cfg, 0, false, {}, {}, {}, {}};
    StepResult at = step(fx.w, st2, 5'000'000);
    REQUIRE(at.intents.size() == 1);
    CHECK(std::get<WithdrawCall>(at.intents[0].payload).relayer == 1);
    CHECK(st2.withdraw_sent);

    CHECK(step(fx.w, st2, 6'000'000).intents.empty());  // assigned task ignored now
}

TEST_CASE("allocator publishes exactly what the contract will recompute") {
    CoordinatorParams p;
    p.allocation = AllocationMode::Validated;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::A, O2, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.send(ChainId::A, O2, RegisterCall{2, 100});
    fx.mint(ChainId::A);
    const Hash256 t1 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    const Hash256 t2 = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);
    REQUIRE(fx.task(t1).assignees.empty());

    AgentConfig cfg = competitive(O1);
    cfg.strategy = Strategy::Coordinated;
    cfg.relayer_id = 1;
    cfg.allocator = true;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    StepResult r = step(fx.w, st, 1'000'000);

    REQUIRE(r.intents.size() == 1);
    const auto& call = std::get<AssignTasksCall>(r.intents[0].payload);
    CHECK(call.allocator == 1);
    REQUIRE(call.items.size() == 2);
    const auto eligible = eligible_view(fx.w.a.coord, fx.w.params);
    for (const auto& item : call.items) {
        auto expect = allocate(item.task, eligible, 1);
        REQUIRE(expect.ok());
        CHECK(item.assignees == expect.value());
    }
    CHECK(r.send_at == 1'000'000);  // publication is bookkeeping, not scanning

    CHECK(step(fx.w, st, 2'000'000).intents.empty());  // already published

    // The contract agrees with the published set.
    for (const auto& item : call.items)
        fx.send(ChainId::A, O1, AssignTasksCall{1, {item}});
    const Block& b = fx.mint(ChainId::A);
    CHECK_FALSE(b.txs[0].reverted);
    CHECK_FALSE(b.txs[1].reverted);
    CHECK(fx.task(t1).assignees.size() == 1);
    CHECK(fx.task(t2).assignees.size() == 1);
}

TEST_CASE("allocator stays quiet outside validated mode") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);
    fx.send(ChainId::A, U, TransferCall{V, 50, 30, 50});
    fx.mint(ChainId::A);

    AgentConfig cfg = competitive(O2);
    cfg.relayer_id = 2;
    cfg.allocator = true;
    AgentState st{cfg, 0, false, {}, {}, {}, {}};
    for (const Intent& i : step(fx.w, st, 1'000'000).intents)
        CHECK_FALSE(std::holds_alternative<AssignTasksCall>(i.payload));
}
