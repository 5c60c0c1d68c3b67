#include <string>

#include "doctest.h"
#include "relaysim/chain.hpp"
#include "relaysim/coordinator.hpp"
#include "relaysim/sha256.hpp"

using namespace relaysim;

namespace {

const Address U{50}, V{99}, O1{11}, O2{12}, O3{13}, THIEF{66}, REP{77};

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
    Tokens balA(Address a) const { return w.a.balances.count(a) ? w.a.balances.at(a) : 0; }
    Tokens balB(Address a) const { return w.b.balances.count(a) ? w.b.balances.at(a) : 0; }
    const TaskRecord& task(const Hash256& id) const { return w.a.coord.tasks.at(id); }
};

Fx registered_three(CoordinatorParams p) {
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    for (Address o : {O1, O2, O3}) fx.fund(ChainId::A, o, 200);
    fx.fund(ChainId::A, THIEF, 100);
    fx.fund(ChainId::B, THIEF, 100);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.send(ChainId::A, O2, RegisterCall{2, 100});
    fx.send(ChainId::A, O3, RegisterCall{3, 100});
    fx.mint(ChainId::A);
    return fx;
}

}  // namespace

TEST_CASE("registration locks collateral and rejects bad inputs") {
    Fx fx;
    fx.fund(ChainId::A, O1, 150);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    const Block& b1 = fx.mint(ChainId::A);
    CHECK_FALSE(b1.txs[0].reverted);
    CHECK(fx.balA(O1) == 40);  // 150 - 10 gas - 100 collateral
    CHECK(fx.w.a.coord.relayers.at(1).collateral == 100);
    CHECK(fx.w.a.coord.relayers.at(1).owner == O1);

    fx.send(ChainId::A, O1, RegisterCall{1, 100});   // id taken
    fx.send(ChainId::A, O1, RegisterCall{4, 50});    // below required
    fx.send(ChainId::A, O1, RegisterCall{5, 100});   // cannot afford
    const Block& b2 = fx.mint(ChainId::A);
    CHECK(b2.txs[0].reason == Err::AlreadyRegistered);
    CHECK(b2.txs[1].reason == Err::InsufficientCollateral);
    CHECK(b2.txs[2].reason == Err::InsufficientBalance);
    CHECK(fx.balA(O1) == 10);  // three more gas charges
    CHECK(check_conservation(fx.w.a));
}

TEST_CASE("request, delivery and acknowledgement move value exactly once") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 100);
    fx.fund(ChainId::B, O1, 100);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 5});
    fx.mint(ChainId::A);
    CHECK(fx.balA(U) == 900);
    CHECK(fx.w.a.coord.fee_escrow == 30);
    CHECK(fx.w.a.coord.principal_escrow == 50);
    CHECK(fx.task(task).phase == TaskPhase::Requested);
    CHECK(fx.task(task).request_height == 1);

    fx.mint(ChainId::B);
    fx.send(ChainId::B, O1, DeliverTxCall{task, 1});
    const Block& bd = fx.mint(ChainId::B);
    CHECK_FALSE(bd.txs[0].reverted);
    CHECK(fx.balB(O1) == 90);
    CHECK(fx.balB(V) == 50);
    CHECK(fx.w.b.minted == 50);
    CHECK(fx.task(task).phase == TaskPhase::Delivered);

    fx.send(ChainId::A, O1, ProveDeliveryCall{task, receipt_hash(task, O1, 2), 2});
    const Block& bp = fx.mint(ChainId::A);
    CHECK_FALSE(bp.txs[0].reverted);
    CHECK(fx.balA(O1) == 120);  // fee 30 minus 10 gas
    CHECK(fx.w.a.coord.fee_escrow == 0);
    CHECK(fx.w.a.coord.principal_escrow == 0);
    CHECK(fx.w.a.burned == 50);
    CHECK(fx.task(task).phase == TaskPhase::Acked);
    CHECK(check_conservation(fx.w.a));
    CHECK(check_conservation(fx.w.b));

    // wrong receipt hash cannot acknowledge
    fx.send(ChainId::A, O1, ProveDeliveryCall{task, Sha256::digest(std::string("x")), 2});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::AlreadyAcked);
}

TEST_CASE("late or repeated deliveries revert") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::B, O1, 100);
    fx.fund(ChainId::B, THIEF, 100);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 5});
    fx.mint(ChainId::A);
    fx.send(ChainId::B, O1, DeliverTxCall{task, 1});
    fx.mint(ChainId::B);

    fx.send(ChainId::B, THIEF, DeliverTxCall{task, 1});
    const Block& b = fx.mint(ChainId::B);
    CHECK(b.txs[0].reverted);
    CHECK(b.txs[0].reason == Err::DuplicateDelivery);
    CHECK(fx.balB(THIEF) == 90);  // gas still burned on the failed grab
    CHECK(fx.balB(V) == 50);
}

TEST_CASE("absence past the timeout refunds the user") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, REP, 100);
    fx.fund(ChainId::B, THIEF, 100);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 2});
    fx.mint(ChainId::A);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);  // height 3, strictly past the timeout

    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 3});
    const Block& br = fx.mint(ChainId::A);
    CHECK_FALSE(br.txs[0].reverted);
    CHECK(fx.balA(REP) == 85);  // gas only, nothing was slashed
    CHECK(fx.balA(U) == 980);   // full principal + fee back, minus request gas
    CHECK(fx.w.a.coord.fee_escrow == 0);
    CHECK(fx.w.a.coord.principal_escrow == 0);
    CHECK(fx.task(task).phase == TaskPhase::TimedOut);

    fx.send(ChainId::B, THIEF, DeliverTxCall{task, 1});
    CHECK(fx.mint(ChainId::B).txs[0].reason == Err::TaskTimedOut);

    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 3});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::AlreadyResolved);
    CHECK(check_conservation(fx.w.a));
}

TEST_CASE("timeout cannot fire early or against an existing receipt") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, REP, 100);
    fx.fund(ChainId::B, O1, 100);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 3});
    fx.mint(ChainId::A);
    fx.mint(ChainId::B);

    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 1});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::NotTimedOut);

    fx.send(ChainId::B, O1, DeliverTxCall{task, 1});
    fx.mint(ChainId::B);  // delivered at height 2 <= 3
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);  // height 4

    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 4});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::InvalidProof);
}

TEST_CASE("allocation at creation routes the fee to the assignee") {
    Fx fx = registered_three({.allocation = AllocationMode::AtCreation});
    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 5});
    fx.mint(ChainId::A);

    auto expected = allocate(task, {1, 2, 3}, 1);
    REQUIRE(expected.ok());
    const TaskRecord& t = fx.task(task);
    CHECK(t.assignees == expected.value());
    CHECK(t.assigned_height == t.request_height);
    const Address owner{10 + static_cast<std::uint64_t>(t.assignees[0])};
    CHECK(t.assignee_owners[0] == owner);

    fx.send(ChainId::B, THIEF, DeliverTxCall{task, 2});
    fx.mint(ChainId::B);
    CHECK(fx.balB(THIEF) == 90);
    CHECK(fx.balB(V) == 50);

    fx.send(ChainId::A, THIEF, ProveDeliveryCall{task, receipt_hash(task, THIEF, 1), 1});
    fx.mint(ChainId::A);
    CHECK(fx.balA(owner) == 120);  // 200 - 10 register gas - 100 collateral + 30 fee
    CHECK(fx.balA(THIEF) == 90);   // the prove gas bought it nothing
    CHECK(fx.balB(THIEF) == 90);   // neither did the delivery gas
    CHECK(fx.task(task).phase == TaskPhase::Acked);
    CHECK(check_conservation(fx.w.a));
    CHECK(check_conservation(fx.w.b));
}

TEST_CASE("a missed assigned task slashes collateral and pays the reporter") {
    Fx fx({.allocation = AllocationMode::AtCreation});
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::A, REP, 100);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 2});
    fx.mint(ChainId::A);
    CHECK(fx.task(task).assignees == std::vector<RelayerId>{1});

    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);

    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 3});
    const Block& b = fx.mint(ChainId::A);
    CHECK_FALSE(b.txs[0].reverted);
    CHECK(fx.w.a.coord.relayers.at(1).collateral == 90);
    CHECK(fx.balA(REP) == 90);  // -15 gas +5 reporter share of the slash
    CHECK(fx.balA(U) == 984);   // -20 gas -80 escrow +80 refund +4 user share
    CHECK(fx.w.a.burned == 1);  // the undistributed remainder of the slash
    CHECK(check_conservation(fx.w.a));
}

TEST_CASE("unbonding must outlast every pending assignment") {
    Fx fx({.allocation = AllocationMode::AtCreation});
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::A, REP, 100);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);  // height 1

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 4});
    fx.mint(ChainId::A);  // height 2

    fx.send(ChainId::A, O1, WithdrawCall{1});
    fx.mint(ChainId::A);  // height 3
    const RelayerRecord& rec = fx.w.a.coord.relayers.at(1);
    CHECK(rec.unbonding);
    CHECK(rec.unbond_end == 9);  // max(height 3, timeout 4) + 5

    // no new work lands on an unbonding relayer
    fx.send(ChainId::A, U, TransferCall{V, 10, 5, 8});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::EmptyRelayerSet);

    while (fx.w.a.height < 9) fx.mint(ChainId::A);
    auto early = coordinator::reclaim(fx.w, ChainId::A, 1, O1, fx.w.a.height, fx.t);
    CHECK_FALSE(early.ok());
    CHECK(early.error() == Err::StillUnbonding);  // the assignment is still open

    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 5});
    fx.mint(ChainId::A);
    CHECK(fx.task(task).phase == TaskPhase::TimedOut);

    auto done = coordinator::reclaim(fx.w, ChainId::A, 1, O1, fx.w.a.height, fx.t);
    REQUIRE(done.ok());
    CHECK(done.value() == 90);  // collateral minus one slash
    CHECK_FALSE(fx.w.a.coord.relayers.contains(1));
    CHECK(fx.balA(O1) == 170);  // 200 - register and withdraw gas - 100 + 90
    CHECK(check_conservation(fx.w.a));

    // the id is free again
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    CHECK_FALSE(fx.mint(ChainId::A).txs[0].reverted);
}

TEST_CASE("reclaim gates on ownership, unbonding and the delay") {
    Fx fx;
    fx.fund(ChainId::A, O1, 200);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);  // height 1

    CHECK(coordinator::reclaim(fx.w, ChainId::A, 1, O1, 1, 0).error() == Err::NotUnbonding);
    CHECK(coordinator::reclaim(fx.w, ChainId::A, 9, O1, 1, 0).error() == Err::NotRegistered);

    fx.send(ChainId::A, O1, WithdrawCall{1});
    fx.mint(ChainId::A);  // height 2, unbond end 7
    CHECK(fx.w.a.coord.relayers.at(1).unbond_end == 7);
    CHECK(coordinator::reclaim(fx.w, ChainId::A, 1, O2, 7, 0).error() == Err::NotRegistered);
    CHECK(coordinator::reclaim(fx.w, ChainId::A, 1, O1, 6, 0).error() == Err::StillUnbonding);

    fx.send(ChainId::A, O1, WithdrawCall{1});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::StillUnbonding);

    auto ok = coordinator::reclaim(fx.w, ChainId::A, 1, O1, 7, 0);
    REQUIRE(ok.ok());
    CHECK(ok.value() == 100);
}

TEST_CASE("deliveries need the request to be inside the relayed horizon") {
    Fx fx;
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::B, O1, 100);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 5});
    fx.mint(ChainId::A);

    fx.send(ChainId::B, O1, DeliverTxCall{task, 0});  // attests nothing new
    CHECK(fx.mint(ChainId::B).txs[0].reason == Err::UnknownRequest);

    CHECK(coordinator::relay_header(fx.w, ChainId::B, 5).error() == Err::StaleHeader);
    REQUIRE(coordinator::relay_header(fx.w, ChainId::B, 1).ok());
    CHECK(coordinator::relay_header(fx.w, ChainId::B, 1).error() == Err::StaleHeader);

    fx.send(ChainId::B, O1, DeliverTxCall{task, 0});  // horizon already advanced
    CHECK_FALSE(fx.mint(ChainId::B).txs[0].reverted);
    CHECK(fx.balB(V) == 50);
}

TEST_CASE("published assignments are checked against the rule") {
    Fx fx = registered_three({.allocation = AllocationMode::Validated});
    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 9});
    fx.mint(ChainId::A);
    CHECK(fx.task(task).assignees.empty());

    auto expected = allocate(task, {1, 2, 3}, 1);
    REQUIRE(expected.ok());
    const RelayerId right = expected.value()[0];
    const RelayerId wrong = right % 3 + 1;

    fx.send(ChainId::A, O1, AssignTasksCall{1, {{task, {wrong}}}});
    const Block& b1 = fx.mint(ChainId::A);
    CHECK(b1.txs[0].reverted);
    CHECK(b1.txs[0].reason == Err::WrongAllocation);
    CHECK(fx.task(task).assignees.empty());

    fx.send(ChainId::A, O1, AssignTasksCall{1, {{task, {right}}}});
    const Block& b2 = fx.mint(ChainId::A);
    CHECK_FALSE(b2.txs[0].reverted);
    CHECK(fx.task(task).assignees == expected.value());
    CHECK(fx.task(task).assigned_height > fx.task(task).request_height);
    CHECK(fx.w.a.minted == fx.w.params.allocator_reward);
    CHECK(fx.balA(O1) == 200 - 10 - 100 - 15 - 15 + 2);

    fx.send(ChainId::A, O2, AssignTasksCall{2, {{task, {right}}}});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::AlreadyAssigned);

    // a batch with one bad item still lands the good one, without the bonus
    const Hash256 task2 = fx.send(ChainId::A, U, TransferCall{V, 10, 20, 9});
    fx.mint(ChainId::A);
    auto expected2 = allocate(task2, {1, 2, 3}, 1);
    REQUIRE(expected2.ok());
    const Hash256 bogus = Sha256::digest(std::string("nope"));
    fx.send(ChainId::A, O3, AssignTasksCall{3, {{bogus, {1}}, {task2, expected2.value()}}});
    const Block& b3 = fx.mint(ChainId::A);
    CHECK_FALSE(b3.txs[0].reverted);
    CHECK(fx.task(task2).assignees == expected2.value());
    CHECK(fx.w.a.minted == fx.w.params.allocator_reward);  // unchanged

    fx.send(ChainId::A, U, AssignTasksCall{1, {{task2, expected2.value()}}});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::NotRegistered);
    CHECK(check_conservation(fx.w.a));
}

TEST_CASE("collateral under the floor drops a relayer out of allocation") {
    CoordinatorParams p;
    p.allocation = AllocationMode::AtCreation;
    p.slash_per_timeout = 90;
    Fx fx(p);
    fx.fund(ChainId::A, U, 1000);
    fx.fund(ChainId::A, O1, 200);
    fx.fund(ChainId::A, REP, 100);
    fx.send(ChainId::A, O1, RegisterCall{1, 100});
    fx.mint(ChainId::A);

    const Hash256 task = fx.send(ChainId::A, U, TransferCall{V, 50, 30, 2});
    fx.mint(ChainId::A);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.mint(ChainId::B);
    fx.send(ChainId::A, REP, SubmitTimeoutCall{task, 3});
    fx.mint(ChainId::A);
    CHECK(fx.w.a.coord.relayers.at(1).collateral == 10);

    fx.send(ChainId::A, U, TransferCall{V, 10, 5, 9});
    CHECK(fx.mint(ChainId::A).txs[0].reason == Err::EmptyRelayerSet);
    CHECK(fx.w.a.coord.relayers.at(1).unbonding);
    CHECK(check_conservation(fx.w.a));
}
