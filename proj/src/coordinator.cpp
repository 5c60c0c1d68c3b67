#include "relaysim/coordinator.hpp"

#include <algorithm>
#include <cmath>

#include "relaysim/chain.hpp"
#include "relaysim/sha256.hpp"

namespace relaysim {

const char* allocation_mode_name(AllocationMode m) {
    switch (m) {
        case AllocationMode::Competitive: return "competitive";
        case AllocationMode::AtCreation: return "at-creation";
        case AllocationMode::Validated: return "validated";
    }
    return "?";
}

Result<AllocationMode> allocation_mode_from_name(const std::string& s) {
    if (s == "competitive") return AllocationMode::Competitive;
    if (s == "at-creation") return AllocationMode::AtCreation;
    if (s == "validated") return AllocationMode::Validated;
    return Err::ConfigError;
}

Tokens CoordinatorState::collateral_total() const {
    Tokens total = 0;
    for (const auto& [id, rec] : relayers) total += rec.collateral;
    return total;
}

static Height unbond_end_for(const CoordinatorState& coord, const CoordinatorParams& params,
                             RelayerId id, Height now_height) {
    Height latest = now_height;
    for (const auto& [task_id, t] : coord.tasks) {
        if (t.phase != TaskPhase::Requested) continue;
        if (std::find(t.assignees.begin(), t.assignees.end(), id) == t.assignees.end()) continue;
        latest = std::max(latest, t.timeout_height);
    }
    return latest + params.unbond_delay_k;
}

std::vector<RelayerId> eligible_set(CoordinatorState& coord, const CoordinatorParams& params,
                                    Height now_height) {
    std::vector<RelayerId> out;
    for (auto& [id, rec] : coord.relayers) {
        if (!rec.unbonding && rec.collateral < params.collateral_floor) {
            rec.unbonding = true;
            rec.unbond_end = unbond_end_for(coord, params, id, now_height);
        }
        if (!rec.unbonding) out.push_back(id);
    }
    return out;
}

std::vector<RelayerId> eligible_view(const CoordinatorState& coord,
                                     const CoordinatorParams& params) {
    std::vector<RelayerId> out;
    for (const auto& [id, rec] : coord.relayers)
        if (!rec.unbonding && rec.collateral >= params.collateral_floor) out.push_back(id);
    return out;
}

Result<std::vector<RelayerId>> allocate(const Hash256& task, const std::vector<RelayerId>& eligible,
                                        int redundancy) {
    if (eligible.empty()) return Err::EmptyRelayerSet;
    const std::uint64_t m = eligible.size();
    const Hash256 digest = Sha256::digest(task.b.data(), task.b.size());
    const std::uint64_t idx = mod_big_endian(digest, m);
    const std::uint64_t r = std::min<std::uint64_t>(std::max(redundancy, 1), m);
    std::vector<RelayerId> out;
    out.reserve(r);
    for (std::uint64_t j = 0; j < r; ++j) out.push_back(eligible[(idx + j) % m]);
    return out;
}

namespace coordinator {

namespace {

void trace_ledger(World& w, TimeUs now, LedgerEvent ev) {
    if (w.trace) w.trace->append(now, std::move(ev));
}

void trace_event(World& w, TimeUs now, TraceEventBody body) {
    if (w.trace) w.trace->append(now, std::move(body));
}

// The light client only ever moves forward, and cannot get ahead of the
// chain it mirrors. Attested heads carried inside calls pass through here.
void attach_header(ChainState& viewer, const ChainState& viewed, Height attested) {
    viewer.counterparty_head = std::max(viewer.counterparty_head, std::min(attested, viewed.height));
}

void record_assignment(World& w, const ExecCtx& ctx, CoordinatorState& coord, TaskRecord& t,
                       std::vector<RelayerId> assignees) {
    t.assignees = std::move(assignees);
    t.assignee_owners.clear();
    for (RelayerId id : t.assignees) t.assignee_owners.push_back(coord.relayers.at(id).owner);
    t.assigned_height = ctx.height;
    t.assigned_mint_time = ctx.now;
    trace_event(w, ctx.now, AssignmentEvent{t.id, t.assignees, ctx.height, ctx.chain});
}

}  // namespace

Result<std::monostate> register_relayer(World& w, const ExecCtx& ctx, RelayerId id,
                                        Tokens collateral) {
    ChainState& c = w.chain(ctx.chain);
    if (id < 0) return Err::OutOfRange;
    if (c.coord.relayers.contains(id)) return Err::AlreadyRegistered;
    if (collateral < w.params.collateral_required) return Err::InsufficientCollateral;
    if (c.balances[ctx.submitter] < collateral) return Err::InsufficientBalance;

    c.balances[ctx.submitter] -= collateral;
    RelayerRecord rec;
    rec.id = id;
    rec.owner = ctx.submitter;
    rec.collateral = collateral;
    rec.registered_height = ctx.height;
    c.coord.relayers.emplace(id, rec);
    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::CollateralLock, ctx.chain, {{ctx.submitter, -collateral}},
                             0, 0, 0, 0, collateral, Hash256{}, id});
    return std::monostate{};
}

Result<std::monostate> withdraw(World& w, const ExecCtx& ctx, RelayerId id) {
    ChainState& c = w.chain(ctx.chain);
    auto it = c.coord.relayers.find(id);
    if (it == c.coord.relayers.end() || it->second.owner != ctx.submitter)
        return Err::NotRegistered;
    if (it->second.unbonding) return Err::StillUnbonding;

    it->second.unbonding = true;
    it->second.unbond_end = unbond_end_for(c.coord, w.params, id, ctx.height);
    return std::monostate{};
}

Result<Tokens> reclaim(World& w, ChainId chain, RelayerId id, Address caller, Height now_height,
                       TimeUs now) {
    ChainState& c = w.chain(chain);
    auto it = c.coord.relayers.find(id);
    if (it == c.coord.relayers.end() || it->second.owner != caller) return Err::NotRegistered;
    if (!it->second.unbonding) return Err::NotUnbonding;
    if (now_height < it->second.unbond_end) return Err::StillUnbonding;
    for (const auto& [task_id, t] : c.coord.tasks) {
        if (t.phase != TaskPhase::Requested) continue;
        if (std::find(t.assignees.begin(), t.assignees.end(), id) != t.assignees.end())
            return Err::StillUnbonding;
    }

    const Tokens refund = it->second.collateral;
    c.balances[it->second.owner] += refund;
    trace_ledger(w, now,
                 LedgerEvent{LedgerKind::CollateralReturn, chain, {{it->second.owner, refund}}, 0,
                             0, 0, 0, -refund, Hash256{}, id});
    c.coord.relayers.erase(it);
    return refund;
}

Result<std::monostate> transfer(World& w, const ExecCtx& ctx, const Hash256& task_id, Address to,
                                Tokens amount, Tokens fee, Height timeout_height,
                                TimeUs submitted_at) {
    ChainState& c = w.chain(ctx.chain);
    if (amount <= 0 || fee < 0 || timeout_height <= 0) return Err::OutOfRange;
    if (c.coord.tasks.contains(task_id)) return Err::AlreadyResolved;
    if (c.balances[ctx.submitter] < amount + fee) return Err::InsufficientBalance;

    std::vector<RelayerId> assignees;
    if (w.params.allocation == AllocationMode::AtCreation) {
        auto eligible = eligible_set(c.coord, w.params, ctx.height);
        auto allocated = allocate(task_id, eligible, w.params.redundancy_r);
        if (!allocated.ok()) return allocated.error();
        assignees = std::move(allocated.value());
    }

    c.balances[ctx.submitter] -= amount + fee;
    c.coord.fee_escrow += fee;
    c.coord.principal_escrow += amount;

    TaskRecord t;
    t.id = task_id;
    t.origin = ctx.submitter;
    t.recipient = to;
    t.source = ctx.chain;
    t.amount = amount;
    t.fee = fee;
    t.timeout_height = timeout_height;
    t.request_height = ctx.height;
    t.request_submit_time = submitted_at;
    t.request_mint_time = ctx.now;

    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::EscrowLock, ctx.chain, {{ctx.submitter, -(amount + fee)}},
                             0, 0, fee, amount, 0, task_id});
    TaskLifecycleEvent ev;
    ev.task = task_id;
    ev.phase = TaskPhase::Requested;
    ev.chain = ctx.chain;
    ev.height = ctx.height;
    ev.request_submit_time = submitted_at;
    ev.fee = fee;
    ev.fee_below_profitable = fee <= w.costs.deliver_units + w.costs.prove_units;
    trace_event(w, ctx.now, std::move(ev));

    auto [it, inserted] = c.coord.tasks.emplace(task_id, std::move(t));
    if (!assignees.empty()) record_assignment(w, ctx, c.coord, it->second, std::move(assignees));
    return std::monostate{};
}

Result<std::monostate> assign_tasks(World& w, const ExecCtx& ctx, RelayerId allocator,
                                    const std::vector<AssignItem>& items) {
    ChainState& c = w.chain(ctx.chain);
    auto rec = c.coord.relayers.find(allocator);
    if (rec == c.coord.relayers.end() || rec->second.owner != ctx.submitter ||
        rec->second.unbonding)
        return Err::NotRegistered;
    if (items.empty()) return Err::OutOfRange;

    auto eligible = eligible_set(c.coord, w.params, ctx.height);
    std::size_t applied = 0;
    Err first_err = Err::None;
    bool all_correct = true;
    for (const auto& item : items) {
        Err item_err = Err::None;
        auto it = c.coord.tasks.find(item.task);
        if (it == c.coord.tasks.end()) {
            item_err = Err::UnknownTask;
        } else if (!it->second.assignees.empty() || it->second.phase != TaskPhase::Requested) {
            item_err = Err::AlreadyAssigned;
        } else {
            auto expected = allocate(item.task, eligible, w.params.redundancy_r);
            if (!expected.ok()) {
                item_err = expected.error();
            } else if (expected.value() != item.assignees) {
                item_err = Err::WrongAllocation;
            } else {
                record_assignment(w, ctx, c.coord, it->second, expected.value());
                ++applied;
            }
        }
        if (item_err != Err::None) {
            all_correct = false;
            if (first_err == Err::None) first_err = item_err;
        }
    }
    if (applied == 0) return first_err;
    if (all_correct && w.params.allocator_reward > 0) {
        c.balances[ctx.submitter] += w.params.allocator_reward;
        c.minted += w.params.allocator_reward;
        trace_ledger(w, ctx.now,
                     LedgerEvent{LedgerKind::AllocatorReward, ctx.chain,
                                 {{ctx.submitter, w.params.allocator_reward}},
                                 w.params.allocator_reward, 0, 0, 0, 0, Hash256{}, allocator});
    }
    return std::monostate{};
}

Result<std::monostate> deliver_tx(World& w, const ExecCtx& ctx, const Hash256& task,
                                  Height attested_source_head) {
    ChainState& dest = w.chain(ctx.chain);
    ChainState& source = w.chain(other_chain(ctx.chain));
    attach_header(dest, source, attested_source_head);

    auto it = source.coord.tasks.find(task);
    if (it == source.coord.tasks.end()) return Err::UnknownRequest;
    TaskRecord& t = it->second;
    if (t.request_height > dest.counterparty_head) return Err::UnknownRequest;
    if (dest.coord.receipts.contains(task)) return Err::DuplicateDelivery;
    if (t.phase == TaskPhase::TimedOut) return Err::TaskTimedOut;
    if (t.phase == TaskPhase::Acked) return Err::AlreadyAcked;
    if (ctx.height > t.timeout_height) return Err::PastTimeout;

    Receipt rec;
    rec.task = task;
    rec.deliverer = ctx.submitter;
    rec.height = ctx.height;
    rec.hash = receipt_hash(task, ctx.submitter, ctx.height);
    dest.coord.receipts.emplace(task, rec);

    dest.balances[t.recipient] += t.amount;
    dest.minted += t.amount;
    t.phase = TaskPhase::Delivered;

    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::DeliveryMint, ctx.chain, {{t.recipient, t.amount}},
                             t.amount, 0, 0, 0, 0, task});
    TaskLifecycleEvent ev;
    ev.task = task;
    ev.phase = TaskPhase::Delivered;
    ev.chain = ctx.chain;
    ev.height = ctx.height;
    ev.assignees = t.assignees;
    ev.deliverer = ctx.submitter;
    trace_event(w, ctx.now, std::move(ev));
    return std::monostate{};
}

Result<std::monostate> prove_delivery(World& w, const ExecCtx& ctx, const Hash256& task,
                                      const Hash256& receipt, Height attested_dest_head) {
    ChainState& source = w.chain(ctx.chain);
    ChainState& dest = w.chain(other_chain(ctx.chain));
    attach_header(source, dest, attested_dest_head);

    auto it = source.coord.tasks.find(task);
    if (it == source.coord.tasks.end()) return Err::UnknownTask;
    TaskRecord& t = it->second;
    if (t.phase == TaskPhase::Acked) return Err::AlreadyAcked;
    if (t.phase == TaskPhase::TimedOut) return Err::TaskTimedOut;

    auto rc = dest.coord.receipts.find(task);
    if (rc == dest.coord.receipts.end()) return Err::InvalidReceipt;
    if (rc->second.height > source.counterparty_head) return Err::InvalidReceipt;
    if (rc->second.hash != receipt) return Err::InvalidReceipt;

    // The fee belongs to the allocated relayer. Without an allocation the
    // deliverer in the receipt earns it; with one, delivering yourself only
    // matters if you are among the assignees.
    Address payee = rc->second.deliverer;
    RelayerId payee_relayer = -1;
    if (!t.assignees.empty()) {
        payee = t.assignee_owners.front();
        payee_relayer = t.assignees.front();
        for (std::size_t i = 0; i < t.assignee_owners.size(); ++i) {
            if (t.assignee_owners[i] == rc->second.deliverer) {
                payee = t.assignee_owners[i];
                payee_relayer = t.assignees[i];
                break;
            }
        }
    }

    source.coord.fee_escrow -= t.fee;
    source.balances[payee] += t.fee;
    source.coord.principal_escrow -= t.amount;
    source.burned += t.amount;
    t.phase = TaskPhase::Acked;

    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::FeeRelease, ctx.chain, {{payee, t.fee}}, 0, 0, -t.fee, 0,
                             0, task, payee_relayer});
    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::PrincipalBurn, ctx.chain, {}, 0, t.amount, 0, -t.amount,
                             0, task});
    TaskLifecycleEvent ev;
    ev.task = task;
    ev.phase = TaskPhase::Acked;
    ev.chain = ctx.chain;
    ev.height = ctx.height;
    ev.assignees = t.assignees;
    trace_event(w, ctx.now, std::move(ev));
    return std::monostate{};
}

Result<std::monostate> submit_timeout(World& w, const ExecCtx& ctx, const Hash256& task,
                                      Height attested_dest_head) {
    ChainState& source = w.chain(ctx.chain);
    ChainState& dest = w.chain(other_chain(ctx.chain));
    attach_header(source, dest, attested_dest_head);

    auto it = source.coord.tasks.find(task);
    if (it == source.coord.tasks.end()) return Err::UnknownTask;
    TaskRecord& t = it->second;
    if (t.phase == TaskPhase::Acked || t.phase == TaskPhase::TimedOut)
        return Err::AlreadyResolved;
    if (source.counterparty_head < t.timeout_height) return Err::NotTimedOut;
    if (dest.coord.receipts.contains(task)) return Err::InvalidProof;

    Tokens total_slashed = 0;
    for (RelayerId id : t.assignees) {
        auto rec = source.coord.relayers.find(id);
        if (rec == source.coord.relayers.end()) continue;
        const Tokens s = std::min(w.params.slash_per_timeout, rec->second.collateral);
        if (s <= 0) continue;
        rec->second.collateral -= s;
        total_slashed += s;
        trace_ledger(w, ctx.now,
                     LedgerEvent{LedgerKind::Slash, ctx.chain, {}, 0, 0, 0, 0, -s, task, id});
    }
    if (total_slashed > 0) {
        const Tokens reporter_cut =
            static_cast<Tokens>(std::floor(total_slashed * w.params.reporter_share));
        const Tokens user_cut =
            static_cast<Tokens>(std::floor(total_slashed * w.params.user_refund_share));
        const Tokens burnt = total_slashed - reporter_cut - user_cut;
        if (reporter_cut > 0) {
            source.balances[ctx.submitter] += reporter_cut;
            trace_ledger(w, ctx.now,
                         LedgerEvent{LedgerKind::ReporterReward, ctx.chain,
                                     {{ctx.submitter, reporter_cut}}, 0, 0, 0, 0, 0, task});
        }
        if (user_cut > 0) {
            source.balances[t.origin] += user_cut;
            trace_ledger(w, ctx.now,
                         LedgerEvent{LedgerKind::UserSlashShare, ctx.chain,
                                     {{t.origin, user_cut}}, 0, 0, 0, 0, 0, task});
        }
        if (burnt > 0) {
            source.burned += burnt;
            trace_ledger(w, ctx.now,
                         LedgerEvent{LedgerKind::SlashBurn, ctx.chain, {}, 0, burnt, 0, 0, 0,
                                     task});
        }
    }

    source.coord.fee_escrow -= t.fee;
    source.coord.principal_escrow -= t.amount;
    source.balances[t.origin] += t.amount + t.fee;
    t.phase = TaskPhase::TimedOut;

    trace_ledger(w, ctx.now,
                 LedgerEvent{LedgerKind::TimeoutRefund, ctx.chain, {{t.origin, t.amount + t.fee}},
                             0, 0, -t.fee, -t.amount, 0, task});
    TaskLifecycleEvent ev;
    ev.task = task;
    ev.phase = TaskPhase::TimedOut;
    ev.chain = ctx.chain;
    ev.height = ctx.height;
    ev.assignees = t.assignees;
    trace_event(w, ctx.now, std::move(ev));
    return std::monostate{};
}

Result<std::monostate> relay_header(World& w, ChainId chain, Height head) {
    ChainState& c = w.chain(chain);
    const ChainState& other = w.chain(other_chain(chain));
    if (head > other.height) return Err::StaleHeader;
    if (head <= c.counterparty_head) return Err::StaleHeader;
    c.counterparty_head = head;
    return std::monostate{};
}

}  // namespace coordinator
}  // namespace relaysim
