#pragma once
#include <map>
#include <vector>

#include "relaysim/trace.hpp"
#include "relaysim/types.hpp"

namespace relaysim {

struct World;
struct AssignItem;

enum class AllocationMode : std::uint8_t {
    Competitive,   // no assignment, first valid delivery earns the fee
    AtCreation,    // assigned inside the transfer that creates the task
    Validated,     // relayers publish assignments, the contract checks them
};
const char* allocation_mode_name(AllocationMode m);
Result<AllocationMode> allocation_mode_from_name(const std::string& s);

struct CoordinatorParams {
    Tokens collateral_required{100};
    Tokens collateral_floor{20};
    Tokens slash_per_timeout{10};
    double reporter_share{0.5};
    double user_refund_share{0.4};
    Height unbond_delay_k{5};
    int redundancy_r{1};
    Tokens allocator_reward{2};
    AllocationMode allocation{AllocationMode::Competitive};
};

struct RelayerRecord {
    RelayerId id{0};
    Address owner;
    Tokens collateral{0};
    bool unbonding{false};
    Height unbond_end{0};
    Height registered_height{0};
};

struct TaskRecord {
    Hash256 id;
    Address origin;
    Address recipient;
    ChainId source{ChainId::A};
    Tokens amount{0};
    Tokens fee{0};
    Height timeout_height{0};
    Height request_height{0};
    TimeUs request_submit_time{0};
    TimeUs request_mint_time{0};
    std::vector<RelayerId> assignees;
    std::vector<Address> assignee_owners;  // snapshot at assignment, payouts survive reclaim
    Height assigned_height{-1};
    TimeUs assigned_mint_time{0};
    TaskPhase phase{TaskPhase::Requested};
};

struct Receipt {
    Hash256 task;
    Address deliverer;
    Height height{0};
    Hash256 hash;
};

// Per-chain slice of the coordinator contract. Tasks live on the chain the
// transfer executed on; receipts live on the chain the delivery landed on.
struct CoordinatorState {
    std::map<RelayerId, RelayerRecord> relayers;
    std::map<Hash256, TaskRecord> tasks;
    std::map<Hash256, Receipt> receipts;
    Tokens fee_escrow{0};
    Tokens principal_escrow{0};
    Tokens collateral_total() const;
};

// Active relayers eligible for allocation, ascending id. Relayers whose
// collateral fell below the floor are swept into unbonding first.
std::vector<RelayerId> eligible_set(CoordinatorState& coord, const CoordinatorParams& params,
                                    Height now_height);

// Same membership as eligible_set but without the sweep, for observers that
// may not mutate contract state.
std::vector<RelayerId> eligible_view(const CoordinatorState& coord,
                                     const CoordinatorParams& params);

// The allocation rule: index = H(task) taken modulo the eligible set size,
// with `redundancy` consecutive entries (wrapping) when redundancy > 1.
Result<std::vector<RelayerId>> allocate(const Hash256& task, const std::vector<RelayerId>& eligible,
                                        int redundancy);

namespace coordinator {

struct ExecCtx {
    ChainId chain;
    Height height;     // block being minted
    TimeUs now;        // mint time
    Address submitter;
};

Result<std::monostate> register_relayer(World& w, const ExecCtx& ctx, RelayerId id,
                                        Tokens collateral);
Result<std::monostate> withdraw(World& w, const ExecCtx& ctx, RelayerId id);
// Direct call, not a transaction: hands back what is left of the collateral
// once unbonding has run out and every assigned task is settled.
Result<Tokens> reclaim(World& w, ChainId chain, RelayerId id, Address caller, Height now_height,
                       TimeUs now);
Result<std::monostate> transfer(World& w, const ExecCtx& ctx, const Hash256& task_id, Address to,
                                Tokens amount, Tokens fee, Height timeout_height,
                                TimeUs submitted_at);
Result<std::monostate> assign_tasks(World& w, const ExecCtx& ctx, RelayerId allocator,
                                    const std::vector<AssignItem>& items);
Result<std::monostate> deliver_tx(World& w, const ExecCtx& ctx, const Hash256& task,
                                  Height attested_source_head);
Result<std::monostate> prove_delivery(World& w, const ExecCtx& ctx, const Hash256& task,
                                      const Hash256& receipt, Height attested_dest_head);
Result<std::monostate> submit_timeout(World& w, const ExecCtx& ctx, const Hash256& task,
                                      Height attested_dest_head);
// Advances this chain's view of the other chain. The standalone form rejects
// heights at or below the current view.
Result<std::monostate> relay_header(World& w, ChainId chain, Height head);

}  // namespace coordinator

}  // namespace relaysim
