#pragma once
#include <deque>
#include <map>
#include <variant>
#include <vector>

#include "relaysim/coordinator.hpp"
#include "relaysim/trace.hpp"
#include "relaysim/types.hpp"

namespace relaysim {

// Gas units charged per call kind. Gas is withheld in full even when the call
// reverts, so every included transaction costs its submitter something.
struct CostTable {
    Tokens register_units{10};
    Tokens withdraw_units{10};
    Tokens transfer_units{20};
    Tokens assign_units{15};
    Tokens deliver_units{10};
    Tokens prove_units{10};
    Tokens timeout_units{15};
    Tokens plain_units{1};
    Tokens units(PayloadKind k) const;
};

struct RegisterCall {
    RelayerId relayer;
    Tokens collateral;
};
struct WithdrawCall {
    RelayerId relayer;
};
// Cross-chain send request. Locks amount+fee in escrow on the chain it
// executes on; the counterpart asset is minted to `to` on the other chain
// once a relayer delivers. `timeout_height` is an absolute height on the
// destination chain after which delivery is no longer accepted.
struct TransferCall {
    Address to;
    Tokens amount;
    Tokens fee;
    Height timeout_height;
};
struct AssignItem {
    Hash256 task;
    std::vector<RelayerId> assignees;
};
struct AssignTasksCall {
    RelayerId allocator;
    std::vector<AssignItem> items;
};
struct DeliverTxCall {
    Hash256 task;
    Height attested_source_head;
};
struct ProveDeliveryCall {
    Hash256 task;
    Hash256 receipt;
    Height attested_dest_head;
};
struct SubmitTimeoutCall {
    Hash256 task;
    Height attested_dest_head;
};
struct PlainCall {};

using Payload = std::variant<RegisterCall, WithdrawCall, TransferCall, AssignTasksCall,
                             DeliverTxCall, ProveDeliveryCall, SubmitTimeoutCall, PlainCall>;
PayloadKind payload_kind(const Payload& p);

struct ChainTx {
    Hash256 id;
    Address submitter;
    std::uint64_t nonce{0};
    Tokens gas_price{1};
    TimeUs submission_time{0};
    Payload payload;
};

// Canonical id over everything except submission time, so the same logical
// transaction hashes identically no matter when the network delivers it.
Hash256 tx_id(ChainId chain, Address submitter, std::uint64_t nonce, Tokens gas_price,
              const Payload& payload);

Hash256 receipt_hash(const Hash256& task, Address deliverer, Height height);

struct MinedTx {
    ChainTx tx;
    bool reverted{false};
    Err reason{Err::None};
};

struct Block {
    Height height{0};
    TimeUs minted_at{0};
    std::vector<MinedTx> txs;
};

// Pending transactions grouped per sender in submission order. Selection at
// mint time is greedy over the queue fronts, so two transactions from the
// same sender can never execute out of order whatever their gas prices.
struct Mempool {
    std::map<Address, std::deque<ChainTx>> by_sender;
    std::size_t size() const;
};

// Address 0 collects gas on every chain.
inline constexpr Address kMiner{0};

struct ChainState {
    ChainId id{ChainId::A};
    Height height{0};
    std::map<Address, Tokens> balances;
    Tokens genesis_supply{0};
    Tokens minted{0};
    Tokens burned{0};
    CoordinatorState coord;
    Mempool mempool;
    std::map<Address, std::uint64_t> next_nonce;
    std::vector<Block> blocks;
    Height counterparty_head{0};
    bool conservation_ok{true};
};

struct World {
    ChainState a;
    ChainState b;
    CoordinatorParams params;
    CostTable costs;
    bool fifo_mempool{false};
    TraceLog* trace{nullptr};

    ChainState& chain(ChainId c) { return c == ChainId::A ? a : b; }
    const ChainState& chain(ChainId c) const { return c == ChainId::A ? a : b; }
};

World make_world(CoordinatorParams params = {}, CostTable costs = {});

void credit_genesis(World& w, ChainId chain, Address who, Tokens amount);

// Queues a transaction; the nonce is assigned from the sender's sequence and
// the id is returned so the caller can recognize it in later blocks.
Hash256 submit_tx(World& w, ChainId chain, Address submitter, Payload payload, Tokens gas_price,
                  TimeUs now);

// Applies one transaction against current state at `exec_height`. Gas has
// already been charged by the miner loop; this only runs the payload.
Result<std::monostate> execute_tx(World& w, ChainId chain, const ChainTx& tx, Height exec_height,
                                  TimeUs now);

const Block& mint_block(World& w, ChainId chain, TimeUs now);

std::vector<const Block*> read_blocks(const ChainState& chain, Height from_height);

// Supply identity: genesis + minted - burned must equal balances plus
// everything the coordinator holds (escrows and collateral).
bool check_conservation(const ChainState& chain);

}  // namespace relaysim
