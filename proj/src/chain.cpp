#include "relaysim/chain.hpp"

#include <algorithm>

#include "relaysim/sha256.hpp"

namespace relaysim {

Tokens CostTable::units(PayloadKind k) const {
    switch (k) {
        case PayloadKind::Register: return register_units;
        case PayloadKind::Withdraw: return withdraw_units;
        case PayloadKind::Transfer: return transfer_units;
        case PayloadKind::AssignTasks: return assign_units;
        case PayloadKind::DeliverTx: return deliver_units;
        case PayloadKind::ProveDelivery: return prove_units;
        case PayloadKind::SubmitTimeout: return timeout_units;
        case PayloadKind::Plain: return plain_units;
    }
    return 1;
}

PayloadKind payload_kind(const Payload& p) {
    return std::visit(
        [](const auto& call) {
            using T = std::decay_t<decltype(call)>;
            if constexpr (std::is_same_v<T, RegisterCall>) return PayloadKind::Register;
            else if constexpr (std::is_same_v<T, WithdrawCall>) return PayloadKind::Withdraw;
            else if constexpr (std::is_same_v<T, TransferCall>) return PayloadKind::Transfer;
            else if constexpr (std::is_same_v<T, AssignTasksCall>) return PayloadKind::AssignTasks;
            else if constexpr (std::is_same_v<T, DeliverTxCall>) return PayloadKind::DeliverTx;
            else if constexpr (std::is_same_v<T, ProveDeliveryCall>) return PayloadKind::ProveDelivery;
            else if constexpr (std::is_same_v<T, SubmitTimeoutCall>) return PayloadKind::SubmitTimeout;
            else return PayloadKind::Plain;
        },
        p);
}

static void encode_payload(ByteWriter& wr, const Payload& p) {
    wr.u8(static_cast<std::uint8_t>(payload_kind(p)));
    std::visit(
        [&](const auto& call) {
            using T = std::decay_t<decltype(call)>;
            if constexpr (std::is_same_v<T, RegisterCall>) {
                wr.i64(call.relayer);
                wr.i64(call.collateral);
            } else if constexpr (std::is_same_v<T, WithdrawCall>) {
                wr.i64(call.relayer);
            } else if constexpr (std::is_same_v<T, TransferCall>) {
                wr.address(call.to);
                wr.i64(call.amount);
                wr.i64(call.fee);
                wr.i64(call.timeout_height);
            } else if constexpr (std::is_same_v<T, AssignTasksCall>) {
                wr.i64(call.allocator);
                wr.u64(call.items.size());
                for (const auto& item : call.items) {
                    wr.hash(item.task);
                    wr.u64(item.assignees.size());
                    for (RelayerId r : item.assignees) wr.i64(r);
                }
            } else if constexpr (std::is_same_v<T, DeliverTxCall>) {
                wr.hash(call.task);
                wr.i64(call.attested_source_head);
            } else if constexpr (std::is_same_v<T, ProveDeliveryCall>) {
                wr.hash(call.task);
                wr.hash(call.receipt);
                wr.i64(call.attested_dest_head);
            } else if constexpr (std::is_same_v<T, SubmitTimeoutCall>) {
                wr.hash(call.task);
                wr.i64(call.attested_dest_head);
            }
        },
        p);
}

Hash256 tx_id(ChainId chain, Address submitter, std::uint64_t nonce, Tokens gas_price,
              const Payload& payload) {
    ByteWriter wr;
    wr.str("tx");
    wr.u8(static_cast<std::uint8_t>(chain));
    wr.address(submitter);
    wr.u64(nonce);
    wr.i64(gas_price);
    encode_payload(wr, payload);
    return Sha256::digest(wr.bytes());
}

Hash256 receipt_hash(const Hash256& task, Address deliverer, Height height) {
    ByteWriter wr;
    wr.str("receipt");
    wr.hash(task);
    wr.address(deliverer);
    wr.i64(height);
    return Sha256::digest(wr.bytes());
}

std::size_t Mempool::size() const {
    std::size_t n = 0;
    for (const auto& [addr, q] : by_sender) n += q.size();
    return n;
}

World make_world(CoordinatorParams params, CostTable costs) {
    World w;
    w.a.id = ChainId::A;
    w.b.id = ChainId::B;
    w.params = params;
    w.costs = costs;
    return w;
}

void credit_genesis(World& w, ChainId chain, Address who, Tokens amount) {
    ChainState& c = w.chain(chain);
    c.balances[who] += amount;
    c.genesis_supply += amount;
    if (w.trace)
        w.trace->append(0, LedgerEvent{LedgerKind::Genesis, chain, {{who, amount}}, 0, 0, 0, 0, 0,
                                       Hash256{}, -1});
}

Hash256 submit_tx(World& w, ChainId chain, Address submitter, Payload payload, Tokens gas_price,
                  TimeUs now) {
    ChainState& c = w.chain(chain);
    ChainTx tx;
    tx.submitter = submitter;
    tx.nonce = c.next_nonce[submitter]++;
    tx.gas_price = gas_price;
    tx.submission_time = now;
    tx.payload = std::move(payload);
    tx.id = tx_id(chain, submitter, tx.nonce, gas_price, tx.payload);
    Hash256 id = tx.id;
    c.mempool.by_sender[submitter].push_back(std::move(tx));
    return id;
}

Result<std::monostate> execute_tx(World& w, ChainId chain, const ChainTx& tx, Height exec_height,
                                  TimeUs now) {
    coordinator::ExecCtx ctx{chain, exec_height, now, tx.submitter};
    return std::visit(
        [&](const auto& call) -> Result<std::monostate> {
            using T = std::decay_t<decltype(call)>;
            if constexpr (std::is_same_v<T, RegisterCall>) {
                return coordinator::register_relayer(w, ctx, call.relayer, call.collateral);
            } else if constexpr (std::is_same_v<T, WithdrawCall>) {
                return coordinator::withdraw(w, ctx, call.relayer);
            } else if constexpr (std::is_same_v<T, TransferCall>) {
                return coordinator::transfer(w, ctx, tx.id, call.to, call.amount, call.fee,
                                             call.timeout_height, tx.submission_time);
            } else if constexpr (std::is_same_v<T, AssignTasksCall>) {
                return coordinator::assign_tasks(w, ctx, call.allocator, call.items);
            } else if constexpr (std::is_same_v<T, DeliverTxCall>) {
                return coordinator::deliver_tx(w, ctx, call.task, call.attested_source_head);
            } else if constexpr (std::is_same_v<T, ProveDeliveryCall>) {
                return coordinator::prove_delivery(w, ctx, call.task, call.receipt,
                                                   call.attested_dest_head);
            } else if constexpr (std::is_same_v<T, SubmitTimeoutCall>) {
                return coordinator::submit_timeout(w, ctx, call.task, call.attested_dest_head);
            } else {
                return std::monostate{};
            }
        },
        tx.payload);
}

namespace {

// Fee auction between queue fronts: highest gas price first, ties broken by
// earlier arrival then lower sender address. FIFO mode keeps only the arrival
// order. Returns true when `x` should be mined before `y`.
bool mines_before(const ChainTx& x, const ChainTx& y, bool fifo) {
    if (!fifo && x.gas_price != y.gas_price) return x.gas_price > y.gas_price;
    if (x.submission_time != y.submission_time) return x.submission_time < y.submission_time;
    if (x.submitter != y.submitter) return x.submitter < y.submitter;
    return x.id < y.id;
}

}  // namespace

const Block& mint_block(World& w, ChainId chain, TimeUs now) {
    ChainState& c = w.chain(chain);
    c.height += 1;
    Block block;
    block.height = c.height;
    block.minted_at = now;

    auto& pool = c.mempool.by_sender;
    while (true) {
        std::deque<ChainTx>* best = nullptr;
        for (auto& [addr, q] : pool) {
            if (q.empty()) continue;
            if (!best || mines_before(q.front(), best->front(), w.fifo_mempool)) best = &q;
        }
        if (!best) break;
        ChainTx tx = std::move(best->front());
        best->pop_front();

        const Tokens gas_cost = tx.gas_price * w.costs.units(payload_kind(tx.payload));
        Tokens& balance = c.balances[tx.submitter];
        if (balance < gas_cost) continue;  // unpayable, dropped without execution
        balance -= gas_cost;
        c.balances[kMiner] += gas_cost;
        if (w.trace)
            w.trace->append(now, LedgerEvent{LedgerKind::GasPayment,
                                             chain,
                                             {{tx.submitter, -gas_cost}, {kMiner, gas_cost}},
                                             0,
                                             0,
                                             0,
                                             0,
                                             0,
                                             tx.id});

        MinedTx mined;
        mined.tx = std::move(tx);
        auto res = execute_tx(w, chain, mined.tx, block.height, now);
        if (!res.ok()) {
            mined.reverted = true;
            mined.reason = res.error();
        }
        block.txs.push_back(std::move(mined));
    }
    for (auto it = pool.begin(); it != pool.end();) {
        if (it->second.empty()) it = pool.erase(it);
        else ++it;
    }

    if (w.trace) {
        BlockEvent ev;
        ev.chain = chain;
        ev.height = block.height;
        for (const auto& mined : block.txs) {
            TxSummary s;
            s.id = mined.tx.id;
            s.submitter = mined.tx.submitter;
            s.kind = payload_kind(mined.tx.payload);
            s.gas_price = mined.tx.gas_price;
            s.gas_units = w.costs.units(s.kind);
            s.reverted = mined.reverted;
            s.reason = mined.reason;
            if (const auto* d = std::get_if<DeliverTxCall>(&mined.tx.payload)) s.task = d->task;
            else if (const auto* p = std::get_if<ProveDeliveryCall>(&mined.tx.payload)) s.task = p->task;
            else if (const auto* t = std::get_if<SubmitTimeoutCall>(&mined.tx.payload)) s.task = t->task;
            else if (payload_kind(mined.tx.payload) == PayloadKind::Transfer) s.task = mined.tx.id;
            ev.txs.push_back(std::move(s));
        }
        w.trace->append(now, std::move(ev));
    }

    c.blocks.push_back(std::move(block));

    if (!check_conservation(c)) {
        c.conservation_ok = false;
        if (w.trace)
            w.trace->append(now, ViolationEvent{"token conservation broken", chain, c.height});
    }
    return c.blocks.back();
}

std::vector<const Block*> read_blocks(const ChainState& chain, Height from_height) {
    std::vector<const Block*> out;
    for (const Block& b : chain.blocks)
        if (b.height >= from_height) out.push_back(&b);
    return out;
}

bool check_conservation(const ChainState& chain) {
    Tokens balances = 0;
    for (const auto& [addr, bal] : chain.balances) {
        if (bal < 0) return false;
        balances += bal;
    }
    const Tokens held = chain.coord.fee_escrow + chain.coord.principal_escrow +
                        chain.coord.collateral_total();
    return chain.genesis_supply + chain.minted - chain.burned == balances + held;
}

}  // namespace relaysim
