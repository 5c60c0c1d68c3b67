#include "relaysim/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace relaysim {

using ordered_json = nlohmann::ordered_json;

const char* payload_name(PayloadKind k) {
    switch (k) {
        case PayloadKind::Register: return "register";
        case PayloadKind::Withdraw: return "withdraw";
        case PayloadKind::Transfer: return "transfer";
        case PayloadKind::AssignTasks: return "assign_tasks";
        case PayloadKind::DeliverTx: return "deliver_tx";
        case PayloadKind::ProveDelivery: return "prove_delivery";
        case PayloadKind::SubmitTimeout: return "submit_timeout";
        case PayloadKind::Plain: return "plain";
    }
    return "?";
}

PayloadKind payload_from_name(const std::string& s) {
    if (s == "register") return PayloadKind::Register;
    if (s == "withdraw") return PayloadKind::Withdraw;
    if (s == "transfer") return PayloadKind::Transfer;
    if (s == "assign_tasks") return PayloadKind::AssignTasks;
    if (s == "deliver_tx") return PayloadKind::DeliverTx;
    if (s == "prove_delivery") return PayloadKind::ProveDelivery;
    if (s == "submit_timeout") return PayloadKind::SubmitTimeout;
    if (s == "plain") return PayloadKind::Plain;
    throw std::invalid_argument("unknown payload kind: " + s);
}

const char* phase_name(TaskPhase p) {
    switch (p) {
        case TaskPhase::Requested: return "requested";
        case TaskPhase::Delivered: return "delivered";
        case TaskPhase::Acked: return "acked";
        case TaskPhase::TimedOut: return "timed_out";
    }
    return "?";
}

static TaskPhase phase_from_name(const std::string& s) {
    if (s == "requested") return TaskPhase::Requested;
    if (s == "delivered") return TaskPhase::Delivered;
    if (s == "acked") return TaskPhase::Acked;
    if (s == "timed_out") return TaskPhase::TimedOut;
    throw std::invalid_argument("unknown task phase: " + s);
}

const char* ledger_name(LedgerKind k) {
    switch (k) {
        case LedgerKind::Genesis: return "genesis";
        case LedgerKind::GasPayment: return "gas_payment";
        case LedgerKind::EscrowLock: return "escrow_lock";
        case LedgerKind::CollateralLock: return "collateral_lock";
        case LedgerKind::CollateralReturn: return "collateral_return";
        case LedgerKind::DeliveryMint: return "delivery_mint";
        case LedgerKind::FeeRelease: return "fee_release";
        case LedgerKind::PrincipalBurn: return "principal_burn";
        case LedgerKind::TimeoutRefund: return "timeout_refund";
        case LedgerKind::Slash: return "slash";
        case LedgerKind::ReporterReward: return "reporter_reward";
        case LedgerKind::UserSlashShare: return "user_slash_share";
        case LedgerKind::SlashBurn: return "slash_burn";
        case LedgerKind::AllocatorReward: return "allocator_reward";
    }
    return "?";
}

static LedgerKind ledger_from_name(const std::string& s) {
    static const std::map<std::string, LedgerKind> table = {
        {"genesis", LedgerKind::Genesis},
        {"gas_payment", LedgerKind::GasPayment},
        {"escrow_lock", LedgerKind::EscrowLock},
        {"collateral_lock", LedgerKind::CollateralLock},
        {"collateral_return", LedgerKind::CollateralReturn},
        {"delivery_mint", LedgerKind::DeliveryMint},
        {"fee_release", LedgerKind::FeeRelease},
        {"principal_burn", LedgerKind::PrincipalBurn},
        {"timeout_refund", LedgerKind::TimeoutRefund},
        {"slash", LedgerKind::Slash},
        {"reporter_reward", LedgerKind::ReporterReward},
        {"user_slash_share", LedgerKind::UserSlashShare},
        {"slash_burn", LedgerKind::SlashBurn},
        {"allocator_reward", LedgerKind::AllocatorReward},
    };
    auto it = table.find(s);
    if (it == table.end()) throw std::invalid_argument("unknown ledger kind: " + s);
    return it->second;
}

static Err err_from_name(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Err::IncomparableConfigs); ++i) {
        auto e = static_cast<Err>(i);
        if (s == err_name(e)) return e;
    }
    throw std::invalid_argument("unknown error name: " + s);
}

static ordered_json balances_to_json(const std::map<ChainId, std::map<Address, Tokens>>& m) {
    ordered_json out = ordered_json::object();
    for (const auto& [chain, accounts] : m) {
        ordered_json per = ordered_json::object();
        for (const auto& [addr, bal] : accounts) per[std::to_string(addr.v)] = bal;
        out[chain_name(chain)] = std::move(per);
    }
    return out;
}

static std::map<ChainId, std::map<Address, Tokens>> balances_from_json(const ordered_json& j) {
    std::map<ChainId, std::map<Address, Tokens>> out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        ChainId c = it.key() == "A" ? ChainId::A : ChainId::B;
        for (auto jt = it.value().begin(); jt != it.value().end(); ++jt)
            out[c][Address{std::stoull(jt.key())}] = jt.value().get<Tokens>();
    }
    return out;
}

static ordered_json event_to_json(const TraceEvent& ev) {
    ordered_json j;
    j["at"] = ev.at;
    j["seq"] = ev.seq;
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, BlockEvent>) {
                j["type"] = "block";
                j["chain"] = chain_name(body.chain);
                j["height"] = body.height;
                ordered_json txs = ordered_json::array();
                for (const auto& tx : body.txs) {
                    ordered_json t;
                    t["id"] = to_hex(tx.id);
                    t["submitter"] = tx.submitter.v;
                    t["kind"] = payload_name(tx.kind);
                    t["gas_price"] = tx.gas_price;
                    t["gas_units"] = tx.gas_units;
                    t["reverted"] = tx.reverted;
                    if (tx.reverted) t["reason"] = err_name(tx.reason);
                    if (!tx.task.is_zero()) t["task"] = to_hex(tx.task);
                    txs.push_back(std::move(t));
                }
                j["txs"] = std::move(txs);
            } else if constexpr (std::is_same_v<T, LedgerEvent>) {
                j["type"] = "ledger";
                j["kind"] = ledger_name(body.kind);
                j["chain"] = chain_name(body.chain);
                ordered_json ds = ordered_json::array();
                for (const auto& [addr, delta] : body.deltas)
                    ds.push_back(ordered_json{{"addr", addr.v}, {"delta", delta}});
                j["deltas"] = std::move(ds);
                j["minted"] = body.minted;
                j["burned"] = body.burned;
                j["escrow_fee"] = body.escrow_fee_delta;
                j["escrow_principal"] = body.escrow_principal_delta;
                j["collateral"] = body.collateral_delta;
                if (!body.task.is_zero()) j["task"] = to_hex(body.task);
                if (body.relayer >= 0) j["relayer"] = body.relayer;
            } else if constexpr (std::is_same_v<T, TaskLifecycleEvent>) {
                j["type"] = "task";
                j["task"] = to_hex(body.task);
                j["phase"] = phase_name(body.phase);
                j["chain"] = chain_name(body.chain);
                j["height"] = body.height;
                j["assignees"] = body.assignees;
                if (body.phase == TaskPhase::Delivered) j["deliverer"] = body.deliverer.v;
                if (body.phase == TaskPhase::Requested) {
                    j["request_submit_time"] = body.request_submit_time;
                    j["fee"] = body.fee;
                    j["fee_below_profitable"] = body.fee_below_profitable;
                }
            } else if constexpr (std::is_same_v<T, AssignmentEvent>) {
                j["type"] = "assignment";
                j["task"] = to_hex(body.task);
                j["assignees"] = body.assignees;
                j["height"] = body.height;
                j["chain"] = chain_name(body.chain);
            } else if constexpr (std::is_same_v<T, AgentActionEvent>) {
                j["type"] = "action";
                j["agent"] = body.agent;
                j["kind"] = payload_name(body.kind);
                if (!body.task.is_zero()) j["task"] = to_hex(body.task);
                j["submit_time"] = body.submit_time;
                j["chain"] = chain_name(body.chain);
            } else if constexpr (std::is_same_v<T, ViolationEvent>) {
                j["type"] = "violation";
                j["what"] = body.what;
                j["chain"] = chain_name(body.chain);
                j["height"] = body.height;
            }
        },
        ev.body);
    return j;
}

static ChainId chain_from_json(const ordered_json& j) {
    return j.get<std::string>() == "A" ? ChainId::A : ChainId::B;
}

static TraceEventBody body_from_json(const ordered_json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "block") {
        BlockEvent b;
        b.chain = chain_from_json(j.at("chain"));
        b.height = j.at("height").get<Height>();
        for (const auto& t : j.at("txs")) {
            TxSummary tx;
            tx.id = hash_from_hex(t.at("id").get<std::string>());
            tx.submitter = Address{t.at("submitter").get<std::uint64_t>()};
            tx.kind = payload_from_name(t.at("kind").get<std::string>());
            tx.gas_price = t.at("gas_price").get<Tokens>();
            tx.gas_units = t.at("gas_units").get<Tokens>();
            tx.reverted = t.at("reverted").get<bool>();
            if (t.contains("reason")) tx.reason = err_from_name(t.at("reason").get<std::string>());
            if (t.contains("task")) tx.task = hash_from_hex(t.at("task").get<std::string>());
            b.txs.push_back(std::move(tx));
        }
        return b;
    }
    if (type == "ledger") {
        LedgerEvent e;
        e.kind = ledger_from_name(j.at("kind").get<std::string>());
        e.chain = chain_from_json(j.at("chain"));
        for (const auto& d : j.at("deltas"))
            e.deltas.emplace_back(Address{d.at("addr").get<std::uint64_t>()}, d.at("delta").get<Tokens>());
        e.minted = j.at("minted").get<Tokens>();
        e.burned = j.at("burned").get<Tokens>();
        e.escrow_fee_delta = j.at("escrow_fee").get<Tokens>();
        e.escrow_principal_delta = j.at("escrow_principal").get<Tokens>();
        e.collateral_delta = j.at("collateral").get<Tokens>();
        if (j.contains("task")) e.task = hash_from_hex(j.at("task").get<std::string>());
        if (j.contains("relayer")) e.relayer = j.at("relayer").get<RelayerId>();
        return e;
    }
    if (type == "task") {
        TaskLifecycleEvent e;
        e.task = hash_from_hex(j.at("task").get<std::string>());
        e.phase = phase_from_name(j.at("phase").get<std::string>());
        e.chain = chain_from_json(j.at("chain"));
        e.height = j.at("height").get<Height>();
        e.assignees = j.at("assignees").get<std::vector<RelayerId>>();
        if (j.contains("deliverer")) e.deliverer = Address{j.at("deliverer").get<std::uint64_t>()};
        if (j.contains("request_submit_time")) e.request_submit_time = j.at("request_submit_time").get<TimeUs>();
        if (j.contains("fee")) e.fee = j.at("fee").get<Tokens>();
        if (j.contains("fee_below_profitable")) e.fee_below_profitable = j.at("fee_below_profitable").get<bool>();
        return e;
    }
    if (type == "assignment") {
        AssignmentEvent e;
        e.task = hash_from_hex(j.at("task").get<std::string>());
        e.assignees = j.at("assignees").get<std::vector<RelayerId>>();
        e.height = j.at("height").get<Height>();
        e.chain = chain_from_json(j.at("chain"));
        return e;
    }
    if (type == "action") {
        AgentActionEvent e;
        e.agent = j.at("agent").get<std::string>();
        e.kind = payload_from_name(j.at("kind").get<std::string>());
        if (j.contains("task")) e.task = hash_from_hex(j.at("task").get<std::string>());
        e.submit_time = j.at("submit_time").get<TimeUs>();
        e.chain = chain_from_json(j.at("chain"));
        return e;
    }
    if (type == "violation") {
        ViolationEvent e;
        e.what = j.at("what").get<std::string>();
        e.chain = chain_from_json(j.at("chain"));
        e.height = j.at("height").get<Height>();
        return e;
    }
    throw std::invalid_argument("unknown trace event type: " + type);
}

std::string to_ndjson(const RunTrace& trace) {
    std::ostringstream out;
    ordered_json meta;
    meta["type"] = "meta";
    meta["seed"] = trace.meta.seed;
    meta["duration_us"] = trace.meta.duration;
    meta["allocation_mode"] = trace.meta.allocation_mode;
    meta["coordinated_relayers"] = trace.meta.coordinated_relayers;
    meta["offered_rate"] = trace.meta.offered_rate;
    ordered_json agents = ordered_json::array();
    for (const auto& a : trace.meta.agents)
        agents.push_back(ordered_json{{"name", a.name}, {"address", a.address.v}, {"strategy", a.strategy}});
    meta["agents"] = std::move(agents);
    meta["genesis_balances"] = balances_to_json(trace.meta.genesis_balances);
    meta["final_balances"] = balances_to_json(trace.meta.final_balances);
    meta["conservation_ok"] = trace.meta.conservation_ok;
    out << meta.dump() << '\n';
    for (const auto& ev : trace.events) out << event_to_json(ev).dump() << '\n';
    return out.str();
}

void write_ndjson(const RunTrace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open trace output: " + path);
    f << to_ndjson(trace);
}

RunTrace trace_from_ndjson(const std::string& text) {
    RunTrace trace;
    std::istringstream in(text);
    std::string line;
    bool have_meta = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            throw std::invalid_argument(std::string("malformed trace line: ") + e.what());
        }
        const std::string type = j.at("type").get<std::string>();
        if (type == "meta") {
            if (have_meta) throw std::invalid_argument("duplicate meta line in trace");
            have_meta = true;
            trace.meta.seed = j.at("seed").get<std::uint64_t>();
            trace.meta.duration = j.at("duration_us").get<TimeUs>();
            trace.meta.allocation_mode = j.at("allocation_mode").get<std::string>();
            trace.meta.coordinated_relayers = j.at("coordinated_relayers").get<int>();
            trace.meta.offered_rate = j.at("offered_rate").get<double>();
            for (const auto& a : j.at("agents"))
                trace.meta.agents.push_back({a.at("name").get<std::string>(),
                                             Address{a.at("address").get<std::uint64_t>()},
                                             a.at("strategy").get<std::string>()});
            trace.meta.genesis_balances = balances_from_json(j.at("genesis_balances"));
            trace.meta.final_balances = balances_from_json(j.at("final_balances"));
            trace.meta.conservation_ok = j.at("conservation_ok").get<bool>();
        } else {
            TraceEvent ev;
            ev.at = j.at("at").get<TimeUs>();
            ev.seq = j.at("seq").get<std::uint64_t>();
            ev.body = body_from_json(j);
            trace.events.push_back(std::move(ev));
        }
    }
    if (!have_meta) throw std::invalid_argument("trace has no meta line");
    return trace;
}

std::map<ChainId, std::map<Address, Tokens>> replay_balances(const RunTrace& trace) {
    auto balances = trace.meta.genesis_balances;
    for (const auto& ev : trace.events) {
        const auto* led = std::get_if<LedgerEvent>(&ev.body);
        if (!led) continue;
        auto& chain = balances[led->chain];
        for (const auto& [addr, delta] : led->deltas) chain[addr] += delta;
    }
    return balances;
}

bool balances_match(const std::map<ChainId, std::map<Address, Tokens>>& x,
                    const std::map<ChainId, std::map<Address, Tokens>>& y) {
    auto covered = [](const auto& lhs, const auto& rhs) {
        for (const auto& [chain, accounts] : lhs) {
            const auto other = rhs.find(chain);
            for (const auto& [addr, amount] : accounts) {
                Tokens expect = 0;
                if (other != rhs.end()) {
                    const auto hit = other->second.find(addr);
                    if (hit != other->second.end()) expect = hit->second;
                }
                if (amount != expect) return false;
            }
        }
        return true;
    };
    return covered(x, y) && covered(y, x);
}

}  // namespace relaysim
