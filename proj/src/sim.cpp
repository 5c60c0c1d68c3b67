#include "relaysim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include "relaysim/coordinator.hpp"

namespace relaysim {

std::string validate(const SimConfig& cfg) {
    std::ostringstream out;
    if (cfg.duration <= 0) out << "duration: must be positive\n";
    if (cfg.network_delay_bound <= 0) out << "network_delay_bound: must be positive\n";
    if (cfg.chain_a.block_interval <= 0) out << "chain_a.block_interval: must be positive\n";
    if (cfg.chain_b.block_interval <= 0) out << "chain_b.block_interval: must be positive\n";
    const TimeUs slower = std::max(cfg.chain_a.block_interval, cfg.chain_b.block_interval);
    if (slower > 0 && cfg.duration < 10 * slower)
        out << "duration: must cover at least 10 blocks of the slower chain ("
            << us_to_secs(10 * slower) << " s)\n";
    if (cfg.params.reporter_share < 0 || cfg.params.user_refund_share < 0 ||
        cfg.params.reporter_share + cfg.params.user_refund_share > 1.0)
        out << "params: reporter_share and user_refund_share must be nonnegative and sum to at "
               "most 1\n";
    if (cfg.params.redundancy_r < 1) out << "params.redundancy_r: must be at least 1\n";
    if (cfg.params.collateral_required < cfg.params.collateral_floor)
        out << "params: collateral_required below collateral_floor\n";
    if (cfg.workload.constant.per_second < 0) out << "workload.constant.per_second: negative\n";
    if (cfg.workload.gas_price <= 0) out << "workload.gas_price: must be positive\n";
    if (cfg.workload.amount_jitter < 0) out << "workload.amount_jitter: negative\n";
    std::set<std::string> names;
    std::set<Address> addresses;
    std::set<RelayerId> ids;
    for (const auto& a : cfg.agents) {
        if (a.name.empty()) out << "agents: every agent needs a name\n";
        if (!names.insert(a.name).second) out << "agents: duplicate name " << a.name << "\n";
        if (a.address == kMiner || a.address == cfg.workload.user ||
            !addresses.insert(a.address).second)
            out << "agents." << a.name << ": address collides\n";
        if (a.relayer_id >= 0 && !ids.insert(a.relayer_id).second)
            out << "agents." << a.name << ": duplicate relayer id " << a.relayer_id << "\n";
        if (a.gas_price <= 0) out << "agents." << a.name << ": gas_price must be positive\n";
        if (a.scan_latency < 0) out << "agents." << a.name << ": scan_latency negative\n";
        if (a.max_tasks_per_cycle < 1)
            out << "agents." << a.name << ": max_tasks_per_cycle must be at least 1\n";
        if (a.tick_interval <= 0) out << "agents." << a.name << ": tick_interval must be positive\n";
        if (a.subset_batch < 1 && a.strategy == Strategy::CompetitiveSubsetFirst)
            out << "agents." << a.name << ": subset_batch must be at least 1\n";
        if (a.strategy == Strategy::SilentAfterWithdraw && a.relayer_id < 0)
            out << "agents." << a.name << ": silent-after-withdraw needs a relayer id\n";
        if (a.relayer_id >= 0 &&
            a.funding_a < cfg.params.collateral_required +
                              cfg.costs.register_units * a.gas_price)
            out << "agents." << a.name << ": funding_a cannot cover registration\n";
    }
    for (const auto& b : cfg.workload.bursts) {
        if (b.count < 0) out << "workload.bursts: negative count\n";
        if (b.at > cfg.duration) out << "workload.bursts: burst after the end of the run\n";
    }
    return out.str();
}

std::vector<TimeUs> injection_times(const WorkloadConfig& w, TimeUs duration) {
    std::vector<TimeUs> times;
    if (w.constant.per_second > 0) {
        const auto interval = static_cast<TimeUs>(std::llround(1e6 / w.constant.per_second));
        const TimeUs start = w.constant.start > 0 ? w.constant.start : interval;
        const TimeUs stop = w.constant.stop > 0 ? std::min(w.constant.stop, duration) : duration;
        for (TimeUs t = start; t <= stop; t += interval) times.push_back(t);
    }
    for (const auto& b : w.bursts)
        for (int i = 0; i < b.count; ++i) times.push_back(b.at);
    std::sort(times.begin(), times.end());
    return times;
}

std::vector<TransferCall> inject_workload(const WorkloadConfig& w, Height dest_height, TimeUs now,
                                          TimeUs duration) {
    std::vector<TransferCall> out;
    const Address recipient{w.user.v + 1};
    if (w.constant.per_second > 0) {
        const auto interval = static_cast<TimeUs>(std::llround(1e6 / w.constant.per_second));
        const TimeUs start = w.constant.start > 0 ? w.constant.start : interval;
        const TimeUs stop = w.constant.stop > 0 ? std::min(w.constant.stop, duration) : duration;
        if (now >= start && now <= stop && (now - start) % interval == 0)
            out.push_back({recipient, w.constant.amount, w.constant.fee,
                           dest_height + w.constant.timeout_blocks});
    }
    for (const auto& b : w.bursts)
        if (b.at == now)
            for (int i = 0; i < b.count; ++i)
                out.push_back({recipient, b.amount, b.fee, dest_height + b.timeout_blocks});
    return out;
}

namespace {

enum class EvKind : std::uint8_t { TxArrival = 0, Injection = 1, Mint = 2, Tick = 3 };

struct Ev {
    TimeUs at{0};
    EvKind kind{EvKind::Mint};
    std::uint64_t seq{0};
    ChainId chain{ChainId::A};
    int agent{-1};
    Address submitter;
    Payload payload;
    Tokens gas_price{1};
};

struct EvLater {
    bool operator()(const Ev& x, const Ev& y) const {
        if (x.at != y.at) return x.at > y.at;
        if (x.kind != y.kind) return x.kind > y.kind;
        return x.seq > y.seq;
    }
};

Hash256 task_of(const Payload& p) {
    if (const auto* d = std::get_if<DeliverTxCall>(&p)) return d->task;
    if (const auto* pr = std::get_if<ProveDeliveryCall>(&p)) return pr->task;
    if (const auto* t = std::get_if<SubmitTimeoutCall>(&p)) return t->task;
    return Hash256{};
}

Tokens transfer_cost(Tokens amount, Tokens fee, Tokens gas_price, const CostTable& costs) {
    return amount + fee + costs.transfer_units * gas_price;
}

}  // namespace

RunResult run_world(const SimConfig& cfg) {
    const std::string diag = validate(cfg);
    if (!diag.empty()) throw std::invalid_argument("config error:\n" + diag);

    RunResult res;
    World& w = res.world;
    w = make_world(cfg.params, cfg.costs);
    w.fifo_mempool = cfg.fifo_mempool;

    for (const auto& g : cfg.chain_a.genesis) credit_genesis(w, ChainId::A, g.address, g.amount);
    for (const auto& g : cfg.chain_b.genesis) credit_genesis(w, ChainId::B, g.address, g.amount);
    for (const auto& a : cfg.agents) {
        if (a.funding_a > 0) credit_genesis(w, ChainId::A, a.address, a.funding_a);
        if (a.funding_b > 0) credit_genesis(w, ChainId::B, a.address, a.funding_b);
    }
    Rng workload_rng(cfg.seed, "workload");
    Tokens user_funding = cfg.workload.funding;
    if (user_funding == 0) {
        const auto& c = cfg.workload.constant;
        const auto times = injection_times(cfg.workload, cfg.duration);
        Tokens per_burst = 0;
        Tokens burst_n = 0;
        for (const auto& b : cfg.workload.bursts) {
            per_burst +=
                b.count * transfer_cost(b.amount, b.fee, cfg.workload.gas_price, cfg.costs);
            burst_n += b.count;
        }
        const Tokens n_constant = static_cast<Tokens>(times.size()) - burst_n;
        user_funding =
            n_constant * transfer_cost(c.amount, c.fee, cfg.workload.gas_price, cfg.costs) +
            per_burst;
        if (cfg.workload.amount_jitter > 0) {
            Rng preview = workload_rng;
            for (std::size_t i = 0; i < times.size(); ++i)
                user_funding += static_cast<Tokens>(
                    preview.below(static_cast<std::uint64_t>(cfg.workload.amount_jitter) + 1));
        }
    }
    if (user_funding > 0) credit_genesis(w, ChainId::A, cfg.workload.user, user_funding);

    RunTrace& trace = res.trace;
    trace.meta.seed = cfg.seed;
    trace.meta.duration = cfg.duration;
    trace.meta.allocation_mode = allocation_mode_name(cfg.params.allocation);
    trace.meta.genesis_balances[ChainId::A] = w.a.balances;
    trace.meta.genesis_balances[ChainId::B] = w.b.balances;
    {
        const auto times = injection_times(cfg.workload, cfg.duration);
        trace.meta.offered_rate =
            cfg.duration > 0 ? static_cast<double>(times.size()) / us_to_secs(cfg.duration) : 0.0;
    }

    TraceLog log;
    w.trace = &log;

    std::vector<AgentState> agents;
    std::vector<Rng> delay_rng;
    for (const auto& a : cfg.agents) {
        agents.push_back(AgentState{a, 0, false, {}, {}, {}, {}});
        delay_rng.emplace_back(cfg.seed, ("delay:" + a.name).c_str());
        trace.meta.agents.push_back({a.name, a.address, strategy_name(a.strategy)});
        if (a.strategy == Strategy::Coordinated && a.relayer_id >= 0)
            trace.meta.coordinated_relayers += 1;
    }

    // Registration happens before the first block so allocation can start
    // from the very first transfers.
    for (const auto& a : cfg.agents) {
        if (a.relayer_id < 0) continue;
        const Hash256 id = submit_tx(w, ChainId::A, a.address,
                                     RegisterCall{a.relayer_id, cfg.params.collateral_required},
                                     a.gas_price, 0);
        log.append(0, AgentActionEvent{a.name, PayloadKind::Register, id, 0, ChainId::A});
    }

    std::priority_queue<Ev, std::vector<Ev>, EvLater> queue;
    std::uint64_t seq = 0;
    auto push = [&](Ev ev) {
        ev.seq = seq++;
        if (ev.at <= cfg.duration) queue.push(std::move(ev));
    };

    push({cfg.chain_a.block_interval, EvKind::Mint, 0, ChainId::A, -1, {}, PlainCall{}, 1});
    push({cfg.chain_b.block_interval, EvKind::Mint, 0, ChainId::B, -1, {}, PlainCall{}, 1});
    for (int i = 0; i < static_cast<int>(agents.size()); ++i)
        push({agents[i].cfg.tick_interval, EvKind::Tick, 0, ChainId::A, i, {}, PlainCall{}, 1});
    {
        std::vector<TimeUs> times = injection_times(cfg.workload, cfg.duration);
        times.erase(std::unique(times.begin(), times.end()), times.end());
        for (TimeUs t : times) push({t, EvKind::Injection, 0, ChainId::A, -1, {}, PlainCall{}, 1});
    }

    while (!queue.empty()) {
        Ev ev = queue.top();
        queue.pop();
        switch (ev.kind) {
            case EvKind::Mint: {
                mint_block(w, ev.chain, ev.at);
                const TimeUs interval = ev.chain == ChainId::A ? cfg.chain_a.block_interval
                                                               : cfg.chain_b.block_interval;
                push({ev.at + interval, EvKind::Mint, 0, ev.chain, -1, {}, PlainCall{}, 1});
                break;
            }
            case EvKind::Injection: {
                for (TransferCall t :
                     inject_workload(cfg.workload, w.b.height, ev.at, cfg.duration)) {
                    if (cfg.workload.amount_jitter > 0)
                        t.amount += static_cast<Tokens>(workload_rng.below(
                            static_cast<std::uint64_t>(cfg.workload.amount_jitter) + 1));
                    const Hash256 id = submit_tx(w, ChainId::A, cfg.workload.user, t,
                                                 cfg.workload.gas_price, ev.at);
                    log.append(ev.at, AgentActionEvent{"user", PayloadKind::Transfer, id, ev.at,
                                                       ChainId::A});
                }
                break;
            }
            case EvKind::Tick: {
                AgentState& st = agents[ev.agent];
                StepResult r = step(w, st, ev.at);
                for (Intent& intent : r.intents) {
                    const TimeUs arrival =
                        r.send_at + delay_rng[ev.agent].delay(cfg.network_delay_bound);
                    push({arrival, EvKind::TxArrival, 0, intent.chain, ev.agent, st.cfg.address,
                          std::move(intent.payload), intent.gas_price});
                }
                push({ev.at + st.cfg.tick_interval, EvKind::Tick, 0, ChainId::A, ev.agent, {},
                      PlainCall{}, 1});
                break;
            }
            case EvKind::TxArrival: {
                const PayloadKind kind = payload_kind(ev.payload);
                Hash256 task = task_of(ev.payload);
                const Hash256 id =
                    submit_tx(w, ev.chain, ev.submitter, std::move(ev.payload), ev.gas_price,
                              ev.at);
                if (task.is_zero()) task = id;
                log.append(ev.at, AgentActionEvent{agents[ev.agent].cfg.name, kind, task, ev.at,
                                                   ev.chain});
                break;
            }
        }
    }

    w.trace = nullptr;
    trace.meta.final_balances[ChainId::A] = w.a.balances;
    trace.meta.final_balances[ChainId::B] = w.b.balances;
    trace.meta.conservation_ok = w.a.conservation_ok && w.b.conservation_ok;
    trace.events = log.events();
    return res;
}

RunTrace run(const SimConfig& cfg) { return run_world(cfg).trace; }

}  // namespace relaysim
