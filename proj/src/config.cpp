#include "relaysim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "relaysim/coordinator.hpp"
#include "relaysim/relayer.hpp"

namespace relaysim {

using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config error at " + where + ": " + what);
}

void reject_unknown(const ordered_json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where, "expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.contains(key)) bad(where + "." + key, "unknown key");
}

template <typename T>
T number(const ordered_json& j, const std::string& where, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) bad(where + "." + key, "expected a number");
    return v.get<T>();
}

bool boolean(const ordered_json& j, const std::string& where, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean()) bad(where + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string text(const ordered_json& j, const std::string& where, const char* key,
                 const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_string()) bad(where + "." + key, "expected a string");
    return v.get<std::string>();
}

TimeUs seconds(const ordered_json& j, const std::string& where, const char* key, TimeUs fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) bad(where + "." + key, "expected seconds as a number");
    return secs_to_us(v.get<double>());
}

ChainConfig chain_from(const ordered_json& j, const std::string& where) {
    reject_unknown(j, where, {"block_interval_s", "genesis"});
    ChainConfig c;
    c.block_interval = seconds(j, where, "block_interval_s", c.block_interval);
    if (j.contains("genesis")) {
        if (!j.at("genesis").is_array()) bad(where + ".genesis", "expected an array");
        for (const auto& g : j.at("genesis")) {
            reject_unknown(g, where + ".genesis[]", {"address", "amount"});
            GenesisEntry e;
            e.address = Address{number<std::uint64_t>(g, where + ".genesis[]", "address", 0)};
            e.amount = number<Tokens>(g, where + ".genesis[]", "amount", 0);
            c.genesis.push_back(e);
        }
    }
    return c;
}

CoordinatorParams params_from(const ordered_json& j) {
    const std::string where = "params";
    reject_unknown(j, where,
                   {"collateral_required", "collateral_floor", "slash_per_timeout",
                    "reporter_share", "user_refund_share", "unbond_delay_k", "redundancy_r",
                    "allocator_reward", "allocation"});
    CoordinatorParams p;
    p.collateral_required = number<Tokens>(j, where, "collateral_required", p.collateral_required);
    p.collateral_floor = number<Tokens>(j, where, "collateral_floor", p.collateral_floor);
    p.slash_per_timeout = number<Tokens>(j, where, "slash_per_timeout", p.slash_per_timeout);
    p.reporter_share = number<double>(j, where, "reporter_share", p.reporter_share);
    p.user_refund_share = number<double>(j, where, "user_refund_share", p.user_refund_share);
    p.unbond_delay_k = number<Height>(j, where, "unbond_delay_k", p.unbond_delay_k);
    p.redundancy_r = number<int>(j, where, "redundancy_r", p.redundancy_r);
    p.allocator_reward = number<Tokens>(j, where, "allocator_reward", p.allocator_reward);
    if (j.contains("allocation")) {
        auto mode = allocation_mode_from_name(text(j, where, "allocation", ""));
        if (!mode.ok()) bad(where + ".allocation", "expected competitive, at-creation or validated");
        p.allocation = mode.value();
    }
    return p;
}

CostTable costs_from(const ordered_json& j) {
    const std::string where = "costs";
    reject_unknown(j, where,
                   {"register", "withdraw", "transfer", "assign", "deliver", "prove", "timeout",
                    "plain"});
    CostTable c;
    c.register_units = number<Tokens>(j, where, "register", c.register_units);
    c.withdraw_units = number<Tokens>(j, where, "withdraw", c.withdraw_units);
    c.transfer_units = number<Tokens>(j, where, "transfer", c.transfer_units);
    c.assign_units = number<Tokens>(j, where, "assign", c.assign_units);
    c.deliver_units = number<Tokens>(j, where, "deliver", c.deliver_units);
    c.prove_units = number<Tokens>(j, where, "prove", c.prove_units);
    c.timeout_units = number<Tokens>(j, where, "timeout", c.timeout_units);
    c.plain_units = number<Tokens>(j, where, "plain", c.plain_units);
    return c;
}

WorkloadConfig workload_from(const ordered_json& j) {
    const std::string where = "workload";
    reject_unknown(j, where,
                   {"user", "funding", "gas_price", "amount_jitter", "constant", "bursts"});
    WorkloadConfig w;
    w.user = Address{number<std::uint64_t>(j, where, "user", w.user.v)};
    w.funding = number<Tokens>(j, where, "funding", w.funding);
    w.gas_price = number<Tokens>(j, where, "gas_price", w.gas_price);
    w.amount_jitter = number<Tokens>(j, where, "amount_jitter", w.amount_jitter);
    if (j.contains("constant")) {
        const auto& c = j.at("constant");
        const std::string cw = where + ".constant";
        reject_unknown(c, cw, {"per_second", "start_s", "stop_s", "amount", "fee", "timeout_blocks"});
        w.constant.per_second = number<double>(c, cw, "per_second", w.constant.per_second);
        w.constant.start = seconds(c, cw, "start_s", w.constant.start);
        w.constant.stop = seconds(c, cw, "stop_s", w.constant.stop);
        w.constant.amount = number<Tokens>(c, cw, "amount", w.constant.amount);
        w.constant.fee = number<Tokens>(c, cw, "fee", w.constant.fee);
        w.constant.timeout_blocks = number<Height>(c, cw, "timeout_blocks", w.constant.timeout_blocks);
    }
    if (j.contains("bursts")) {
        if (!j.at("bursts").is_array()) bad(where + ".bursts", "expected an array");
        for (const auto& b : j.at("bursts")) {
            const std::string bw = where + ".bursts[]";
            reject_unknown(b, bw, {"at_s", "count", "amount", "fee", "timeout_blocks"});
            BurstSpec s;
            s.at = seconds(b, bw, "at_s", s.at);
            s.count = number<int>(b, bw, "count", s.count);
            s.amount = number<Tokens>(b, bw, "amount", s.amount);
            s.fee = number<Tokens>(b, bw, "fee", s.fee);
            s.timeout_blocks = number<Height>(b, bw, "timeout_blocks", s.timeout_blocks);
            w.bursts.push_back(s);
        }
    }
    return w;
}

AgentConfig agent_from(const ordered_json& j) {
    AgentConfig a;
    const std::string where = "agents[" + text(j, "agents[]", "name", "?") + "]";
    reject_unknown(j, where,
                   {"name", "strategy", "address", "relayer_id", "gas_price", "overbid_premium",
                    "subset_batch", "withdraw_at_s", "scan_latency_s", "max_tasks_per_cycle",
                    "tick_interval_s", "allocator", "funding_a", "funding_b"});
    a.name = text(j, where, "name", "");
    if (a.name.empty()) bad(where + ".name", "required");
    if (j.contains("strategy")) {
        auto s = strategy_from_name(text(j, where, "strategy", ""));
        if (!s.ok()) bad(where + ".strategy", "unknown strategy");
        a.strategy = s.value();
    }
    a.address = Address{number<std::uint64_t>(j, where, "address", 0)};
    a.relayer_id = number<RelayerId>(j, where, "relayer_id", a.relayer_id);
    a.gas_price = number<Tokens>(j, where, "gas_price", a.gas_price);
    a.overbid_premium = number<Tokens>(j, where, "overbid_premium", a.overbid_premium);
    a.subset_batch = number<int>(j, where, "subset_batch", a.subset_batch);
    a.withdraw_at = seconds(j, where, "withdraw_at_s", a.withdraw_at);
    a.scan_latency = seconds(j, where, "scan_latency_s", a.scan_latency);
    a.max_tasks_per_cycle = number<int>(j, where, "max_tasks_per_cycle", a.max_tasks_per_cycle);
    a.tick_interval = seconds(j, where, "tick_interval_s", a.tick_interval);
    a.allocator = boolean(j, where, "allocator", a.allocator);
    a.funding_a = number<Tokens>(j, where, "funding_a", a.funding_a);
    a.funding_b = number<Tokens>(j, where, "funding_b", a.funding_b);
    return a;
}

}  // namespace

SimConfig config_from_json(const std::string& textual) {
    ordered_json j;
    try {
        j = ordered_json::parse(textual);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config is not valid json: ") + e.what());
    }
    reject_unknown(j, "config",
                   {"seed", "duration_s", "network_delay_bound_s", "fifo_mempool", "chain_a",
                    "chain_b", "params", "costs", "workload", "agents"});
    SimConfig cfg;
    cfg.seed = number<std::uint64_t>(j, "config", "seed", cfg.seed);
    cfg.duration = seconds(j, "config", "duration_s", cfg.duration);
    cfg.network_delay_bound =
        seconds(j, "config", "network_delay_bound_s", cfg.network_delay_bound);
    cfg.fifo_mempool = boolean(j, "config", "fifo_mempool", cfg.fifo_mempool);
    if (j.contains("chain_a")) cfg.chain_a = chain_from(j.at("chain_a"), "chain_a");
    if (j.contains("chain_b")) cfg.chain_b = chain_from(j.at("chain_b"), "chain_b");
    if (j.contains("params")) cfg.params = params_from(j.at("params"));
    if (j.contains("costs")) cfg.costs = costs_from(j.at("costs"));
    if (j.contains("workload")) cfg.workload = workload_from(j.at("workload"));
    if (j.contains("agents")) {
        if (!j.at("agents").is_array()) bad("agents", "expected an array");
        for (const auto& a : j.at("agents")) cfg.agents.push_back(agent_from(a));
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

std::string config_to_json(const SimConfig& cfg) {
    ordered_json j;
    j["seed"] = cfg.seed;
    j["duration_s"] = us_to_secs(cfg.duration);
    j["network_delay_bound_s"] = us_to_secs(cfg.network_delay_bound);
    j["fifo_mempool"] = cfg.fifo_mempool;
    for (const char* key : {"chain_a", "chain_b"}) {
        const ChainConfig& c = key == std::string("chain_a") ? cfg.chain_a : cfg.chain_b;
        ordered_json cj;
        cj["block_interval_s"] = us_to_secs(c.block_interval);
        cj["genesis"] = ordered_json::array();
        for (const auto& g : c.genesis)
            cj["genesis"].push_back({{"address", g.address.v}, {"amount", g.amount}});
        j[key] = std::move(cj);
    }
    j["params"] = {{"collateral_required", cfg.params.collateral_required},
                   {"collateral_floor", cfg.params.collateral_floor},
                   {"slash_per_timeout", cfg.params.slash_per_timeout},
                   {"reporter_share", cfg.params.reporter_share},
                   {"user_refund_share", cfg.params.user_refund_share},
                   {"unbond_delay_k", cfg.params.unbond_delay_k},
                   {"redundancy_r", cfg.params.redundancy_r},
                   {"allocator_reward", cfg.params.allocator_reward},
                   {"allocation", allocation_mode_name(cfg.params.allocation)}};
    j["costs"] = {{"register", cfg.costs.register_units}, {"withdraw", cfg.costs.withdraw_units},
                  {"transfer", cfg.costs.transfer_units}, {"assign", cfg.costs.assign_units},
                  {"deliver", cfg.costs.deliver_units},   {"prove", cfg.costs.prove_units},
                  {"timeout", cfg.costs.timeout_units},   {"plain", cfg.costs.plain_units}};
    ordered_json w;
    w["user"] = cfg.workload.user.v;
    w["funding"] = cfg.workload.funding;
    w["gas_price"] = cfg.workload.gas_price;
    w["amount_jitter"] = cfg.workload.amount_jitter;
    w["constant"] = {{"per_second", cfg.workload.constant.per_second},
                     {"start_s", us_to_secs(cfg.workload.constant.start)},
                     {"stop_s", us_to_secs(cfg.workload.constant.stop)},
                     {"amount", cfg.workload.constant.amount},
                     {"fee", cfg.workload.constant.fee},
                     {"timeout_blocks", cfg.workload.constant.timeout_blocks}};
    w["bursts"] = ordered_json::array();
    for (const auto& b : cfg.workload.bursts)
        w["bursts"].push_back({{"at_s", us_to_secs(b.at)},
                               {"count", b.count},
                               {"amount", b.amount},
                               {"fee", b.fee},
                               {"timeout_blocks", b.timeout_blocks}});
    j["workload"] = std::move(w);
    j["agents"] = ordered_json::array();
    for (const auto& a : cfg.agents)
        j["agents"].push_back({{"name", a.name},
                               {"strategy", strategy_name(a.strategy)},
                               {"address", a.address.v},
                               {"relayer_id", a.relayer_id},
                               {"gas_price", a.gas_price},
                               {"overbid_premium", a.overbid_premium},
                               {"subset_batch", a.subset_batch},
                               {"withdraw_at_s", us_to_secs(a.withdraw_at)},
                               {"scan_latency_s", us_to_secs(a.scan_latency)},
                               {"max_tasks_per_cycle", a.max_tasks_per_cycle},
                               {"tick_interval_s", us_to_secs(a.tick_interval)},
                               {"allocator", a.allocator},
                               {"funding_a", a.funding_a},
                               {"funding_b", a.funding_b}});
    return j.dump(2);
}

}  // namespace relaysim
