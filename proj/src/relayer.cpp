#include "relaysim/relayer.hpp"

#include <algorithm>

#include "relaysim/coordinator.hpp"

namespace relaysim {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::CompetitiveDefault: return "competitive";
        case Strategy::CompetitiveOverbid: return "overbid";
        case Strategy::CompetitiveSubsetFirst: return "subset-first";
        case Strategy::Coordinated: return "coordinated";
        case Strategy::TaskThief: return "task-thief";
        case Strategy::Abandoner: return "abandoner";
        case Strategy::SilentAfterWithdraw: return "silent-after-withdraw";
        case Strategy::TimeoutReporter: return "timeout-reporter";
    }
    return "?";
}

Result<Strategy> strategy_from_name(const std::string& s) {
    if (s == "competitive") return Strategy::CompetitiveDefault;
    if (s == "overbid") return Strategy::CompetitiveOverbid;
    if (s == "subset-first") return Strategy::CompetitiveSubsetFirst;
    if (s == "coordinated") return Strategy::Coordinated;
    if (s == "task-thief") return Strategy::TaskThief;
    if (s == "abandoner") return Strategy::Abandoner;
    if (s == "silent-after-withdraw") return Strategy::SilentAfterWithdraw;
    if (s == "timeout-reporter") return Strategy::TimeoutReporter;
    return Err::ConfigError;
}

Tokens estimate_profit(Tokens fee, const CostTable& costs, Tokens deliver_price,
                       Tokens prove_price) {
    return fee - costs.deliver_units * deliver_price - costs.prove_units * prove_price;
}

namespace {

bool delivers(Strategy s) {
    switch (s) {
        case Strategy::CompetitiveDefault:
        case Strategy::CompetitiveOverbid:
        case Strategy::CompetitiveSubsetFirst:
        case Strategy::Coordinated:
        case Strategy::TaskThief:
        case Strategy::SilentAfterWithdraw:
            return true;
        case Strategy::Abandoner:
        case Strategy::TimeoutReporter:
            return false;
    }
    return false;
}

bool assigned_to(const TaskRecord& t, RelayerId id) {
    return id >= 0 &&
           std::find(t.assignees.begin(), t.assignees.end(), id) != t.assignees.end();
}

struct Candidate {
    const TaskRecord* task;
    ChainId source;
};

void sort_by_age(std::vector<Candidate>& v) {
    std::sort(v.begin(), v.end(), [](const Candidate& x, const Candidate& y) {
        if (x.task->request_height != y.task->request_height)
            return x.task->request_height < y.task->request_height;
        return x.task->id < y.task->id;
    });
}

}  // namespace

StepResult step(const World& w, AgentState& st, TimeUs now) {
    StepResult out;
    out.send_at = now;
    const AgentConfig& cfg = st.cfg;
    if (now < st.busy_until) return out;

    const bool coordinated_like =
        cfg.strategy == Strategy::Coordinated || cfg.strategy == Strategy::SilentAfterWithdraw;

    if (cfg.strategy == Strategy::SilentAfterWithdraw && cfg.withdraw_at > 0 &&
        now >= cfg.withdraw_at) {
        if (!st.withdraw_sent && cfg.relayer_id >= 0) {
            st.withdraw_sent = true;
            out.intents.push_back(
                {ChainId::A, WithdrawCall{cfg.relayer_id}, cfg.gas_price});
        }
        return out;  // silent from here on
    }

    const Tokens deliver_price = cfg.gas_price + (cfg.strategy == Strategy::CompetitiveOverbid
                                                      ? cfg.overbid_premium
                                                      : 0);

    // Delivery scan. Each candidate actually looked at costs scan latency;
    // everything else this cycle piggybacks on the same broadcast.
    int processed = 0;
    if (delivers(cfg.strategy)) {
        std::vector<Candidate> candidates;
        for (ChainId source : {ChainId::A, ChainId::B}) {
            const ChainState& src = w.chain(source);
            const ChainState& dst = w.chain(other_chain(source));
            for (const auto& [id, t] : src.coord.tasks) {
                if (t.phase != TaskPhase::Requested) continue;
                if (st.deliver_attempted.contains(id)) continue;
                if (dst.height >= t.timeout_height) continue;  // cannot land in time
                if (coordinated_like && !assigned_to(t, cfg.relayer_id)) continue;
                if (estimate_profit(t.fee, w.costs, deliver_price, cfg.gas_price) <= 0) continue;
                candidates.push_back({&t, source});
            }
        }
        sort_by_age(candidates);
        std::size_t take = std::min<std::size_t>(candidates.size(), cfg.max_tasks_per_cycle);
        if (cfg.strategy == Strategy::CompetitiveSubsetFirst)
            take = std::min<std::size_t>(take, cfg.subset_batch);
        for (std::size_t i = 0; i < take; ++i) {
            const Candidate& c = candidates[i];
            st.deliver_attempted.insert(c.task->id);
            out.intents.push_back({other_chain(c.source),
                                   DeliverTxCall{c.task->id, w.chain(c.source).height},
                                   deliver_price});
        }
        processed = static_cast<int>(take);
    }

    // Acknowledgements: receipts are already in hand, no scan cost.
    if (delivers(cfg.strategy)) {
        for (ChainId source : {ChainId::A, ChainId::B}) {
            const ChainState& src = w.chain(source);
            const ChainState& dst = w.chain(other_chain(source));
            for (const auto& [id, t] : src.coord.tasks) {
                if (t.phase != TaskPhase::Delivered) continue;
                if (st.prove_attempted.contains(id)) continue;
                auto rc = dst.coord.receipts.find(id);
                if (rc == dst.coord.receipts.end()) continue;
                const bool mine = rc->second.deliverer == cfg.address;
                const bool assigned = assigned_to(t, cfg.relayer_id);
                if (coordinated_like ? !assigned : !mine) continue;
                st.prove_attempted.insert(id);
                out.intents.push_back(
                    {source,
                     ProveDeliveryCall{id, rc->second.hash, dst.height},
                     cfg.gas_price});
            }
        }
    }

    if (cfg.strategy == Strategy::TimeoutReporter) {
        for (ChainId source : {ChainId::A, ChainId::B}) {
            const ChainState& src = w.chain(source);
            const ChainState& dst = w.chain(other_chain(source));
            for (const auto& [id, t] : src.coord.tasks) {
                if (t.phase != TaskPhase::Requested) continue;
                if (dst.height < t.timeout_height) continue;
                if (dst.coord.receipts.contains(id)) continue;
                if (st.report_attempted.contains(id)) continue;
                st.report_attempted.insert(id);
                out.intents.push_back(
                    {source, SubmitTimeoutCall{id, dst.height}, cfg.gas_price});
            }
        }
    }

    // Under validated allocation a designated relayer computes and publishes
    // the assignments it expects the contract to agree with.
    if (cfg.allocator && cfg.relayer_id >= 0 &&
        w.params.allocation == AllocationMode::Validated && !st.withdraw_sent) {
        for (ChainId source : {ChainId::A, ChainId::B}) {
            const ChainState& src = w.chain(source);
            std::vector<Candidate> open;
            for (const auto& [id, t] : src.coord.tasks) {
                if (t.phase != TaskPhase::Requested) continue;
                if (!t.assignees.empty()) continue;
                if (st.publish_attempted.contains(id)) continue;
                open.push_back({&t, source});
            }
            if (open.empty()) continue;
            sort_by_age(open);
            const auto eligible = eligible_view(src.coord, w.params);
            AssignTasksCall call{cfg.relayer_id, {}};
            for (const Candidate& c : open) {
                auto expect = allocate(c.task->id, eligible, w.params.redundancy_r);
                if (!expect.ok()) continue;
                st.publish_attempted.insert(c.task->id);
                call.items.push_back({c.task->id, expect.value()});
            }
            if (!call.items.empty()) out.intents.push_back({source, std::move(call), cfg.gas_price});
        }
    }

    if (processed > 0) {
        out.send_at = now + cfg.scan_latency * processed;
        st.busy_until = out.send_at;
    }
    return out;
}

}  // namespace relaysim
