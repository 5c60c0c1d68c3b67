#include "relaysim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "json.hpp"

namespace relaysim {

using ordered_json = nlohmann::ordered_json;

namespace {

struct TaskView {
    TimeUs request_submit{0};
    TimeUs requested_at{0};
    bool requested{false};
    bool delivered{false};
    bool acked{false};
    bool timed_out{false};
    Address deliverer;
};

LatencyStats latency_stats(std::vector<TimeUs> samples) {
    LatencyStats out;
    if (samples.empty()) return out;
    std::sort(samples.begin(), samples.end());
    out.count = static_cast<int>(samples.size());
    out.min_s = us_to_secs(samples.front());
    out.max_s = us_to_secs(samples.back());
    const std::size_t n = samples.size();
    out.median_s = n % 2 ? us_to_secs(samples[n / 2])
                         : (us_to_secs(samples[n / 2 - 1]) + us_to_secs(samples[n / 2])) / 2.0;
    const std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n), nearest-rank
    out.p95_s = us_to_secs(samples[rank - 1]);
    return out;
}

}  // namespace

Result<MetricsReport> compute(const RunTrace& trace) {
    MetricsReport r;
    r.duration_s = us_to_secs(trace.meta.duration);
    r.offered_rate = trace.meta.offered_rate;
    r.coordinated_relayers = trace.meta.coordinated_relayers;
    r.conservation_ok = trace.meta.conservation_ok;

    std::map<Address, std::string> roster;
    for (const auto& a : trace.meta.agents) {
        roster[a.address] = a.name;
        RelayerMetrics& m = r.per_relayer[a.name];
        m.address = a.address;
        m.strategy = a.strategy;
    }
    auto by_address = [&](Address a) -> RelayerMetrics* {
        const auto hit = roster.find(a);
        return hit == roster.end() ? nullptr : &r.per_relayer[hit->second];
    };
    std::map<RelayerId, Address> owner_of;

    std::map<Hash256, TaskView> tasks;
    std::vector<TimeUs> latencies;
    std::map<Address, int> acked_by;
    TimeUs delay_min = 0, delay_max = 0;

    for (const auto& ev : trace.events) {
        if (const auto* block = std::get_if<BlockEvent>(&ev.body)) {
            for (const auto& tx : block->txs) {
                const Tokens gas = tx.gas_units * tx.gas_price;
                r.miner_income += gas;
                RelayerMetrics* m = by_address(tx.submitter);
                if (m) m->gas_spent += gas;
                if (tx.reverted) {
                    if (m) m->reverted += 1;
                    if (tx.reason == Err::DuplicateDelivery) r.duplicate_reverts += 1;
                } else if (tx.kind == PayloadKind::DeliverTx && m) {
                    m->deliveries += 1;
                }
            }
        } else if (const auto* life = std::get_if<TaskLifecycleEvent>(&ev.body)) {
            TaskView& t = tasks[life->task];
            switch (life->phase) {
                case TaskPhase::Requested:
                    if (t.requested) return Err::MalformedTrace;
                    t.requested = true;
                    t.request_submit = life->request_submit_time;
                    t.requested_at = ev.at;
                    r.requested += 1;
                    break;
                case TaskPhase::Delivered:
                    if (!t.requested || t.delivered) return Err::MalformedTrace;
                    t.delivered = true;
                    t.deliverer = life->deliverer;
                    r.delivered += 1;
                    break;
                case TaskPhase::Acked:
                    if (!t.delivered || t.acked || t.timed_out) return Err::MalformedTrace;
                    t.acked = true;
                    r.acked += 1;
                    latencies.push_back(ev.at - t.request_submit);
                    acked_by[t.deliverer] += 1;
                    if (RelayerMetrics* m = by_address(t.deliverer)) m->acked_deliveries += 1;
                    break;
                case TaskPhase::TimedOut:
                    if (!t.requested || t.acked || t.timed_out) return Err::MalformedTrace;
                    t.timed_out = true;
                    r.timed_out += 1;
                    break;
            }
        } else if (const auto* assign = std::get_if<AssignmentEvent>(&ev.body)) {
            const auto hit = tasks.find(assign->task);
            if (hit == tasks.end() || !hit->second.requested) return Err::MalformedTrace;
            for (RelayerId id : assign->assignees) r.allocation_histogram[id] += 1;
            const TimeUs delay = ev.at - hit->second.requested_at;
            if (r.assignments == 0 || delay < delay_min) delay_min = delay;
            if (r.assignments == 0 || delay > delay_max) delay_max = delay;
            r.assignments += 1;
        } else if (const auto* led = std::get_if<LedgerEvent>(&ev.body)) {
            switch (led->kind) {
                case LedgerKind::CollateralLock:
                    if (!led->deltas.empty()) owner_of[led->relayer] = led->deltas[0].first;
                    break;
                case LedgerKind::FeeRelease:
                    for (const auto& [addr, delta] : led->deltas) {
                        if (delta <= 0) continue;
                        r.fees_released += delta;
                        if (RelayerMetrics* m = by_address(addr))
                            m->rewards += delta;
                        else
                            r.rewards_unattributed += delta;
                    }
                    break;
                case LedgerKind::ReporterReward:
                    for (const auto& [addr, delta] : led->deltas)
                        if (delta > 0)
                            if (RelayerMetrics* m = by_address(addr)) m->reporter_income += delta;
                    break;
                case LedgerKind::AllocatorReward:
                    for (const auto& [addr, delta] : led->deltas)
                        if (delta > 0)
                            if (RelayerMetrics* m = by_address(addr)) m->allocator_income += delta;
                    break;
                case LedgerKind::Slash: {
                    r.slashed_total += -led->collateral_delta;
                    const auto owner = owner_of.find(led->relayer);
                    if (owner != owner_of.end())
                        if (RelayerMetrics* m = by_address(owner->second))
                            m->slashed += -led->collateral_delta;
                    break;
                }
                case LedgerKind::TimeoutRefund:
                case LedgerKind::UserSlashShare:
                    for (const auto& [addr, delta] : led->deltas)
                        if (delta > 0) r.refunds += delta;
                    break;
                default:
                    break;
            }
            r.burned += led->burned;
        }
    }

    for (auto& [name, m] : r.per_relayer) {
        const auto hit =
            std::find_if(owner_of.begin(), owner_of.end(),
                         [&](const auto& kv) { return kv.second == m.address; });
        if (hit != owner_of.end()) m.relayer_id = hit->first;
        m.net = m.rewards + m.reporter_income + m.allocator_income - m.gas_spent - m.slashed;
    }

    r.throughput = r.duration_s > 0 ? r.acked / r.duration_s : 0.0;
    r.latency = latency_stats(std::move(latencies));
    r.assignment_delay_min_s = us_to_secs(delay_min);
    r.assignment_delay_max_s = us_to_secs(delay_max);
    if (r.acked > 0) {
        int top = 0;
        for (const auto& [addr, n] : acked_by) top = std::max(top, n);
        r.delivery_share_top1 = static_cast<double>(top) / r.acked;
    }
    r.replay_matches = balances_match(replay_balances(trace), trace.meta.final_balances);
    return r;
}

Result<bool> compare_scalability(const std::vector<MetricsReport>& reports) {
    if (reports.size() < 2) return Err::IncomparableConfigs;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        if (reports[i].duration_s != reports[0].duration_s) return Err::IncomparableConfigs;
        if (reports[i].offered_rate != reports[0].offered_rate) return Err::IncomparableConfigs;
        if (reports[i].coordinated_relayers <= reports[i - 1].coordinated_relayers)
            return Err::IncomparableConfigs;
    }
    const long long offered =
        std::llround(reports[0].offered_rate * reports[0].duration_s);
    for (std::size_t i = 1; i < reports.size(); ++i) {
        const bool exhausted = reports[i - 1].acked >= offered;
        if (exhausted) {
            if (reports[i].acked < reports[i - 1].acked) return false;
        } else {
            if (reports[i].acked <= reports[i - 1].acked) return false;
        }
    }
    return true;
}

double chi_square_uniform_p(const std::vector<long long>& counts) {
    if (counts.size() < 2) return 1.0;
    long long total = 0;
    for (long long c : counts) total += c;
    if (total == 0) return 1.0;
    const double expected = static_cast<double>(total) / counts.size();
    double stat = 0;
    for (long long c : counts) {
        const double d = c - expected;
        stat += d * d / expected;
    }
    if (stat == 0) return 1.0;
    boost::math::chi_squared dist(static_cast<double>(counts.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

namespace {

ordered_json relayer_to_json(const std::string& name, const RelayerMetrics& m) {
    ordered_json j;
    j["name"] = name;
    j["address"] = m.address.v;
    j["relayer_id"] = m.relayer_id;
    j["strategy"] = m.strategy;
    j["rewards"] = m.rewards;
    j["reporter_income"] = m.reporter_income;
    j["allocator_income"] = m.allocator_income;
    j["gas_spent"] = m.gas_spent;
    j["slashed"] = m.slashed;
    j["net"] = m.net;
    j["deliveries"] = m.deliveries;
    j["acked_deliveries"] = m.acked_deliveries;
    j["reverted"] = m.reverted;
    return j;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& r) {
    ordered_json j;
    j["duration_s"] = r.duration_s;
    j["offered_rate"] = r.offered_rate;
    j["coordinated_relayers"] = r.coordinated_relayers;
    j["requested"] = r.requested;
    j["delivered"] = r.delivered;
    j["acked"] = r.acked;
    j["timed_out"] = r.timed_out;
    j["throughput"] = r.throughput;
    j["latency"] = {{"count", r.latency.count},
                    {"min_s", r.latency.min_s},
                    {"median_s", r.latency.median_s},
                    {"p95_s", r.latency.p95_s},
                    {"max_s", r.latency.max_s}};
    j["per_relayer"] = ordered_json::array();
    for (const auto& [name, m] : r.per_relayer) j["per_relayer"].push_back(relayer_to_json(name, m));
    j["duplicate_reverts"] = r.duplicate_reverts;
    j["allocation_histogram"] = ordered_json::object();
    for (const auto& [id, n] : r.allocation_histogram)
        j["allocation_histogram"][std::to_string(id)] = n;
    j["assignments"] = r.assignments;
    j["assignment_delay_min_s"] = r.assignment_delay_min_s;
    j["assignment_delay_max_s"] = r.assignment_delay_max_s;
    j["delivery_share_top1"] = r.delivery_share_top1;
    j["fees_released"] = r.fees_released;
    j["rewards_unattributed"] = r.rewards_unattributed;
    j["miner_income"] = r.miner_income;
    j["burned"] = r.burned;
    j["refunds"] = r.refunds;
    j["slashed_total"] = r.slashed_total;
    j["conservation_ok"] = r.conservation_ok;
    j["replay_matches"] = r.replay_matches;
    return j.dump(2);
}

std::string metrics_to_csv(const MetricsReport& r) {
    std::ostringstream out;
    out << "section,name,metric,value\n";
    auto row = [&](const char* section, const std::string& name, const char* metric,
                   const auto& value) { out << section << ',' << name << ',' << metric << ',' << value << '\n'; };
    row("run", "", "duration_s", r.duration_s);
    row("run", "", "offered_rate", r.offered_rate);
    row("run", "", "coordinated_relayers", r.coordinated_relayers);
    row("run", "", "requested", r.requested);
    row("run", "", "delivered", r.delivered);
    row("run", "", "acked", r.acked);
    row("run", "", "timed_out", r.timed_out);
    row("run", "", "throughput", r.throughput);
    row("run", "", "latency_count", r.latency.count);
    row("run", "", "latency_min_s", r.latency.min_s);
    row("run", "", "latency_median_s", r.latency.median_s);
    row("run", "", "latency_p95_s", r.latency.p95_s);
    row("run", "", "latency_max_s", r.latency.max_s);
    row("run", "", "duplicate_reverts", r.duplicate_reverts);
    row("run", "", "assignments", r.assignments);
    row("run", "", "assignment_delay_min_s", r.assignment_delay_min_s);
    row("run", "", "assignment_delay_max_s", r.assignment_delay_max_s);
    row("run", "", "delivery_share_top1", r.delivery_share_top1);
    row("run", "", "fees_released", r.fees_released);
    row("run", "", "rewards_unattributed", r.rewards_unattributed);
    row("run", "", "miner_income", r.miner_income);
    row("run", "", "burned", r.burned);
    row("run", "", "refunds", r.refunds);
    row("run", "", "slashed_total", r.slashed_total);
    row("run", "", "conservation_ok", r.conservation_ok);
    row("run", "", "replay_matches", r.replay_matches);
    for (const auto& [name, m] : r.per_relayer) {
        row("relayer", name, "address", m.address.v);
        row("relayer", name, "relayer_id", m.relayer_id);
        row("relayer", name, "strategy", m.strategy);
        row("relayer", name, "rewards", m.rewards);
        row("relayer", name, "reporter_income", m.reporter_income);
        row("relayer", name, "allocator_income", m.allocator_income);
        row("relayer", name, "gas_spent", m.gas_spent);
        row("relayer", name, "slashed", m.slashed);
        row("relayer", name, "net", m.net);
        row("relayer", name, "deliveries", m.deliveries);
        row("relayer", name, "acked_deliveries", m.acked_deliveries);
        row("relayer", name, "reverted", m.reverted);
    }
    for (const auto& [id, n] : r.allocation_histogram)
        row("allocation", std::to_string(id), "assigned", n);
    return out.str();
}

}  // namespace relaysim
