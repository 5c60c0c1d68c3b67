// Experiment runner. A named preset or a config file goes in; metric reports
// (JSON and CSV) and optional event traces come out. --check turns the run's
// headline properties into a machine verdict for CI.
#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "relaysim/config.hpp"
#include "relaysim/metrics.hpp"
#include "relaysim/scenarios.hpp"
#include "relaysim/sim.hpp"
#include "relaysim/sweep.hpp"
#include "relaysim/trace.hpp"

using namespace relaysim;
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

struct RunOutput {
    std::string label;
    std::uint64_t seed{0};
    MetricsReport report;
};

struct Verdict {
    std::string name;
    bool pass{false};
    std::string detail;
};

std::vector<std::uint64_t> parse_seed_range(const std::string& expr) {
    const auto dots = expr.find("..");
    if (dots == std::string::npos) throw std::invalid_argument("--seeds wants <int>..<int>");
    const std::uint64_t lo = std::stoull(expr.substr(0, dots));
    const std::uint64_t hi = std::stoull(expr.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("--seeds range is reversed");
    if (hi - lo >= 100000) throw std::invalid_argument("--seeds range is too large");
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
}

std::vector<int> parse_relayer_counts(const std::string& csv) {
    std::vector<int> out;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        const int n = std::stoi(item);
        if (n < 1) throw std::invalid_argument("--relayers counts must be >= 1");
        out.push_back(n);
    }
    if (out.empty()) throw std::invalid_argument("--relayers wants a csv of counts");
    return out;
}

const RelayerMetrics* by_strategy(const MetricsReport& r, const std::string& strategy) {
    for (const auto& [name, m] : r.per_relayer)
        if (m.strategy == strategy) return &m;
    return nullptr;
}

bool within_pct(double value, double reference, double pct) {
    return std::fabs(value - reference) <= pct / 100.0 * std::fabs(reference);
}

// One verdict per headline property of the scenario; every run also has to
// close its books (conservation holds and the ledger replays).
std::vector<Verdict> check_runs(const std::string& scenario, const std::vector<RunOutput>& runs) {
    std::vector<Verdict> out;
    for (const auto& r : runs)
        out.push_back({r.label + " closes its books",
                       r.report.conservation_ok && r.report.replay_matches,
                       "conservation and ledger replay"});
    auto per_run = [&](const char* what, auto&& pred) {
        for (const auto& r : runs) {
            auto [ok, detail] = pred(r.report);
            out.push_back({r.label + " " + what, ok, std::move(detail)});
        }
    };
    if (scenario == "scenario1") {
        per_run("settles every task with one winner", [](const MetricsReport& m) {
            const bool ok = m.requested > 0 && m.acked == m.requested &&
                            m.duplicate_reverts == 2 * m.acked;
            return std::pair(ok, std::to_string(m.acked) + "/" + std::to_string(m.requested) +
                                     " acked, " + std::to_string(m.duplicate_reverts) +
                                     " duplicate reverts");
        });
    } else if (scenario == "scenario2") {
        per_run("is swept by the overbidder", [](const MetricsReport& m) {
            const RelayerMetrics* o = by_strategy(m, "overbid");
            const bool ok = o && m.acked == m.requested && o->acked_deliveries == m.acked;
            return std::pair(ok, o ? std::to_string(o->acked_deliveries) + "/" +
                                         std::to_string(m.requested) + " to the overbidder"
                                   : std::string("no overbidder in roster"));
        });
    } else if (scenario == "scenario3") {
        per_run("lets the subset sprinter land early wins", [](const MetricsReport& m) {
            const RelayerMetrics* s = by_strategy(m, "subset-first");
            const bool ok = s && m.acked == m.requested && s->acked_deliveries >= 1;
            return std::pair(ok, s ? std::to_string(s->acked_deliveries) + " of " +
                                         std::to_string(m.acked) + " acked by the sprinter"
                                   : std::string("no subset-first agent in roster"));
        });
    } else if (scenario == "scalability") {
        std::map<std::uint64_t, std::vector<MetricsReport>> coordinated, baseline;
        for (const auto& r : runs) {
            if (r.label.rfind("coordinated-", 0) == 0) coordinated[r.seed].push_back(r.report);
            if (r.label.rfind("baseline-", 0) == 0) baseline[r.seed].push_back(r.report);
        }
        for (const auto& [seed, series] : coordinated) {
            auto cmp = compare_scalability(series);
            std::string tp;
            for (const auto& m : series) tp += (tp.empty() ? "" : " ") + std::to_string(m.acked);
            out.push_back({"seed " + std::to_string(seed) + " coordinated throughput rises",
                           cmp.ok() && cmp.value(), "acked per run: " + tp});
        }
        for (const auto& [seed, series] : baseline) {
            bool flat = !series.empty();
            for (const auto& m : series)
                flat = flat && within_pct(m.throughput, series.front().throughput, 5.0);
            out.push_back({"seed " + std::to_string(seed) + " baseline stays flat",
                           flat, "within 5% of the single-relayer run"});
        }
    } else if (scenario == "fairness") {
        per_run("spreads tasks evenly", [](const MetricsReport& m) {
            std::vector<long long> counts;
            for (const auto& [id, c] : m.allocation_histogram) counts.push_back(c);
            const double mean =
                counts.empty() ? 0 : static_cast<double>(m.assignments) / counts.size();
            bool ok = m.assignments == m.requested && !counts.empty();
            for (long long c : counts) ok = ok && within_pct(static_cast<double>(c), mean, 5.0);
            const double p = chi_square_uniform_p(counts);
            ok = ok && p > 0.01;
            std::ostringstream d;
            d << counts.size() << " relayers, p = " << p;
            return std::pair(ok, d.str());
        });
    } else if (scenario == "accountability") {
        for (const auto& r : runs) {
            const MetricsReport& m = r.report;
            if (r.label.rfind("slashing", 0) == 0) {
                const RelayerMetrics* good = by_strategy(m, "coordinated");
                const RelayerMetrics* quitter = by_strategy(m, "abandoner");
                const RelayerMetrics* ghost = by_strategy(m, "silent-after-withdraw");
                Tokens reporter_income = 0;
                for (const auto& [name, rm] : m.per_relayer)
                    if (rm.strategy == "timeout-reporter") reporter_income += rm.reporter_income;
                const bool ok = m.timed_out > 0 && m.slashed_total > 0 && good &&
                                good->slashed == 0 && quitter && quitter->slashed > 0 && ghost &&
                                ghost->slashed > 0 && reporter_income > 0;
                out.push_back({r.label + " slashes the unresponsive and pays reporters", ok,
                               std::to_string(m.timed_out) + " timeouts, " +
                                   std::to_string(m.slashed_total) + " slashed, reporters earned " +
                                   std::to_string(reporter_income)});
            }
            if (r.label.rfind("theft", 0) == 0) {
                const RelayerMetrics* thief = by_strategy(m, "task-thief");
                const RelayerMetrics* assignee = by_strategy(m, "coordinated");
                const bool ok = m.acked == m.requested && thief && thief->rewards == 0 &&
                                thief->net < 0 && assignee && assignee->rewards > 0 &&
                                m.rewards_unattributed == 0;
                out.push_back({r.label + " pays fees to assignees, not poachers", ok,
                               thief ? "thief net " + std::to_string(thief->net) +
                                           ", assignee rewards " +
                                           std::to_string(assignee ? assignee->rewards : 0)
                                     : std::string("no task-thief in roster")});
            }
        }
    } else if (scenario == "approach2-delay") {
        for (const auto& r : runs) {
            const MetricsReport& m = r.report;
            if (r.label.rfind("validated", 0) == 0) {
                const bool ok = m.assignments > 0 && m.assignments == m.requested &&
                                m.assignment_delay_min_s >= 10.0 - 1e-9;
                out.push_back({r.label + " assigns only after inclusion", ok,
                               "min delay " + std::to_string(m.assignment_delay_min_s) + " s"});
            }
            if (r.label.rfind("at-creation", 0) == 0) {
                const bool ok = m.assignments > 0 && m.assignments == m.requested &&
                                m.assignment_delay_max_s <= 1e-9;
                out.push_back({r.label + " assigns at request time", ok,
                               "max delay " + std::to_string(m.assignment_delay_max_s) + " s"});
            }
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string merged_csv(const std::vector<RunOutput>& runs) {
    std::ostringstream out;
    out << "run,section,name,metric,value\n";
    for (const auto& r : runs) {
        std::istringstream in(metrics_to_csv(r.report));
        std::string line;
        std::getline(in, line);  // per-report header
        while (std::getline(in, line))
            if (!line.empty()) out << r.label << ',' << line << '\n';
    }
    return out.str();
}

std::string merged_json(const std::vector<RunOutput>& runs, const std::vector<Verdict>* checks) {
    ordered_json doc;
    doc["runs"] = ordered_json::array();
    for (const auto& r : runs) {
        ordered_json entry;
        entry["label"] = r.label;
        entry["seed"] = r.seed;
        entry["metrics"] = ordered_json::parse(metrics_to_json(r.report));
        doc["runs"].push_back(std::move(entry));
    }
    if (checks) {
        doc["checks"] = ordered_json::array();
        for (const auto& v : *checks)
            doc["checks"].push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cross-chain relay simulator"};
    std::string scenario, config_path, seeds_expr, relayers_csv, allocation, format;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    bool want_trace = false, want_check = false;

    app.add_option("--scenario", scenario, "named preset")
        ->check(CLI::IsMember(scenario_names()));
    app.add_option("--config", config_path, "config file (JSON)");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--seeds", seeds_expr, "inclusive seed range, e.g. 1..5");
    app.add_option("--relayers", relayers_csv, "relayer counts for the scalability preset");
    app.add_option("--allocation", allocation, "allocation approach")
        ->check(CLI::IsMember({"approach1", "approach2"}));
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "write only this report format")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_flag("--trace", want_trace, "also write the full event trace");
    app.add_flag("--check", want_check, "verify the scenario's headline properties");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (scenario.empty() == config_path.empty()) {
            std::fprintf(stderr, "give exactly one of --scenario or --config\n");
            return 1;
        }

        std::vector<std::uint64_t> seeds{seed};
        if (!seeds_expr.empty()) seeds = parse_seed_range(seeds_expr);
        const bool many_seeds = seeds.size() > 1;

        std::vector<std::pair<std::string, SimConfig>> jobs;
        if (!scenario.empty()) {
            ScenarioOptions opt;
            if (!relayers_csv.empty()) opt.relayer_counts = parse_relayer_counts(relayers_csv);
            if (!allocation.empty())
                opt.allocation = allocation == "approach2" ? AllocationMode::Validated
                                                           : AllocationMode::AtCreation;
            for (std::uint64_t s : seeds) {
                opt.seed = s;
                auto plan = scenario_plan(scenario, opt);
                if (!plan.ok()) {
                    std::fprintf(stderr, "cannot plan scenario %s\n", scenario.c_str());
                    return 1;
                }
                for (auto& p : plan.value()) {
                    std::string label = p.label;
                    if (many_seeds) label += "-s" + std::to_string(s);
                    jobs.emplace_back(std::move(label), std::move(p.config));
                }
            }
        } else {
            SimConfig base = load_config_file(config_path);
            for (std::uint64_t s : seeds) {
                SimConfig cfg = base;
                if (app.count("--seed") || many_seeds) cfg.seed = s;
                if (!allocation.empty())
                    cfg.params.allocation = allocation == "approach2"
                                                ? AllocationMode::Validated
                                                : AllocationMode::AtCreation;
                jobs.emplace_back(many_seeds ? "config-s" + std::to_string(s) : "config",
                                  std::move(cfg));
            }
        }

        fs::create_directories(out_dir);
        std::vector<RunOutput> runs;
        for (const auto& [label, cfg] : jobs) {
            RunTrace trace = run(cfg);
            auto report = compute(trace);
            if (!report.ok()) {
                std::fprintf(stderr, "%s produced a malformed trace\n", label.c_str());
                return 1;
            }
            runs.push_back({label, cfg.seed, std::move(report.value())});
            if (want_trace) {
                const std::string file =
                    jobs.size() == 1 ? "trace.ndjson" : "trace-" + label + ".ndjson";
                write_ndjson(trace, (fs::path(out_dir) / file).string());
            }
            const MetricsReport& m = runs.back().report;
            std::printf("%-24s requested %d acked %d timed_out %d throughput %.3f/s\n",
                        label.c_str(), m.requested, m.acked, m.timed_out, m.throughput);
        }

        std::vector<Verdict> verdicts;
        if (want_check) verdicts = check_runs(scenario, runs);

        if (format != "csv")
            write_text(fs::path(out_dir) / "report.json",
                       merged_json(runs, want_check ? &verdicts : nullptr));
        if (format != "json") write_text(fs::path(out_dir) / "report.csv", merged_csv(runs));

        if (want_check) {
            bool all = true;
            for (const auto& v : verdicts) {
                std::printf("CHECK %s %s (%s)\n", v.pass ? "PASS" : "FAIL", v.name.c_str(),
                            v.detail.c_str());
                all = all && v.pass;
            }
            if (!all) return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 1;
    }
}
