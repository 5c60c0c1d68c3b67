// Times the parallel kernels against their serial references on the same
// inputs and refuses to report a speedup unless the outputs are identical.
#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/metrics.hpp"
#include "relaysim/scenarios.hpp"
#include "relaysim/sweep.hpp"

using namespace relaysim;

namespace {

template <typename F>
auto timed(F&& f, double& seconds) {
    const auto t0 = std::chrono::steady_clock::now();
    auto result = f();
    const auto t1 = std::chrono::steady_clock::now();
    seconds = std::chrono::duration<double>(t1 - t0).count();
    return result;
}

bool same_reports(const std::vector<MetricsReport>& a, const std::vector<MetricsReport>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (metrics_to_json(a[i]) != metrics_to_json(b[i])) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel kernel benchmark"};
    int seeds_n = 8;
    int relayers = 4;
    long long draws = 2'000'000;
    int hist_m = 8;
    int hist_r = 2;
    app.add_option("--seeds", seeds_n, "seed sweep width")->check(CLI::PositiveNumber);
    app.add_option("--relayers", relayers, "relayers in the swept run")->check(CLI::PositiveNumber);
    app.add_option("--draws", draws, "allocation histogram draws")->check(CLI::PositiveNumber);
    app.add_option("--m", hist_m, "histogram relayer count")->check(CLI::PositiveNumber);
    app.add_option("--r", hist_r, "histogram redundancy")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    std::vector<std::uint64_t> seeds;
    for (int i = 1; i <= seeds_n; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
    const SimConfig base = scaling_config(relayers, true, AllocationMode::AtCreation, 1);

    double serial_s = 0, parallel_s = 0;
    const auto serial = timed([&] { return sweep_seeds_serial(base, seeds); }, serial_s);
    const auto parallel = timed([&] { return sweep_seeds_parallel(base, seeds); }, parallel_s);
    const bool sweep_ok = same_reports(serial, parallel);
    std::printf("seed sweep    %3d runs            serial %7.3f s  parallel %7.3f s  speedup %4.1fx  %s\n",
                seeds_n, serial_s, parallel_s, parallel_s > 0 ? serial_s / parallel_s : 0.0,
                sweep_ok ? "identical" : "DIVERGED");

    double hs = 0, hp = 0;
    const auto hist_serial = timed(
        [&] { return allocation_histogram_serial(1, static_cast<int>(draws), hist_m, hist_r); },
        hs);
    const auto hist_parallel = timed(
        [&] { return allocation_histogram_parallel(1, static_cast<int>(draws), hist_m, hist_r); },
        hp);
    const bool hist_ok = hist_serial == hist_parallel;
    std::printf("histogram     %lld draws m=%d r=%d  serial %7.3f s  parallel %7.3f s  speedup %4.1fx  %s\n",
                draws, hist_m, hist_r, hs, hp, hp > 0 ? hs / hp : 0.0,
                hist_ok ? "identical" : "DIVERGED");

    return sweep_ok && hist_ok ? 0 : 1;
}
