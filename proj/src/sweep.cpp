#include "relaysim/sweep.hpp"

#include <stdexcept>

#include "relaysim/coordinator.hpp"
#include "relaysim/sha256.hpp"

namespace relaysim {

namespace {

MetricsReport run_one(const SimConfig& base, std::uint64_t seed) {
    SimConfig cfg = base;
    cfg.seed = seed;
    auto report = compute(run(cfg));
    if (!report.ok()) throw std::logic_error("run produced a malformed trace");
    return std::move(report.value());
}

Hash256 synthetic_task(std::uint64_t seed, std::uint64_t index) {
    ByteWriter wr;
    wr.str("task");
    wr.u64(seed);
    wr.u64(index);
    return Sha256::digest(wr.bytes());
}

}  // namespace

std::vector<MetricsReport> sweep_seeds_serial(const SimConfig& base,
                                              const std::vector<std::uint64_t>& seeds) {
    std::vector<MetricsReport> out(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = run_one(base, seeds[i]);
    return out;
}

std::vector<MetricsReport> sweep_seeds_parallel(const SimConfig& base,
                                                const std::vector<std::uint64_t>& seeds) {
    std::vector<MetricsReport> out(seeds.size());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(seeds.size()); ++i)
        out[i] = run_one(base, seeds[i]);
    return out;
}

std::vector<long long> allocation_histogram_serial(std::uint64_t seed, int n, int m, int r) {
    if (m < 1 || n < 0 || r < 1) throw std::invalid_argument("histogram needs n >= 0, m >= 1, r >= 1");
    std::vector<RelayerId> eligible(m);
    for (int i = 0; i < m; ++i) eligible[i] = i + 1;
    std::vector<long long> hist(m, 0);
    for (int i = 0; i < n; ++i) {
        auto assigned = allocate(synthetic_task(seed, i), eligible, r);
        for (RelayerId id : assigned.value()) hist[id - 1] += 1;
    }
    return hist;
}

std::vector<long long> allocation_histogram_parallel(std::uint64_t seed, int n, int m, int r) {
    if (m < 1 || n < 0 || r < 1) throw std::invalid_argument("histogram needs n >= 0, m >= 1, r >= 1");
    std::vector<RelayerId> eligible(m);
    for (int i = 0; i < m; ++i) eligible[i] = i + 1;
    std::vector<long long> hist(m, 0);
#pragma omp parallel
    {
        std::vector<long long> local(m, 0);
#pragma omp for nowait
        for (int i = 0; i < n; ++i) {
            auto assigned = allocate(synthetic_task(seed, i), eligible, r);
            for (RelayerId id : assigned.value()) local[id - 1] += 1;
        }
#pragma omp critical
        for (int j = 0; j < m; ++j) hist[j] += local[j];
    }
    return hist;
}

}  // namespace relaysim
