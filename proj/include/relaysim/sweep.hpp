#pragma once
#include <cstdint>
#include <vector>

#include "relaysim/metrics.hpp"
#include "relaysim/sim.hpp"

namespace relaysim {

// Runs the base config once per seed and reports each run. Both versions
// produce identical output; the parallel one fans runs out across OpenMP
// threads and merges results back in seed order.
std::vector<MetricsReport> sweep_seeds_serial(const SimConfig& base,
                                              const std::vector<std::uint64_t>& seeds);
std::vector<MetricsReport> sweep_seeds_parallel(const SimConfig& base,
                                                const std::vector<std::uint64_t>& seeds);

// Assignment histogram over n synthetic tasks: task i gets the 32-byte id
// H(seed, i) and is allocated across relayers 1..m with redundancy r. Counts
// are indexed by relayer minus one. Derivation is per-index, so the parallel
// version is a straight reduction of the serial loop.
std::vector<long long> allocation_histogram_serial(std::uint64_t seed, int n, int m, int r);
std::vector<long long> allocation_histogram_parallel(std::uint64_t seed, int n, int m, int r);

}  // namespace relaysim
