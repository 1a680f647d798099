#pragma once

#include <vector>

#include "lagco/instance.hpp"

namespace lagco {

// Samples one scenario instance with parameters drawn uniformly from the
// per-benchmark generation ranges. Deterministic in (master_seed, index).
Instance generate_scenario(EnvKind kind, int index, uint64_t master_seed);

std::vector<Instance> generate_scenarios(EnvKind kind, int count, uint64_t master_seed,
                                         int jobs = 1);

// Scalability-study variant: the primary dimension (cities/nodes/VMs) is
// pinned to `size`, secondary parameters sample their usual ranges.
Instance generate_scenario_with_size(EnvKind kind, int size, int index, uint64_t master_seed);

}  // namespace lagco
