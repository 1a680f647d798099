#pragma once

#include <vector>

#include "lagco/protocol.hpp"
#include "lagco/stats.hpp"

namespace lagco::eval {

struct TimingPoint {
    int size = 0;
    double median_ms = 0.0;
    int64_t decisions = 0;
    int64_t forwards = 0;
    int64_t valid_actions = 0;  // summed over decisions
};

struct TimingConfig {
    std::vector<int> sizes;
    int episodes_per_size = 3;
    uint64_t seed = 42;
    int64_t quick_sweeps = 50;  // bound quality is irrelevant for timing
};

// Action-selection wall-clock per decision (the act call only, perception and
// env stepping excluded) on randomly initialized agents of the right shape.
std::vector<TimingPoint> timing_run(agents::AgentKind agent_kind, EnvKind env_kind,
                                    const TimingConfig& cfg);

PowerLawFit fit_timing(const std::vector<TimingPoint>& points);

}  // namespace lagco::eval
