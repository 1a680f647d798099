#pragma once

#include <cstdint>

#include "lagco/instance.hpp"

namespace lagco {

struct SweepConfig {
    int64_t sweeps = -1;        // -1 picks the per-benchmark default
    int top_k = 3;              // MinVertex greedy randomization width
    int elite_pool = 5;         // OSPF/Traffic elite pool size per direction
    double restart_prob = 0.5;  // fresh random start vs. perturbed elite
    double mutate_frac = 0.1;   // fraction of weights/assignments perturbed
    int proposal_batch = 32;    // 2-opt candidate swaps per refinement step
    int steps_per_sweep = 30;   // local-search proposals per sweep
    uint64_t seed = 0;
};

int64_t default_sweeps(EnvKind kind);

// Runs the per-benchmark heuristic sweeps and writes empirical best/worst
// bounds (and the witnessing solutions) into the instance. CyberPath bounds
// are inferred from the node count at generation time; sweeping it is a no-op.
void sweep_bounds(Instance& instance, const SweepConfig& cfg);

}  // namespace lagco
