#include "lagco/timing.hpp"

#include <algorithm>
#include <chrono>

#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"

namespace lagco::eval {

std::vector<TimingPoint> timing_run(agents::AgentKind agent_kind, EnvKind env_kind,
                                    const TimingConfig& cfg) {
    std::vector<TimingPoint> points;
    auto seeds = test_seed_sequence();
    for (size_t si = 0; si < cfg.sizes.size(); ++si) {
        int size = cfg.sizes[si];
        Instance inst = generate_scenario_with_size(env_kind, size, static_cast<int>(si), cfg.seed);
        if (env_kind != EnvKind::CyberPath) {
            SweepConfig scfg;
            scfg.sweeps = cfg.quick_sweeps;
            scfg.steps_per_sweep = 10;
            scfg.seed = child_seed(cfg.seed, si);
            sweep_bounds(inst, scfg);
        }
        gae::EncoderConfig enc_cfg;  // paper-default encoder shape
        auto pack = gae::random_gae(env_kind, inst, enc_cfg, child_seed(cfg.seed, 0xba5e + si));
        auto agent = train::random_agent(agent_kind, env_kind, inst, {inst}, pack,
                                         child_seed(cfg.seed, 0xa9e27 + si));

        TimingPoint point;
        point.size = size;
        std::vector<double> times;
        auto env = make_env(inst);
        for (int e = 0; e < cfg.episodes_per_size; ++e) {
            uint64_t seed = seeds[static_cast<size_t>(e) % seeds.size()];
            auto result = train::run_episode(agent, *env, pack, seed, true);
            times.insert(times.end(), result.act_ms.begin(), result.act_ms.end());
            point.decisions += result.decisions;
            point.forwards += result.forwards;
            point.valid_actions += result.valid_seen;
        }
        std::sort(times.begin(), times.end());
        point.median_ms = times.empty() ? 0.0
                          : times.size() % 2 == 1
                              ? times[times.size() / 2]
                              : 0.5 * (times[times.size() / 2 - 1] + times[times.size() / 2]);
        points.push_back(point);
    }
    return points;
}

PowerLawFit fit_timing(const std::vector<TimingPoint>& points) {
    std::vector<double> sizes, times;
    for (const auto& p : points) {
        sizes.push_back(static_cast<double>(p.size));
        times.push_back(std::max(p.median_ms, 1e-9));
    }
    return fit_power_law(sizes, times);
}

}  // namespace lagco::eval
