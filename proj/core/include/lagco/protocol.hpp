#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lagco/gae.hpp"
#include "lagco/stats.hpp"
#include "lagco/train.hpp"

namespace lagco::eval {

enum class StrategyKind { Smallest, Medium, Largest, Varied };

std::string to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& s);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::Smallest;
    int repeats = 5;
    double varied_fraction = 0.2;
    int rotation_interval = 50;  // 50 per the configuration appendix; 100 also cited
};

// test-episode seed sequence: 42, 100, 123, 200, then 400..5000 step 100
std::vector<uint64_t> test_seed_sequence();
inline std::vector<uint64_t> default_train_seeds() { return {42, 100, 123, 200, 300}; }

struct ProtocolConfig {
    std::vector<uint64_t> train_seeds = default_train_seeds();
    int episodes_per_instance = 5;
    uint64_t split_seed = 42;  // fold assignment / setup seed
};

struct RunRecord {
    std::string instance_id;
    StrategyKind strategy = StrategyKind::Smallest;
    uint64_t train_seed = 0;
    int repeat = 0;
    bool is_train_instance = false;
    std::vector<double> episode_scores;
    double best = 0.0;
    double mean_act_ms = 0.0;
};

// Per-repeat training-instance selection. S/M/L pick one instance by size
// rank, removing previous picks from the pool; V returns disjoint ~20% folds.
std::vector<std::vector<size_t>> select_training_sets(const std::vector<Instance>& sorted_pool,
                                                      const StrategyConfig& strategy,
                                                      uint64_t split_seed);

// sorted copy of the pool, ascending scenario size (ties by id)
std::vector<Instance> sort_by_size(std::vector<Instance> pool);

using AgentProvider = std::function<train::TrainedAgent(
    const std::vector<Instance>& train_instances, uint64_t train_seed, int repeat)>;

// Runs the full generalization protocol for one (env, agent) cell: per repeat
// the provider returns a (trained or loaded) agent, every non-training
// instance is evaluated for `episodes_per_instance` episodes with the shared
// test seeds and the best score retained; training instances are also scored
// for the train-test gap.
std::vector<RunRecord> run_protocol(const std::vector<Instance>& pool,
                                    const StrategyConfig& strategy, const ProtocolConfig& cfg,
                                    const gae::GaePack& gae_pack, const AgentProvider& provider,
                                    int jobs = 1);

struct CellSummary {
    StrategyKind strategy;
    double test_iqm = 0.0;
    double train_iqm = 0.0;
    std::pair<double, double> test_ci{0.0, 0.0};
    SpreadStats test_spread;
    int runs = 0;
};

CellSummary summarize_cell(const std::vector<RunRecord>& records, StrategyKind strategy,
                           uint64_t ci_seed = 0);
// mean over strategies of (test IQM - train IQM)
double generalization_gap(const std::vector<CellSummary>& cells);

std::string records_to_csv(const std::vector<RunRecord>& records, const std::string& env,
                           const std::string& agent, bool include_times);

}  // namespace lagco::eval
