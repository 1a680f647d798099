#include "lagco/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "lagco/parallel.hpp"

namespace lagco::eval {

std::string to_string(StrategyKind kind) {
    switch (kind) {
        case StrategyKind::Smallest: return "S";
        case StrategyKind::Medium: return "M";
        case StrategyKind::Largest: return "L";
        case StrategyKind::Varied: return "V";
    }
    return "?";
}

StrategyKind strategy_from_string(const std::string& s) {
    if (s == "S" || s == "smallest") return StrategyKind::Smallest;
    if (s == "M" || s == "medium") return StrategyKind::Medium;
    if (s == "L" || s == "largest") return StrategyKind::Largest;
    if (s == "V" || s == "varied") return StrategyKind::Varied;
    throw std::invalid_argument("unknown strategy: " + s);
}

std::vector<uint64_t> test_seed_sequence() {
    std::vector<uint64_t> seeds{42, 100, 123, 200};
    for (uint64_t s = 400; s <= 5000; s += 100) seeds.push_back(s);
    return seeds;
}

std::vector<Instance> sort_by_size(std::vector<Instance> pool) {
    std::stable_sort(pool.begin(), pool.end(), [](const Instance& a, const Instance& b) {
        if (a.scenario_size() != b.scenario_size()) return a.scenario_size() < b.scenario_size();
        return a.id < b.id;
    });
    return pool;
}

std::vector<std::vector<size_t>> select_training_sets(const std::vector<Instance>& sorted_pool,
                                                      const StrategyConfig& strategy,
                                                      uint64_t split_seed) {
    size_t n = sorted_pool.size();
    std::vector<std::vector<size_t>> sets;
    if (strategy.kind == StrategyKind::Varied) {
        // non-overlapping ~20% folds over a seeded shuffle
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(split_seed);
        rng.shuffle(order);
        int folds = strategy.repeats;
        size_t base = n / static_cast<size_t>(folds);
        size_t extra = n % static_cast<size_t>(folds);
        size_t at = 0;
        for (int f = 0; f < folds; ++f) {
            size_t take = base + (static_cast<size_t>(f) < extra ? 1 : 0);
            std::vector<size_t> fold(order.begin() + static_cast<int64_t>(at),
                                     order.begin() + static_cast<int64_t>(at + take));
            std::sort(fold.begin(), fold.end());
            sets.push_back(std::move(fold));
            at += take;
        }
        return sets;
    }
    if (n < static_cast<size_t>(strategy.repeats))
        throw std::invalid_argument("protocol: fewer instances than repeats");
    std::vector<size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), 0);
    for (int r = 0; r < strategy.repeats; ++r) {
        size_t pick = 0;
        switch (strategy.kind) {
            case StrategyKind::Smallest: pick = 0; break;
            case StrategyKind::Medium: pick = (remaining.size() - 1) / 2; break;
            case StrategyKind::Largest: pick = remaining.size() - 1; break;
            case StrategyKind::Varied: break;
        }
        sets.push_back({remaining[pick]});
        remaining.erase(remaining.begin() + static_cast<int64_t>(pick));
    }
    return sets;
}

std::vector<RunRecord> run_protocol(const std::vector<Instance>& pool,
                                    const StrategyConfig& strategy, const ProtocolConfig& cfg,
                                    const gae::GaePack& gae_pack, const AgentProvider& provider,
                                    int jobs) {
    if (pool.empty()) throw std::invalid_argument("run_protocol: empty instance pool");
    auto sorted = sort_by_size(pool);
    auto train_sets = select_training_sets(sorted, strategy, cfg.split_seed);
    if (cfg.train_seeds.size() < train_sets.size())
        throw std::invalid_argument("run_protocol: not enough training seeds");
    auto test_seeds = test_seed_sequence();
    if (static_cast<int>(test_seeds.size()) < cfg.episodes_per_instance)
        throw std::invalid_argument("run_protocol: not enough test seeds");

    std::vector<RunRecord> records;
    for (size_t repeat = 0; repeat < train_sets.size(); ++repeat) {
        const auto& train_idx = train_sets[repeat];
        std::vector<Instance> train_instances;
        std::vector<char> is_train(sorted.size(), 0);
        for (size_t i : train_idx) {
            train_instances.push_back(sorted[i]);
            is_train[i] = 1;
        }
        train::TrainedAgent agent =
            provider(train_instances, cfg.train_seeds[repeat], static_cast<int>(repeat));

        std::vector<RunRecord> repeat_records(sorted.size());
        parallel_for(sorted.size(), jobs, [&](size_t i) {
            RunRecord rec;
            rec.instance_id = sorted[i].id;
            rec.strategy = strategy.kind;
            rec.train_seed = cfg.train_seeds[repeat];
            rec.repeat = static_cast<int>(repeat);
            rec.is_train_instance = is_train[i] != 0;
            EnvConfig env_cfg;
            env_cfg.strict = !(agent.kind == agents::AgentKind::PDiscrete ||
                               agent.kind == agents::AgentKind::GDiscrete);
            auto env = make_env(sorted[i], env_cfg);
            double total_ms = 0.0;
            int64_t decisions = 0;
            for (int e = 0; e < cfg.episodes_per_instance; ++e) {
                auto result = train::run_episode(agent, *env, gae_pack,
                                                 test_seeds[static_cast<size_t>(e)], true);
                rec.episode_scores.push_back(result.score);
                for (double ms : result.act_ms) total_ms += ms;
                decisions += result.decisions;
            }
            rec.best = *std::max_element(rec.episode_scores.begin(), rec.episode_scores.end());
            rec.mean_act_ms = decisions > 0 ? total_ms / static_cast<double>(decisions) : 0.0;
            repeat_records[i] = std::move(rec);
        });
        for (auto& rec : repeat_records) records.push_back(std::move(rec));
    }
    return records;
}

CellSummary summarize_cell(const std::vector<RunRecord>& records, StrategyKind strategy,
                           uint64_t ci_seed) {
    CellSummary cell;
    cell.strategy = strategy;
    std::vector<double> test_best, train_best;
    for (const auto& r : records) {
        if (r.strategy != strategy) continue;
        (r.is_train_instance ? train_best : test_best).push_back(r.best);
    }
    cell.runs = static_cast<int>(test_best.size());
    if (!test_best.empty()) {
        cell.test_iqm = iqm(test_best);
        cell.test_ci = bootstrap_ci(test_best, 0.95, 10000, ci_seed);
        cell.test_spread = spread_stats(test_best);
    }
    if (!train_best.empty()) cell.train_iqm = iqm(train_best);
    return cell;
}

double generalization_gap(const std::vector<CellSummary>& cells) {
    if (cells.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& c : cells) acc += c.test_iqm - c.train_iqm;
    return acc / static_cast<double>(cells.size());
}

std::string records_to_csv(const std::vector<RunRecord>& records, const std::string& env,
                           const std::string& agent, bool include_times) {
    std::ostringstream os;
    os << "env,agent,strategy,seed,instance,episode,score,best";
    if (include_times) os << ",time_ms";
    os << '\n';
    os.precision(17);
    for (const auto& r : records) {
        for (size_t e = 0; e < r.episode_scores.size(); ++e) {
            os << env << ',' << agent << ',' << to_string(r.strategy) << ',' << r.train_seed << ','
               << r.instance_id << ',' << e << ',' << r.episode_scores[e] << ',' << r.best;
            if (include_times) os << ',' << r.mean_act_ms;
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace lagco::eval
