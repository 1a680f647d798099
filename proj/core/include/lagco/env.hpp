#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagco/actions.hpp"
#include "lagco/graph.hpp"
#include "lagco/instance.hpp"
#include "lagco/rng.hpp"

namespace lagco {

struct EnvError : std::runtime_error {
    explicit EnvError(const std::string& what) : std::runtime_error(what) {}
};

struct EnvConfig {
    bool training = false;  // enables best-known-score early termination
    bool strict = true;     // invalid actions throw; otherwise they burn the step
    double cyber_reward_pos = 1.0;
    double cyber_reward_neg = -1.0;
    // migration penalty per moved VM, scaled by its mean normalized demand
    double placement_migration_coeff = 0.01;
};

struct StepResult {
    double reward = 0.0;
    bool done = false;
};

// Episode-length coefficient per benchmark (1x default, 2x MaxCut/OSPF,
// 3x CyberPath/Traffic) applied to the scenario size.
double episode_coefficient(EnvKind kind);
bool has_hard_constraint(EnvKind kind);

// Sequential-decision interface shared by the seven benchmarks. An Env owns
// the episode state; distinct instances may run on parallel workers, one Env
// per worker.
class Env {
public:
    explicit Env(const Instance& instance, const EnvConfig& cfg);
    virtual ~Env() = default;

    EnvKind kind() const { return instance_.kind; }
    const Instance& instance() const { return instance_; }
    const ScoreBounds& bounds() const { return bounds_; }
    const EnvConfig& config() const { return cfg_; }

    int scenario_size() const { return instance_.scenario_size(); }
    int cutoff() const { return cutoff_; }
    int steps() const { return t_; }
    bool done() const { return done_; }

    void reset(uint64_t seed);
    std::vector<ActionDescriptor> valid_actions() const;
    StepResult step(const ActionDescriptor& action);
    bool is_valid(const ActionDescriptor& action) const;

    // normalized score of the terminated episode (0 on hard-constraint violation)
    double score() const;
    // current raw objective (running estimate before termination)
    virtual double raw_objective() const = 0;
    // hard-constraint satisfaction for the current (partial) solution
    virtual bool solution_complete() const = 0;

    const GraphBundle& graphs() const { return bundle_; }

protected:
    virtual void do_reset() = 0;
    virtual std::vector<ActionDescriptor> do_valid_actions() const = 0;
    virtual bool do_is_valid(const ActionDescriptor& action) const = 0;
    // applies a valid action, returns the reward
    virtual double apply(const ActionDescriptor& action) = 0;
    // natural termination beyond the cutoff (solution formed)
    virtual bool naturally_done() const = 0;
    // true when the running objective has reached the empirical best
    virtual bool reached_best() const;

    Instance instance_;
    EnvConfig cfg_;
    ScoreBounds bounds_;
    GraphBundle bundle_;
    Rng rng_{0};
    int t_ = 0;
    int cutoff_ = 0;
    bool done_ = false;
    bool started_ = false;

private:
    void refresh_done();
};

std::unique_ptr<Env> make_env(const Instance& instance, const EnvConfig& cfg = {});

// ---- shared objective evaluators (used by envs, oracle sweeps, and tests) ----

double tsp_tour_length(const TspData& d, const std::vector<int>& tour);
double tsp_distance(const TspData& d, int a, int b);

bool min_vertex_is_cover(const MinVertexData& d, const std::vector<int>& cover);

double max_cut_value(const MaxCutData& d, const std::vector<int>& partition);

bool placement_alloc_feasible(const PlacementData& d, const std::vector<int>& alloc);
double placement_objective(const PlacementData& d, const std::vector<int>& alloc);

double ospf_max_utilization(const OspfData& d, const std::vector<int>& weights);

// candidate simple paths per demand, ascending-neighbor DFS order, <= max_path_len edges
std::vector<std::vector<std::vector<int>>> traffic_candidate_paths(const TrafficData& d);
bool traffic_assignment_feasible(const TrafficData& d,
                                 const std::vector<std::vector<std::vector<int>>>& paths,
                                 const std::vector<int>& assign);
double traffic_max_utilization(const TrafficData& d,
                               const std::vector<std::vector<std::vector<int>>>& paths,
                               const std::vector<int>& assign);

}  // namespace lagco
