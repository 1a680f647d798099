#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lagco/agents.hpp"
#include "lagco/gae.hpp"
#include "lagco/latent.hpp"

namespace lagco::train {

// zero-padded fixed-size observation layout for the padding-based baselines
struct PaddingSpec {
    EnvKind env = EnvKind::Tsp;
    int max_nodes = 0;
    int max_comm_edges = 0;
    int max_demands = 0;
    int max_vms = 0, max_pms = 0;
    int dim = 0;
};

PaddingSpec padding_spec(EnvKind env, const std::vector<Instance>& pool);
std::vector<double> padding_observation(const Env& env, const PaddingSpec& spec);

// per-step view shared by the latent agents
struct Perception {
    std::vector<ActionDescriptor> valid;
    ad::Tensor valid_embeddings;            // raw u(a) rows for the valid set
    std::vector<double> obs_base;           // pooled observation, no action summary
    std::optional<latent::LatentSpace> space;  // built when frozen stats are given
    std::vector<double> obs_projection;        // with the action-space summary
};

Perception perceive(const Env& env, const gae::GaePack& gae_pack,
                    const latent::ActionEmbedder& embedder, const latent::LatentStats* stats);

// z-score statistics over full-action-set embeddings of the training
// instances (reset state plus a few random-rollout snapshots each)
latent::LatentStats fit_projection_stats(const std::vector<Instance>& train_instances,
                                         const gae::GaePack& gae_pack,
                                         const latent::ActionEmbedder& embedder, int snapshots,
                                         uint64_t seed);

struct TrainConfig {
    int total_steps = 50000;
    uint64_t seed = 42;
    agents::PpoConfig ppo;
    agents::IdqnConfig idqn;
    int rotation_interval = 50;  // episodes between instance switches (varied regime)
    int stats_snapshots = 3;     // rollout snapshots per instance for stats fitting
};

struct TrainedAgent {
    agents::AgentKind kind = agents::AgentKind::Projection;
    EnvKind env = EnvKind::Tsp;
    agents::PolicyNet net;
    latent::ActionEmbedder embedder;
    latent::LatentStats stats;  // projection only
    PaddingSpec padding;        // padding-observation agents only
    int table_dim = 0;          // discrete logit count
};

// Trains one agent on the given instances (one for S/M/L, a fold for V),
// rotating the training instance every rotation_interval episodes when more
// than one is provided. The padding/table dimensions are sized from `pool`
// so the policy transfers across the whole protocol instance set.
TrainedAgent train_agent(agents::AgentKind kind, EnvKind env,
                         const std::vector<Instance>& train_instances,
                         const std::vector<Instance>& pool, const gae::GaePack& gae_pack,
                         const TrainConfig& cfg);

// deterministic greedy evaluation; returns the episode score and optionally
// collects per-decision wall-clock (milliseconds) and policy-forward counts
struct EpisodeResult {
    double score = 0.0;
    std::vector<double> act_ms;
    int64_t forwards = 0;
    int64_t decisions = 0;
    int64_t valid_seen = 0;  // summed |valid actions| across decisions
};

EpisodeResult run_episode(const TrainedAgent& agent, Env& env, const gae::GaePack& gae_pack,
                          uint64_t seed, bool record_times = false);

// randomly initialized agent of the right shape (timing studies)
TrainedAgent random_agent(agents::AgentKind kind, EnvKind env, const Instance& example,
                          const std::vector<Instance>& pool, const gae::GaePack& gae_pack,
                          uint64_t seed);

void save_agent(const std::string& path, const TrainedAgent& agent);
TrainedAgent load_agent(const std::string& path);

}  // namespace lagco::train
