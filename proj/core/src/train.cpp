#include "lagco/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>

#include "json.hpp"
#include "lagco/checkpoint.hpp"
#include "lagco/envs.hpp"

namespace lagco::train {

using agents::AgentKind;
using agents::PolicyNet;
using latent::ActionEmbedder;
using latent::LatentStats;

PaddingSpec padding_spec(EnvKind env, const std::vector<Instance>& pool) {
    PaddingSpec spec;
    spec.env = env;
    for (const auto& inst : pool) {
        switch (env) {
            case EnvKind::Tsp:
                spec.max_nodes = std::max(spec.max_nodes, inst.as<TspData>().num_cities);
                break;
            case EnvKind::MinVertex:
                spec.max_nodes = std::max(spec.max_nodes, inst.as<MinVertexData>().num_nodes);
                break;
            case EnvKind::MaxCut:
                spec.max_nodes = std::max(spec.max_nodes, inst.as<MaxCutData>().num_nodes);
                break;
            case EnvKind::Placement: {
                const auto& d = inst.as<PlacementData>();
                spec.max_vms = std::max(spec.max_vms, d.n_vms);
                spec.max_pms = std::max(spec.max_pms, d.n_pms);
                break;
            }
            case EnvKind::CyberPath:
                spec.max_nodes = std::max(spec.max_nodes, inst.as<CyberData>().n_nodes);
                break;
            case EnvKind::Ospf: {
                const auto& d = inst.as<OspfData>();
                spec.max_comm_edges = std::max<int>(spec.max_comm_edges, static_cast<int>(d.edges.size()));
                spec.max_demands = std::max<int>(spec.max_demands, static_cast<int>(d.demands.size()));
                break;
            }
            case EnvKind::Traffic: {
                const auto& d = inst.as<TrafficData>();
                spec.max_comm_edges = std::max<int>(spec.max_comm_edges, static_cast<int>(d.edges.size()));
                spec.max_demands = std::max<int>(spec.max_demands, static_cast<int>(d.demands.size()));
                break;
            }
        }
    }
    int n = spec.max_nodes;
    switch (env) {
        case EnvKind::Tsp: spec.dim = 2 * n + n + n * (n - 1) / 2; break;
        case EnvKind::MinVertex: spec.dim = n + n * (n - 1) / 2; break;
        case EnvKind::MaxCut: spec.dim = n + n * (n - 1) / 2; break;
        case EnvKind::Placement: spec.dim = 9 * spec.max_pms + 5 * spec.max_vms; break;
        case EnvKind::CyberPath: spec.dim = (kVulnHashDim + 8) * n; break;
        case EnvKind::Ospf: spec.dim = 3 * spec.max_comm_edges + spec.max_demands; break;
        case EnvKind::Traffic: spec.dim = 2 * spec.max_comm_edges + spec.max_demands; break;
    }
    return spec;
}

std::vector<double> padding_observation(const Env& env, const PaddingSpec& spec) {
    std::vector<double> obs(static_cast<size_t>(spec.dim), 0.0);
    switch (spec.env) {
        case EnvKind::Tsp: {
            const auto& d = env.instance().as<TspData>();
            Graph g = normalize_features(env.graphs().at(kMainGraph));
            int pos = g.node_attr_index("pos");
            int visited = g.node_attr_index("visited");
            int n = spec.max_nodes;
            for (int v = 0; v < d.num_cities; ++v) {
                obs[static_cast<size_t>(2 * v)] = g.node_value(pos, v, 0);
                obs[static_cast<size_t>(2 * v + 1)] = g.node_value(pos, v, 1);
                obs[static_cast<size_t>(2 * n + v)] = g.node_value(visited, v);
            }
            double diag = d.max_coord * std::sqrt(2.0);
            size_t base = static_cast<size_t>(3 * n);
            size_t slot = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j, ++slot)
                    if (i < d.num_cities && j < d.num_cities)
                        obs[base + slot] = tsp_distance(d, i, j) / diag;
            break;
        }
        case EnvKind::MinVertex: {
            const Graph& g = env.graphs().at(kMainGraph);
            int selected = g.node_attr_index("selected");
            int covered = g.edge_attr_index("covered");
            int n = spec.max_nodes;
            for (int v = 0; v < g.num_nodes(); ++v) obs[static_cast<size_t>(v)] = g.node_value(selected, v);
            size_t base = static_cast<size_t>(n);
            for (int e = 0; e < g.num_edges(); ++e) {
                auto [u, v] = g.edges()[static_cast<size_t>(e)];
                size_t slot = static_cast<size_t>(u) * n - static_cast<size_t>(u) * (u + 1) / 2 +
                              static_cast<size_t>(v - u - 1);
                obs[base + slot] = g.edge_value(covered, e);
            }
            break;
        }
        case EnvKind::MaxCut: {
            const Graph& g = env.graphs().at(kMainGraph);
            const auto& d = env.instance().as<MaxCutData>();
            int partition = g.node_attr_index("partition");
            int n = spec.max_nodes;
            for (int v = 0; v < g.num_nodes(); ++v)
                obs[static_cast<size_t>(v)] = g.node_value(partition, v);
            size_t base = static_cast<size_t>(n);
            for (size_t e = 0; e < d.edges.size(); ++e) {
                auto [u, v] = d.edges[e];
                size_t slot = static_cast<size_t>(u) * n - static_cast<size_t>(u) * (u + 1) / 2 +
                              static_cast<size_t>(v - u - 1);
                obs[base + slot] = d.weights[e] / d.max_weight;
            }
            break;
        }
        case EnvKind::Placement: {
            Graph g = normalize_features(env.graphs().at(kMainGraph));
            const auto& d = env.instance().as<PlacementData>();
            int cap = g.node_attr_index("capacity"), util = g.node_attr_index("util");
            int power = g.node_attr_index("power");
            int demand = g.node_attr_index("demand"), tenant = g.node_attr_index("tenant");
            for (int pm = 0; pm < d.n_pms; ++pm) {
                size_t base = static_cast<size_t>(9 * pm);
                int node = d.n_vms + pm;
                for (int r = 0; r < 4; ++r) {
                    obs[base + static_cast<size_t>(r)] = g.node_value(cap, node, r);
                    obs[base + 4 + static_cast<size_t>(r)] = g.node_value(util, node, r);
                }
                obs[base + 8] = g.node_value(power, node);
            }
            size_t vm_base = static_cast<size_t>(9 * spec.max_pms);
            for (int vm = 0; vm < d.n_vms; ++vm) {
                size_t base = vm_base + static_cast<size_t>(5 * vm);
                for (int r = 0; r < 4; ++r) obs[base + static_cast<size_t>(r)] = g.node_value(demand, vm, r);
                obs[base + 4] = g.node_value(tenant, vm);
            }
            break;
        }
        case EnvKind::CyberPath: {
            Graph g = normalize_features(env.graphs().at(kAttackGraph));
            auto features = node_feature_matrix(g);
            int width = features.cols();
            for (int v = 0; v < g.num_nodes(); ++v)
                for (int c = 0; c < width; ++c)
                    obs[static_cast<size_t>(v) * width + static_cast<size_t>(c)] = features.at(v, c);
            break;
        }
        case EnvKind::Ospf: {
            Graph g = normalize_features(env.graphs().at(kCommGraph));
            const Graph& tg = env.graphs().at(kTrafficGraph);
            int cap = g.edge_attr_index("capacity"), weight = g.edge_attr_index("weight");
            int load = g.edge_attr_index("load");
            for (int e = 0; e < g.num_edges(); ++e) {
                size_t base = static_cast<size_t>(3 * e);
                obs[base] = g.edge_value(cap, e);
                obs[base + 1] = g.edge_value(weight, e);
                obs[base + 2] = g.edge_value(load, e);
            }
            Graph tn = normalize_features(tg);
            int vol = tn.edge_attr_index("volume");
            size_t base = static_cast<size_t>(3 * spec.max_comm_edges);
            for (int e = 0; e < tn.num_edges(); ++e) obs[base + static_cast<size_t>(e)] = tn.edge_value(vol, e);
            break;
        }
        case EnvKind::Traffic: {
            Graph g = normalize_features(env.graphs().at(kCommGraph));
            int cap = g.edge_attr_index("capacity"), load = g.edge_attr_index("load");
            for (int e = 0; e < g.num_edges(); ++e) {
                obs[static_cast<size_t>(2 * e)] = g.edge_value(cap, e);
                obs[static_cast<size_t>(2 * e + 1)] = g.edge_value(load, e);
            }
            Graph tn = normalize_features(env.graphs().at(kTrafficGraph));
            int vol = tn.edge_attr_index("volume");
            size_t base = static_cast<size_t>(2 * spec.max_comm_edges);
            for (int e = 0; e < tn.num_edges(); ++e) obs[base + static_cast<size_t>(e)] = tn.edge_value(vol, e);
            break;
        }
    }
    return obs;
}

Perception perceive(const Env& env, const gae::GaePack& gae_pack, const ActionEmbedder& embedder,
                    const LatentStats* stats) {
    Perception p;
    auto z = gae_pack.encode_bundle(env.graphs());
    p.valid = env.valid_actions();
    p.valid_embeddings = embedder.embed_all(p.valid, z);
    p.obs_base = latent::build_observation(env.graphs(), z, nullptr);
    if (stats != nullptr) {
        p.space = latent::LatentSpace::build(p.valid, p.valid_embeddings, stats);
        p.obs_projection = latent::build_observation(env.graphs(), z, &p.space->normalized());
    }
    return p;
}

LatentStats fit_projection_stats(const std::vector<Instance>& train_instances,
                                 const gae::GaePack& gae_pack, const ActionEmbedder& embedder,
                                 int snapshots, uint64_t seed) {
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < train_instances.size(); ++i) {
        auto env = make_env(train_instances[i]);
        auto table = agents::full_action_table(train_instances[i]);
        auto capture = [&] {
            auto z = gae_pack.encode_bundle(env->graphs());
            for (const auto& a : table) rows.push_back(embedder.embed(a, z));
        };
        uint64_t inst_seed = child_seed(seed, i);
        env->reset(inst_seed);
        capture();
        Rng rng(child_seed(inst_seed, 1));
        for (int s = 0; s < snapshots; ++s) {
            env->reset(child_seed(inst_seed, 2 + static_cast<uint64_t>(s)));
            int hops = static_cast<int>(rng.uniform_int(1, std::max(1, env->cutoff() / 2)));
            for (int h = 0; h < hops && !env->done(); ++h) {
                auto actions = env->valid_actions();
                env->step(actions[static_cast<size_t>(
                    rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))]);
            }
            capture();
        }
    }
    return latent::fit_latent_stats(rows);
}

namespace {

int embedding_p(const gae::GaePack& pack) {
    return pack.models.begin()->second.config().out;
}

int table_capacity(EnvKind env, const std::vector<Instance>& pool) {
    int cap = 0;
    for (const auto& inst : pool)
        cap = std::max(cap, static_cast<int>(agents::full_action_table(inst).size()));
    return cap;
}

std::vector<char> table_mask(const std::vector<ActionDescriptor>& table,
                             const std::vector<ActionDescriptor>& valid, int out_dim) {
    std::vector<char> mask(static_cast<size_t>(out_dim), 0);
    // table rows are unique per instance; match by serialized form
    std::map<std::string, int> lookup;
    for (size_t i = 0; i < table.size(); ++i) lookup.emplace(table[i].to_string(), static_cast<int>(i));
    for (const auto& a : valid) {
        auto it = lookup.find(a.to_string());
        if (it != lookup.end()) mask[static_cast<size_t>(it->second)] = 1;
    }
    return mask;
}

struct AgentObs {
    std::vector<double> obs;
    Perception perception;
    std::vector<ActionDescriptor> table;   // discrete agents
    std::vector<char> mask;                // masked discrete agents
};

}  // namespace

TrainedAgent train_agent(AgentKind kind, EnvKind env, const std::vector<Instance>& train_instances,
                         const std::vector<Instance>& pool, const gae::GaePack& gae_pack,
                         const TrainConfig& cfg) {
    if (train_instances.empty()) throw std::invalid_argument("train_agent: no training instances");
    TrainedAgent agent;
    agent.kind = kind;
    agent.env = env;
    int p = embedding_p(gae_pack);
    agent.embedder = ActionEmbedder::for_env(env, p, train_instances.front());
    int q = agent.embedder.dim();

    bool unmasked_discrete = kind == AgentKind::PDiscrete || kind == AgentKind::GDiscrete;
    EnvConfig env_cfg;
    env_cfg.training = true;
    env_cfg.strict = !unmasked_discrete;

    if (kind == AgentKind::Projection)
        agent.stats = fit_projection_stats(train_instances, gae_pack, agent.embedder,
                                           cfg.stats_snapshots, child_seed(cfg.seed, 0x57a7));
    if (uses_padding_obs(kind)) agent.padding = padding_spec(env, pool);
    if (is_discrete(kind)) agent.table_dim = table_capacity(env, pool);

    int obs_dim = 0;
    PolicyNet::Head head = PolicyNet::Head::GaussianPolicy;
    int out_dim = q;
    switch (kind) {
        case AgentKind::Projection:
            obs_dim = latent::observation_dim(env, p, q);
            head = PolicyNet::Head::GaussianPolicy;
            out_dim = q;
            break;
        case AgentKind::Iterative:
            obs_dim = latent::observation_dim(env, p, 0) + q;
            head = PolicyNet::Head::QValue;
            out_dim = 1;
            break;
        case AgentKind::PDiscrete:
        case AgentKind::PDiscreteMasked:
            obs_dim = agent.padding.dim;
            head = PolicyNet::Head::DiscretePolicy;
            out_dim = agent.table_dim;
            break;
        case AgentKind::GDiscrete:
        case AgentKind::GDiscreteMasked:
            obs_dim = latent::observation_dim(env, p, 0);
            head = PolicyNet::Head::DiscretePolicy;
            out_dim = agent.table_dim;
            break;
    }
    agent.net = PolicyNet::create(head, obs_dim, out_dim, child_seed(cfg.seed, 0x0e7a));

    // per-instance training envs; rotation picks among them (varied regime)
    std::vector<std::unique_ptr<Env>> envs;
    for (const auto& inst : train_instances) envs.push_back(make_env(inst, env_cfg));

    Rng rng(child_seed(cfg.seed, 0xac7));
    int env_idx = 0;
    int episodes = 0;
    uint64_t episode_counter = 0;
    auto reset_env = [&](Env& e) {
        e.reset(child_seed(cfg.seed, 0xe9150de + episode_counter));
        ++episode_counter;
    };
    auto rotate = [&] {
        if (envs.size() > 1 && episodes % cfg.rotation_interval == 0)
            env_idx = static_cast<int>(rng.uniform_int(0, static_cast<int64_t>(envs.size()) - 1));
    };
    reset_env(*envs[static_cast<size_t>(env_idx)]);

    auto observe = [&](Env& e) {
        AgentObs view;
        const LatentStats* stats = kind == AgentKind::Projection ? &agent.stats : nullptr;
        view.perception = perceive(e, gae_pack, agent.embedder, stats);
        if (is_discrete(kind)) {
            view.table = agents::full_action_table(e.instance());
            if (is_masked(kind)) view.mask = table_mask(view.table, view.perception.valid, out_dim);
        }
        switch (kind) {
            case AgentKind::Projection: view.obs = view.perception.obs_projection; break;
            case AgentKind::Iterative:
            case AgentKind::GDiscrete:
            case AgentKind::GDiscreteMasked: view.obs = view.perception.obs_base; break;
            case AgentKind::PDiscrete:
            case AgentKind::PDiscreteMasked: view.obs = padding_observation(e, agent.padding); break;
        }
        return view;
    };

    if (kind == AgentKind::Iterative) {
        // fitted Q-iteration with an n-step replay buffer and a Polyak target
        PolicyNet target = agent.net;
        nn::AdamConfig adam_cfg;
        adam_cfg.lr = cfg.idqn.lr;
        nn::Adam opt(adam_cfg);
        agents::ReplayBuffer buffer(static_cast<size_t>(cfg.idqn.buffer_capacity));
        struct WindowEntry {
            std::vector<double> obs;
            std::vector<double> emb;
            double reward;
        };
        std::deque<WindowEntry> window;
        Env* e = envs[static_cast<size_t>(env_idx)].get();
        AgentObs view = observe(*e);
        auto flush_window = [&](bool terminal, const AgentObs& next_view, int min_keep) {
            while (static_cast<int>(window.size()) > min_keep) {
                agents::QTransition t;
                t.obs = window.front().obs;
                t.action_embedding = window.front().emb;
                double r = 0.0, g = 1.0;
                for (const auto& w : window) {
                    r += g * w.reward;
                    g *= cfg.idqn.gamma;
                }
                t.n_step_reward = r;
                t.discount = terminal ? 0.0 : g;
                t.next_obs = next_view.obs;
                t.next_valid_embeddings =
                    terminal ? ad::Tensor::zeros({0, q}) : next_view.perception.valid_embeddings;
                buffer.push(std::move(t));
                window.pop_front();
                if (!terminal) break;  // sliding emission: one per step unless flushing
            }
        };
        for (int step = 1; step <= cfg.total_steps; ++step) {
            double frac = std::min(1.0, static_cast<double>(step) /
                                            (cfg.idqn.eps_fraction * cfg.total_steps));
            double eps = cfg.idqn.eps_start + frac * (cfg.idqn.eps_end - cfg.idqn.eps_start);
            auto act = agents::iterative_act(agent.net, view.obs, view.perception.valid_embeddings,
                                             view.perception.valid, eps, rng);
            std::vector<double> emb(static_cast<size_t>(q));
            for (int c = 0; c < q; ++c)
                emb[static_cast<size_t>(c)] = view.perception.valid_embeddings.at(act.index, c);
            auto result = e->step(act.action);
            WindowEntry entry{view.obs, std::move(emb), result.reward};
            window.push_back(std::move(entry));
            if (result.done) {
                AgentObs dummy;
                dummy.obs = view.obs;
                flush_window(true, dummy, 0);
                ++episodes;
                rotate();
                e = envs[static_cast<size_t>(env_idx)].get();
                reset_env(*e);
                view = observe(*e);
            } else {
                view = observe(*e);
                if (static_cast<int>(window.size()) >= cfg.idqn.n_step)
                    flush_window(false, view, cfg.idqn.n_step - 1);
            }
            if (step > cfg.idqn.learning_starts && step % cfg.idqn.train_freq == 0 &&
                buffer.size() >= static_cast<size_t>(cfg.idqn.batch))
                agents::idqn_update(agent.net, target, opt, buffer, cfg.idqn, rng);
            if (step % cfg.idqn.target_update_interval == 0)
                agents::polyak_update(agent.net, target, cfg.idqn.tau);
        }
        return agent;
    }

    // PPO family
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = cfg.ppo.lr;
    nn::Adam opt(adam_cfg);
    agents::ReturnNormalizer normalizer(cfg.ppo.gamma);
    bool normalize_returns = kind == AgentKind::Projection;
    std::vector<agents::PpoTransition> rollout;
    rollout.reserve(static_cast<size_t>(cfg.ppo.rollout));
    Env* e = envs[static_cast<size_t>(env_idx)].get();
    AgentObs view = observe(*e);
    for (int step = 1; step <= cfg.total_steps; ++step) {
        agents::PpoTransition t;
        t.obs = view.obs;
        StepResult result;
        if (kind == AgentKind::Projection) {
            auto act = agents::projection_act(agent.net, view.obs, *view.perception.space, {},
                                              false, rng);
            t.proto = act.raw_proto;
            t.log_prob = act.log_prob;
            t.value = act.value;
            result = e->step(act.action);
        } else {
            const std::vector<char>* mask = is_masked(kind) ? &view.mask : nullptr;
            auto act = agents::discrete_act(agent.net, view.obs, view.table, mask, false, rng);
            t.action_index = act.index;
            t.log_prob = act.log_prob;
            t.value = act.value;
            if (is_masked(kind)) t.mask = view.mask;
            result = act.in_table ? e->step(act.action) : e->step(ActionDescriptor{});
        }
        t.reward = normalize_returns ? normalizer.normalize(result.reward, result.done)
                                     : result.reward;
        t.done = result.done;
        rollout.push_back(std::move(t));

        if (result.done) {
            ++episodes;
            rotate();
            e = envs[static_cast<size_t>(env_idx)].get();
            reset_env(*e);
        }
        view = observe(*e);

        if (static_cast<int>(rollout.size()) >= cfg.ppo.rollout) {
            double bootstrap = 0.0;
            if (!rollout.back().done) {
                ad::Tensor row = ad::Tensor::matrix(1, agent.net.obs_dim(), view.obs);
                bootstrap = agent.net.apply(row).value.at(0, 0);
            }
            agents::ppo_update(agent.net, opt, rollout, bootstrap, cfg.ppo, rng);
            rollout.clear();
        }
    }
    return agent;
}

EpisodeResult run_episode(const TrainedAgent& agent, Env& env, const gae::GaePack& gae_pack,
                          uint64_t seed, bool record_times) {
    using Clock = std::chrono::steady_clock;
    EpisodeResult out;
    Rng rng(child_seed(seed, 0x0ea1));
    env.reset(seed);
    int64_t forwards_before = agent.net.forward_count();
    std::vector<ActionDescriptor> table;
    if (is_discrete(agent.kind)) table = agents::full_action_table(env.instance());
    while (!env.done()) {
        const LatentStats* stats = agent.kind == AgentKind::Projection ? &agent.stats : nullptr;
        Perception perception = perceive(env, gae_pack, agent.embedder, stats);
        std::vector<double> obs;
        std::vector<char> mask;
        switch (agent.kind) {
            case AgentKind::Projection: obs = perception.obs_projection; break;
            case AgentKind::Iterative:
            case AgentKind::GDiscrete:
            case AgentKind::GDiscreteMasked: obs = perception.obs_base; break;
            case AgentKind::PDiscrete:
            case AgentKind::PDiscreteMasked: obs = padding_observation(env, agent.padding); break;
        }
        if (is_masked(agent.kind)) mask = table_mask(table, perception.valid, agent.net.out_dim());

        auto start = Clock::now();
        ActionDescriptor action;
        bool in_table = true;
        if (agent.kind == AgentKind::Projection) {
            action = agents::projection_act(agent.net, obs, *perception.space, {}, true, rng).action;
        } else if (agent.kind == AgentKind::Iterative) {
            action = agents::iterative_act(agent.net, obs, perception.valid_embeddings,
                                           perception.valid, 0.0, rng)
                         .action;
        } else {
            const std::vector<char>* mask_ptr = is_masked(agent.kind) ? &mask : nullptr;
            auto act = agents::discrete_act(agent.net, obs, table, mask_ptr, true, rng);
            action = act.action;
            in_table = act.in_table;
        }
        auto stop = Clock::now();
        if (record_times)
            out.act_ms.push_back(
                std::chrono::duration<double, std::milli>(stop - start).count());
        ++out.decisions;
        out.valid_seen += static_cast<int64_t>(perception.valid.size());
        if (in_table)
            env.step(action);
        else
            env.step(ActionDescriptor{});
    }
    out.forwards = agent.net.forward_count() - forwards_before;
    out.score = env.score();
    return out;
}

TrainedAgent random_agent(AgentKind kind, EnvKind env, const Instance& example,
                          const std::vector<Instance>& pool, const gae::GaePack& gae_pack,
                          uint64_t seed) {
    TrainedAgent agent;
    agent.kind = kind;
    agent.env = env;
    int p = embedding_p(gae_pack);
    agent.embedder = ActionEmbedder::for_env(env, p, example);
    int q = agent.embedder.dim();
    if (kind == AgentKind::Projection)
        agent.stats = fit_projection_stats({example}, gae_pack, agent.embedder, 1, seed);
    if (uses_padding_obs(kind)) agent.padding = padding_spec(env, pool);
    if (is_discrete(kind)) agent.table_dim = table_capacity(env, pool);
    int obs_dim = 0;
    PolicyNet::Head head = PolicyNet::Head::GaussianPolicy;
    int out_dim = q;
    switch (kind) {
        case AgentKind::Projection:
            obs_dim = latent::observation_dim(env, p, q);
            break;
        case AgentKind::Iterative:
            obs_dim = latent::observation_dim(env, p, 0) + q;
            head = PolicyNet::Head::QValue;
            out_dim = 1;
            break;
        case AgentKind::PDiscrete:
        case AgentKind::PDiscreteMasked:
            obs_dim = agent.padding.dim;
            head = PolicyNet::Head::DiscretePolicy;
            out_dim = agent.table_dim;
            break;
        case AgentKind::GDiscrete:
        case AgentKind::GDiscreteMasked:
            obs_dim = latent::observation_dim(env, p, 0);
            head = PolicyNet::Head::DiscretePolicy;
            out_dim = agent.table_dim;
            break;
    }
    agent.net = PolicyNet::create(head, obs_dim, out_dim, seed);
    return agent;
}

void save_agent(const std::string& path, const TrainedAgent& agent) {
    nlohmann::ordered_json meta;
    meta["agent"] = agents::to_string(agent.kind);
    meta["env"] = to_string(agent.env);
    meta["obs_dim"] = agent.net.obs_dim();
    meta["out_dim"] = agent.net.out_dim();
    meta["head"] = agent.net.head() == PolicyNet::Head::GaussianPolicy ? "gaussian"
                   : agent.net.head() == PolicyNet::Head::DiscretePolicy ? "discrete"
                                                                         : "q";
    meta["embedder"] = {{"p", agent.embedder.p}, {"path_pad_nodes", agent.embedder.path_pad_nodes}};
    meta["stats"] = {{"mean", agent.stats.mean},
                     {"stddev", agent.stats.stddev},
                     {"lo", agent.stats.lo},
                     {"hi", agent.stats.hi}};
    meta["padding"] = {{"max_nodes", agent.padding.max_nodes},
                       {"max_comm_edges", agent.padding.max_comm_edges},
                       {"max_demands", agent.padding.max_demands},
                       {"max_vms", agent.padding.max_vms},
                       {"max_pms", agent.padding.max_pms},
                       {"dim", agent.padding.dim}};
    meta["table_dim"] = agent.table_dim;
    save_checkpoint(path, agent.net.params(), meta.dump(2));
}

TrainedAgent load_agent(const std::string& path) {
    auto meta = nlohmann::ordered_json::parse(load_checkpoint_metadata(path));
    TrainedAgent agent;
    agent.kind = agents::agent_kind_from_string(meta.at("agent").get<std::string>());
    agent.env = env_kind_from_string(meta.at("env").get<std::string>());
    std::string head_name = meta.at("head").get<std::string>();
    PolicyNet::Head head = head_name == "gaussian" ? PolicyNet::Head::GaussianPolicy
                           : head_name == "discrete" ? PolicyNet::Head::DiscretePolicy
                                                     : PolicyNet::Head::QValue;
    agent.net = PolicyNet::create(head, meta.at("obs_dim").get<int>(), meta.at("out_dim").get<int>(),
                                  0);
    nn::ParamStore loaded = load_checkpoint(path);
    for (const auto& name : loaded.names()) agent.net.params().at(name) = loaded.at(name);
    agent.embedder.env = agent.env;
    agent.embedder.p = meta.at("embedder").at("p").get<int>();
    agent.embedder.path_pad_nodes = meta.at("embedder").at("path_pad_nodes").get<int>();
    agent.embedder.hash.dim = kVulnHashDim;
    agent.stats.mean = meta.at("stats").at("mean").get<std::vector<double>>();
    agent.stats.stddev = meta.at("stats").at("stddev").get<std::vector<double>>();
    agent.stats.lo = meta.at("stats").at("lo").get<std::vector<double>>();
    agent.stats.hi = meta.at("stats").at("hi").get<std::vector<double>>();
    agent.padding.env = agent.env;
    agent.padding.max_nodes = meta.at("padding").at("max_nodes").get<int>();
    agent.padding.max_comm_edges = meta.at("padding").at("max_comm_edges").get<int>();
    agent.padding.max_demands = meta.at("padding").at("max_demands").get<int>();
    agent.padding.max_vms = meta.at("padding").at("max_vms").get<int>();
    agent.padding.max_pms = meta.at("padding").at("max_pms").get<int>();
    agent.padding.dim = meta.at("padding").at("dim").get<int>();
    agent.table_dim = meta.at("table_dim").get<int>();
    return agent;
}

}  // namespace lagco::train
