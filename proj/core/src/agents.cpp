#include "lagco/agents.hpp"

#include <algorithm>
#include <cmath>

#include "lagco/envs.hpp"

namespace lagco::agents {

using ad::Tensor;

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
constexpr double kMaskLogit = -1e30;
}  // namespace

std::string to_string(AgentKind kind) {
    switch (kind) {
        case AgentKind::Projection: return "projection";
        case AgentKind::Iterative: return "iterative";
        case AgentKind::PDiscrete: return "p_discrete";
        case AgentKind::PDiscreteMasked: return "p_discrete_m";
        case AgentKind::GDiscrete: return "g_discrete";
        case AgentKind::GDiscreteMasked: return "g_discrete_m";
    }
    return "?";
}

AgentKind agent_kind_from_string(const std::string& s) {
    for (AgentKind k : {AgentKind::Projection, AgentKind::Iterative, AgentKind::PDiscrete,
                        AgentKind::PDiscreteMasked, AgentKind::GDiscrete, AgentKind::GDiscreteMasked})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown agent kind: " + s);
}

bool is_discrete(AgentKind kind) {
    return kind == AgentKind::PDiscrete || kind == AgentKind::PDiscreteMasked ||
           kind == AgentKind::GDiscrete || kind == AgentKind::GDiscreteMasked;
}

bool is_masked(AgentKind kind) {
    return kind == AgentKind::PDiscreteMasked || kind == AgentKind::GDiscreteMasked;
}

bool uses_padding_obs(AgentKind kind) {
    return kind == AgentKind::PDiscrete || kind == AgentKind::PDiscreteMasked;
}

// ---- PolicyNet ----

namespace {

nn::MlpSpec trunk_spec(int obs_dim) { return {obs_dim, {128}, 64, nn::Activation::LeakyReLU, true}; }
nn::MlpSpec head_spec(int out_dim) { return {64, {}, out_dim, nn::Activation::LeakyReLU, false}; }

}  // namespace

PolicyNet PolicyNet::create(Head head, int obs_dim, int out_dim, uint64_t seed) {
    PolicyNet net;
    net.head_ = head;
    net.obs_dim_ = obs_dim;
    net.out_dim_ = out_dim;
    Rng rng(seed);
    nn::mlp_init(net.params_, "trunk", trunk_spec(obs_dim), rng);
    nn::mlp_init(net.params_, "head", head_spec(out_dim), rng);
    if (head != Head::QValue) nn::mlp_init(net.params_, "value", head_spec(1), rng);
    if (head == Head::GaussianPolicy)
        net.params_.create("log_std", {out_dim});  // state-independent, starts at zero
    return net;
}

PolicyNet::Out PolicyNet::forward(nn::ParamContext& pc, const Tensor& obs_rows) const {
    Tensor h = nn::mlp_forward(pc, "trunk", trunk_spec(obs_dim_), obs_rows);
    Out out;
    out.head = nn::mlp_forward(pc, "head", head_spec(out_dim_), h);
    if (head_ != Head::QValue) out.value = nn::mlp_forward(pc, "value", head_spec(1), h);
    return out;
}

ad::Tensor PolicyNet::log_std(nn::ParamContext& pc) const { return pc("log_std"); }

PolicyNet::Out PolicyNet::apply(const Tensor& obs_rows) const {
    forward_count_.fetch_add(obs_rows.rows());
    Tensor h = nn::mlp_apply(params_, "trunk", trunk_spec(obs_dim_), obs_rows);
    Out out;
    out.head = nn::mlp_apply(params_, "head", head_spec(out_dim_), h);
    if (head_ != Head::QValue) out.value = nn::mlp_apply(params_, "value", head_spec(1), h);
    return out;
}

const std::vector<double>& PolicyNet::log_std_values() const {
    return params_.at("log_std").data();
}

// ---- action selection ----

ProjectionAct projection_act(const PolicyNet& net, const std::vector<double>& obs,
                             const latent::LatentSpace& space, const std::vector<char>& valid_mask,
                             bool deterministic, Rng& rng) {
    Tensor obs_row = Tensor::matrix(1, net.obs_dim(), obs);
    auto out = net.apply(obs_row);
    ProjectionAct act;
    act.value = out.value.at(0, 0);
    const auto& log_std = net.log_std_values();
    act.raw_proto.resize(static_cast<size_t>(net.out_dim()));
    act.log_prob = 0.0;
    for (int d = 0; d < net.out_dim(); ++d) {
        double mean = out.head.at(0, d);
        double sigma = std::exp(log_std[static_cast<size_t>(d)]);
        double x = deterministic ? mean : mean + sigma * rng.normal();
        act.raw_proto[static_cast<size_t>(d)] = x;
        double zval = (x - mean) / sigma;
        act.log_prob += -0.5 * zval * zval - log_std[static_cast<size_t>(d)] - 0.5 * kLog2Pi;
    }
    int idx = space.knn_decode(act.raw_proto, 1, valid_mask)[0];
    act.index = idx;
    act.action = space.actions()[static_cast<size_t>(idx)];
    return act;
}

IterativeAct iterative_act(const PolicyNet& qnet, const std::vector<double>& obs,
                           const Tensor& valid_embeddings,
                           const std::vector<ActionDescriptor>& valid, double epsilon, Rng& rng) {
    if (valid.empty()) throw std::invalid_argument("iterative_act: empty valid set");
    IterativeAct act;
    if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
        act.index = static_cast<int>(rng.uniform_int(0, static_cast<int64_t>(valid.size()) - 1));
        act.action = valid[static_cast<size_t>(act.index)];
        return act;
    }
    // one Q evaluation per candidate action
    int n = valid_embeddings.rows();
    int q_dim = valid_embeddings.cols();
    std::vector<double> rows(static_cast<size_t>(n) * (obs.size() + static_cast<size_t>(q_dim)));
    int width = static_cast<int>(obs.size()) + q_dim;
    for (int r = 0; r < n; ++r) {
        std::copy(obs.begin(), obs.end(), rows.begin() + static_cast<size_t>(r) * width);
        for (int c = 0; c < q_dim; ++c)
            rows[static_cast<size_t>(r) * width + obs.size() + static_cast<size_t>(c)] =
                valid_embeddings.at(r, c);
    }
    auto out = qnet.apply(Tensor::matrix(n, width, std::move(rows)));
    int best = 0;
    for (int r = 1; r < n; ++r)
        if (out.head.at(r, 0) > out.head.at(best, 0)) best = r;
    act.index = best;
    act.action = valid[static_cast<size_t>(best)];
    return act;
}

DiscreteAct discrete_act(const PolicyNet& net, const std::vector<double>& obs,
                         const std::vector<ActionDescriptor>& table,
                         const std::vector<char>* mask, bool deterministic, Rng& rng) {
    if (static_cast<int>(table.size()) > net.out_dim())
        throw std::invalid_argument("discrete_act: action table exceeds the padding dimension");
    Tensor obs_row = Tensor::matrix(1, net.obs_dim(), obs);
    auto out = net.apply(obs_row);
    int n = net.out_dim();
    std::vector<double> logits(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) logits[static_cast<size_t>(i)] = out.head.at(0, i);
    if (mask != nullptr) {
        for (int i = 0; i < n; ++i) {
            bool valid = i < static_cast<int>(mask->size()) && (*mask)[static_cast<size_t>(i)];
            if (!valid) logits[static_cast<size_t>(i)] = kMaskLogit;
        }
    }
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> probs(static_cast<size_t>(n));
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        probs[static_cast<size_t>(i)] = std::exp(logits[static_cast<size_t>(i)] - mx);
        total += probs[static_cast<size_t>(i)];
    }
    for (auto& p : probs) p /= total;
    DiscreteAct act;
    if (deterministic) {
        act.index = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
    } else {
        act.index = static_cast<int>(rng.pick_weighted(probs));
    }
    act.log_prob = std::log(std::max(probs[static_cast<size_t>(act.index)], 1e-300));
    act.value = out.value.at(0, 0);
    if (act.index < static_cast<int>(table.size())) {
        act.in_table = true;
        act.action = table[static_cast<size_t>(act.index)];
    }
    return act;
}

std::vector<ActionDescriptor> full_action_table(const Instance& inst) {
    std::vector<ActionDescriptor> out;
    switch (inst.kind) {
        case EnvKind::Tsp:
        case EnvKind::MinVertex:
        case EnvKind::MaxCut: {
            for (int v = 0; v < inst.scenario_size(); ++v)
                out.push_back({{ActionComponent::node(kMainGraph, v)}});
            break;
        }
        case EnvKind::Placement: {
            const auto& d = inst.as<PlacementData>();
            for (int vm = 0; vm < d.n_vms; ++vm)
                for (int pm = 0; pm < d.n_pms; ++pm)
                    out.push_back({{ActionComponent::node(kMainGraph, vm),
                                    ActionComponent::node(kMainGraph, d.n_vms + pm)}});
            break;
        }
        case EnvKind::CyberPath: {
            const auto& d = inst.as<CyberData>();
            for (int u = 0; u < d.n_nodes; ++u)
                for (int v = 0; v < d.n_nodes; ++v) {
                    if (u == v) continue;
                    for (int k = 0; k < d.vulns_per_node; ++k)
                        out.push_back(
                            {{ActionComponent::node(kAttackGraph, u),
                              ActionComponent::node(kAttackGraph, v),
                              ActionComponent::object(
                                  d.vulns[static_cast<size_t>(v)][static_cast<size_t>(k)].text, k)}});
                }
            break;
        }
        case EnvKind::Ospf: {
            const auto& d = inst.as<OspfData>();
            for (const auto& e : d.edges)
                for (int opt = 0; opt < 3; ++opt)
                    out.push_back({{ActionComponent::edge(kCommGraph, e.u, e.v),
                                    ActionComponent::object("", opt)}});
            break;
        }
        case EnvKind::Traffic: {
            const auto& d = inst.as<TrafficData>();
            auto paths = traffic_candidate_paths(d);
            for (size_t i = 0; i < d.demands.size(); ++i)
                for (const auto& path : paths[i])
                    out.push_back({{ActionComponent::edge(kTrafficGraph, d.demands[i].src,
                                                          d.demands[i].dst),
                                    ActionComponent::path(kCommGraph, path)}});
            break;
        }
    }
    return out;
}

// ---- PPO ----

double ReturnNormalizer::normalize(double reward, bool done) {
    running_return_ = gamma_ * running_return_ + reward;
    ++count_;
    double delta = running_return_ - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (running_return_ - mean_);
    if (done) running_return_ = 0.0;
    double var = count_ > 1 ? m2_ / static_cast<double>(count_) : 1.0;
    double normalized = reward / std::sqrt(var + 1e-8);
    return std::min(10.0, std::max(-10.0, normalized));
}

namespace {

struct Advantages {
    std::vector<double> adv, ret;
};

Advantages compute_gae(const std::vector<PpoTransition>& rollout, double bootstrap_value,
                       const PpoConfig& cfg) {
    size_t n = rollout.size();
    Advantages out;
    out.adv.assign(n, 0.0);
    out.ret.assign(n, 0.0);
    double gae = 0.0;
    for (size_t i = n; i-- > 0;) {
        double next_value = i + 1 < n ? rollout[i + 1].value : bootstrap_value;
        double next_nonterminal = rollout[i].done ? 0.0 : 1.0;
        double delta = rollout[i].reward + cfg.gamma * next_value * next_nonterminal -
                       rollout[i].value;
        gae = delta + cfg.gamma * cfg.gae_lambda * next_nonterminal * gae;
        out.adv[i] = gae;
        out.ret[i] = gae + rollout[i].value;
    }
    return out;
}

}  // namespace

PpoStats ppo_update(PolicyNet& net, nn::Adam& opt, std::vector<PpoTransition>& rollout,
                    double bootstrap_value, const PpoConfig& cfg, Rng& rng) {
    if (rollout.size() < static_cast<size_t>(cfg.batch))
        throw std::invalid_argument("ppo_update: rollout buffer underfull");
    auto gae = compute_gae(rollout, bootstrap_value, cfg);
    bool gaussian = net.head() == PolicyNet::Head::GaussianPolicy;

    PpoStats stats;
    int updates = 0;
    std::vector<size_t> order(rollout.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch)) {
            size_t end = std::min(order.size(), start + static_cast<size_t>(cfg.batch));
            int b = static_cast<int>(end - start);
            if (b < 2) continue;

            // assemble the minibatch
            std::vector<double> obs_data, adv(static_cast<size_t>(b)), ret(static_cast<size_t>(b)),
                old_logp(static_cast<size_t>(b));
            obs_data.reserve(static_cast<size_t>(b) * net.obs_dim());
            for (int i = 0; i < b; ++i) {
                const auto& t = rollout[order[start + static_cast<size_t>(i)]];
                obs_data.insert(obs_data.end(), t.obs.begin(), t.obs.end());
                adv[static_cast<size_t>(i)] = gae.adv[order[start + static_cast<size_t>(i)]];
                ret[static_cast<size_t>(i)] = gae.ret[order[start + static_cast<size_t>(i)]];
                old_logp[static_cast<size_t>(i)] = t.log_prob;
            }
            // advantage normalization per minibatch
            double mean = 0.0;
            for (double a : adv) mean += a;
            mean /= b;
            double var = 0.0;
            for (double a : adv) var += (a - mean) * (a - mean);
            double stddev = std::sqrt(var / b) + 1e-8;
            for (double& a : adv) a = (a - mean) / stddev;

            ad::Tape tape;
            nn::ParamContext pc(tape, net.params());
            Tensor obs_rows = Tensor::matrix(b, net.obs_dim(), std::move(obs_data));
            auto out = net.forward(pc, obs_rows);

            Tensor logp;  // [b]
            Tensor entropy;
            if (gaussian) {
                int q = net.out_dim();
                std::vector<double> proto_data;
                proto_data.reserve(static_cast<size_t>(b) * q);
                for (int i = 0; i < b; ++i) {
                    const auto& t = rollout[order[start + static_cast<size_t>(i)]];
                    proto_data.insert(proto_data.end(), t.proto.begin(), t.proto.end());
                }
                Tensor x = Tensor::matrix(b, q, std::move(proto_data));
                Tensor log_std = net.log_std(pc);
                Tensor inv_sigma = ad::exp(ad::neg(log_std));
                Tensor zrows = ad::mul_rowwise(ad::sub(x, out.head), inv_sigma);
                // per-dim log density: -0.5 z^2 - log sigma - 0.5 log 2pi
                Tensor dens = ad::add_rowwise(
                    ad::scale(ad::mul(zrows, zrows), -0.5),
                    ad::add(ad::neg(log_std),
                            Tensor::row_vector(std::vector<double>(static_cast<size_t>(q),
                                                                   -0.5 * kLog2Pi))));
                logp = ad::reduce_axis(dens, ad::Reduce::Sum, 1);
                // diag-gaussian entropy: sum(log sigma) + q/2 (1 + log 2pi)
                entropy = ad::add(ad::reduce_sum(log_std),
                                  Tensor::scalar(0.5 * q * (1.0 + kLog2Pi)));
            } else {
                int n = net.out_dim();
                // masked heads re-apply the stored per-state mask
                std::vector<double> mask_data(static_cast<size_t>(b) * n, 0.0);
                bool any_mask = false;
                std::vector<double> onehot(static_cast<size_t>(b) * n, 0.0);
                for (int i = 0; i < b; ++i) {
                    const auto& t = rollout[order[start + static_cast<size_t>(i)]];
                    onehot[static_cast<size_t>(i) * n + t.action_index] = 1.0;
                    if (!t.mask.empty()) {
                        any_mask = true;
                        for (int j = 0; j < n; ++j) {
                            bool valid = j < static_cast<int>(t.mask.size()) &&
                                         t.mask[static_cast<size_t>(j)];
                            if (!valid) mask_data[static_cast<size_t>(i) * n + j] = kMaskLogit;
                        }
                    }
                }
                Tensor logits = any_mask
                                    ? ad::add(out.head, Tensor::matrix(b, n, std::move(mask_data)))
                                    : out.head;
                Tensor log_probs = ad::log_softmax_rows(logits);
                Tensor chosen = ad::mul(log_probs, Tensor::matrix(b, n, std::move(onehot)));
                logp = ad::reduce_axis(chosen, ad::Reduce::Sum, 1);
                Tensor probs = ad::softmax_rows(logits);
                Tensor plogp = ad::mul(probs, log_probs);
                entropy = ad::neg(ad::reduce_mean(ad::reduce_axis(plogp, ad::Reduce::Sum, 1)));
            }

            Tensor adv_t = Tensor::row_vector(adv);
            Tensor ratio = ad::exp(ad::sub(logp, Tensor::row_vector(old_logp)));
            Tensor surr1 = ad::mul(ratio, adv_t);
            Tensor surr2 = ad::mul(ad::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip), adv_t);
            Tensor policy_loss = ad::neg(ad::reduce_mean(ad::minimum(surr1, surr2)));
            Tensor value_loss = ad::mse_loss(ad::reshape(out.value, {b}), Tensor::row_vector(ret));
            Tensor loss = ad::add(policy_loss, ad::scale(value_loss, cfg.vf_coef));
            loss = ad::sub(loss, ad::scale(entropy, cfg.ent_coef));

            auto grads = pc.named_grads(tape.backward(loss));
            nn::clip_grad_norm(grads, cfg.max_grad_norm);
            opt.step(net.params(), grads);

            stats.policy_loss += policy_loss.value();
            stats.value_loss += value_loss.value();
            stats.entropy += entropy.value();
            ++updates;
        }
    }
    if (updates > 0) {
        stats.policy_loss /= updates;
        stats.value_loss /= updates;
        stats.entropy /= updates;
    }
    return stats;
}

// ---- IDQN ----

void ReplayBuffer::push(QTransition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const QTransition& ReplayBuffer::sample(Rng& rng) const {
    return data_[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(data_.size()) - 1))];
}

double idqn_update(PolicyNet& qnet, const PolicyNet& target, nn::Adam& opt,
                   const ReplayBuffer& buffer, const IdqnConfig& cfg, Rng& rng) {
    if (buffer.size() < static_cast<size_t>(cfg.batch))
        throw std::invalid_argument("idqn_update: replay buffer underfull");
    int b = cfg.batch;
    int width = qnet.obs_dim();
    std::vector<double> rows(static_cast<size_t>(b) * width);
    std::vector<double> targets(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        const auto& t = buffer.sample(rng);
        std::copy(t.obs.begin(), t.obs.end(), rows.begin() + static_cast<size_t>(i) * width);
        std::copy(t.action_embedding.begin(), t.action_embedding.end(),
                  rows.begin() + static_cast<size_t>(i) * width + t.obs.size());
        double bootstrap = 0.0;
        if (t.discount > 0.0 && t.next_valid_embeddings.rows() > 0) {
            // max over next valid actions under the target network
            int n = t.next_valid_embeddings.rows();
            int q_dim = t.next_valid_embeddings.cols();
            std::vector<double> next_rows(static_cast<size_t>(n) * width);
            for (int r = 0; r < n; ++r) {
                std::copy(t.next_obs.begin(), t.next_obs.end(),
                          next_rows.begin() + static_cast<size_t>(r) * width);
                for (int c = 0; c < q_dim; ++c)
                    next_rows[static_cast<size_t>(r) * width + t.next_obs.size() +
                              static_cast<size_t>(c)] = t.next_valid_embeddings.at(r, c);
            }
            auto out = target.apply(Tensor::matrix(n, width, std::move(next_rows)));
            double best = out.head.at(0, 0);
            for (int r = 1; r < n; ++r) best = std::max(best, out.head.at(r, 0));
            bootstrap = best;
        }
        targets[static_cast<size_t>(i)] = t.n_step_reward + t.discount * bootstrap;
    }
    ad::Tape tape;
    nn::ParamContext pc(tape, qnet.params());
    auto out = qnet.forward(pc, Tensor::matrix(b, width, std::move(rows)));
    Tensor loss = ad::huber_loss(ad::reshape(out.head, {b}), Tensor::row_vector(targets));
    auto grads = pc.named_grads(tape.backward(loss));
    nn::clip_grad_norm(grads, cfg.max_grad_norm);
    opt.step(qnet.params(), grads);
    return loss.value();
}

void polyak_update(const PolicyNet& online, PolicyNet& target, double tau) {
    for (const auto& name : online.params().names()) {
        const auto& src = online.params().at(name).data();
        auto& dst = target.params().at(name).data();
        for (size_t i = 0; i < src.size(); ++i) dst[i] = tau * src[i] + (1.0 - tau) * dst[i];
    }
}

}  // namespace lagco::agents
