#pragma once

#include <atomic>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "lagco/env.hpp"
#include "lagco/latent.hpp"
#include "lagco/nn.hpp"
#include "lagco/rng.hpp"

namespace lagco::agents {

enum class AgentKind {
    Projection,       // continuous proto-action + k-NN decode
    Iterative,        // Q over every valid action embedding
    PDiscrete,        // padding observation, unmasked logits
    PDiscreteMasked,  // padding observation, invalid logits masked
    GDiscrete,        // pooled GNN observation, unmasked
    GDiscreteMasked,  // pooled GNN observation, masked
};

std::string to_string(AgentKind kind);
AgentKind agent_kind_from_string(const std::string& s);
bool is_discrete(AgentKind kind);
bool is_masked(AgentKind kind);
bool uses_padding_obs(AgentKind kind);

struct PpoConfig {
    double lr = 0.001;
    int batch = 64;
    double gamma = 0.9;
    int rollout = 2048;
    double ent_coef = 0.01;
    double max_grad_norm = 0.5;
    double clip = 0.2;
    double gae_lambda = 0.95;
    int epochs = 10;
    double vf_coef = 0.5;
};

struct IdqnConfig {
    double lr = 0.0001;
    int batch = 32;
    double gamma = 0.95;
    int n_step = 5;
    double tau = 0.05;
    int target_update_interval = 10000;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_fraction = 0.1;  // fraction of total steps for the linear decay
    int train_freq = 4;
    int learning_starts = 500;
    int buffer_capacity = 20000;
    double max_grad_norm = 10.0;
};

// The shared lightweight controller: [128, 64] LeakyReLU trunk plus a
// per-agent head (and a value head for the PPO variants).
class PolicyNet {
public:
    enum class Head { GaussianPolicy, DiscretePolicy, QValue };

    PolicyNet() = default;
    PolicyNet(const PolicyNet& other)
        : head_(other.head_),
          obs_dim_(other.obs_dim_),
          out_dim_(other.out_dim_),
          params_(other.params_),
          forward_count_(other.forward_count_.load()) {}
    PolicyNet& operator=(const PolicyNet& other) {
        head_ = other.head_;
        obs_dim_ = other.obs_dim_;
        out_dim_ = other.out_dim_;
        params_ = other.params_;
        forward_count_.store(other.forward_count_.load());
        return *this;
    }

    static PolicyNet create(Head head, int obs_dim, int out_dim, uint64_t seed);

    Head head() const { return head_; }
    int obs_dim() const { return obs_dim_; }
    int out_dim() const { return out_dim_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }

    struct Out {
        ad::Tensor head;   // mean rows / logits rows / q column
        ad::Tensor value;  // [B x 1], PPO heads only
    };
    Out forward(nn::ParamContext& pc, const ad::Tensor& obs_rows) const;
    ad::Tensor log_std(nn::ParamContext& pc) const;  // gaussian head only

    // inference-path forwards; each processed row counts once
    Out apply(const ad::Tensor& obs_rows) const;
    const std::vector<double>& log_std_values() const;

    int64_t forward_count() const { return forward_count_.load(); }
    void reset_forward_count() { forward_count_.store(0); }

private:
    Head head_ = Head::GaussianPolicy;
    int obs_dim_ = 0, out_dim_ = 0;
    nn::ParamStore params_;
    mutable std::atomic<int64_t> forward_count_{0};
};

// ---- action selection ----

struct ProjectionAct {
    ActionDescriptor action;
    int index = -1;                 // into the space's action list
    std::vector<double> raw_proto;  // pre-clamp Gaussian sample (or mean)
    double log_prob = 0.0;
    double value = 0.0;
};
// One policy forward produces the proto-action; decoding restricts to the
// space's valid actions (mask empty = all rows valid).
ProjectionAct projection_act(const PolicyNet& net, const std::vector<double>& obs,
                             const latent::LatentSpace& space, const std::vector<char>& valid_mask,
                             bool deterministic, Rng& rng);

struct IterativeAct {
    ActionDescriptor action;
    int index = -1;  // into `valid`
};
// Q(o, u(a)) for every valid action embedding; forward count grows with |A|.
IterativeAct iterative_act(const PolicyNet& qnet, const std::vector<double>& obs,
                           const ad::Tensor& valid_embeddings,
                           const std::vector<ActionDescriptor>& valid, double epsilon, Rng& rng);

struct DiscreteAct {
    ActionDescriptor action;  // empty components when a padding slot was picked
    int index = -1;           // logit index
    double log_prob = 0.0;
    double value = 0.0;
    bool in_table = false;
};
// mask == nullptr: unmasked variant, any logit (even padding) may be chosen
DiscreteAct discrete_act(const PolicyNet& net, const std::vector<double>& obs,
                         const std::vector<ActionDescriptor>& table,
                         const std::vector<char>* mask, bool deterministic, Rng& rng);

// static enumeration of the instance's full action set (Table-ordered)
std::vector<ActionDescriptor> full_action_table(const Instance& instance);

// ---- PPO ----

struct PpoTransition {
    std::vector<double> obs;
    int action_index = -1;          // discrete heads
    std::vector<double> proto;      // gaussian head
    std::vector<char> mask;         // discrete masked heads (empty otherwise)
    double log_prob = 0.0;
    double value = 0.0;
    double reward = 0.0;
    bool done = false;
};

struct PpoStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
};

PpoStats ppo_update(PolicyNet& net, nn::Adam& opt, std::vector<PpoTransition>& rollout,
                    double bootstrap_value, const PpoConfig& cfg, Rng& rng);

// running-statistics return normalizer (divide-by-std form)
class ReturnNormalizer {
public:
    explicit ReturnNormalizer(double gamma) : gamma_(gamma) {}
    double normalize(double reward, bool done);

private:
    double gamma_;
    double running_return_ = 0.0;
    double mean_ = 0.0, m2_ = 0.0;
    int64_t count_ = 0;
};

// ---- IDQN ----

struct QTransition {
    std::vector<double> obs;
    std::vector<double> action_embedding;
    double n_step_reward = 0.0;
    double discount = 0.0;  // gamma^n, zero when the window hit a terminal
    std::vector<double> next_obs;
    ad::Tensor next_valid_embeddings;  // rows of u(a') for the bootstrap max
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}
    void push(QTransition t);
    size_t size() const { return data_.size(); }
    const QTransition& sample(Rng& rng) const;

private:
    size_t capacity_;
    size_t next_ = 0;
    std::vector<QTransition> data_;
};

double idqn_update(PolicyNet& qnet, const PolicyNet& target, nn::Adam& opt,
                   const ReplayBuffer& buffer, const IdqnConfig& cfg, Rng& rng);

void polyak_update(const PolicyNet& online, PolicyNet& target, double tau);

}  // namespace lagco::agents
