#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lagco/rng.hpp"
#include "lagco/tensor.hpp"

namespace lagco::nn {

using ad::Tensor;

// Named, detached parameter tensors with a stable iteration order.
class ParamStore {
public:
    Tensor& create(const std::string& name, ad::Shape shape);
    Tensor& at(const std::string& name);
    const Tensor& at(const std::string& name) const;
    bool contains(const std::string& name) const { return values_.count(name) > 0; }
    const std::vector<std::string>& names() const { return names_; }
    size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Tensor> values_;
};

// Binds store parameters onto one tape for a single forward/backward step.
// Each parameter is watched at most once, so gradients accumulate correctly
// when a parameter is used in several places.
class ParamContext {
public:
    ParamContext(ad::Tape& tape, ParamStore& store) : tape_(tape), store_(store) {}

    Tensor operator()(const std::string& name);
    ParamStore& store() { return store_; }
    ad::Tape& tape() { return tape_; }

    // Maps the node-keyed gradients back to parameter names.
    std::unordered_map<std::string, std::vector<double>> named_grads(const ad::GradMap& grads) const;

private:
    ad::Tape& tape_;
    ParamStore& store_;
    std::unordered_map<std::string, int> bound_;
    std::unordered_map<int, std::string> node_names_;
    std::unordered_map<std::string, Tensor> tensors_;
};

enum class Activation { ReLU, LeakyReLU, None };

struct MlpSpec {
    int in = 0;
    std::vector<int> hidden;
    int out = 0;
    Activation act = Activation::ReLU;
    bool final_act = false;
};

void mlp_init(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng);
Tensor mlp_forward(ParamContext& pc, const std::string& prefix, const MlpSpec& spec, const Tensor& x);
// Forward pass without a tape, for inference.
Tensor mlp_apply(const ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                 const Tensor& x);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
    double weight_decay = 1e-4;
};

// Adam with L2-style weight decay folded into the gradient; AMSGrad disabled.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(ParamStore& params, const std::unordered_map<std::string, std::vector<double>>& grads);
    int64_t steps() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    void set_lr(double lr) { cfg_.lr = lr; }

private:
    struct Moments {
        std::vector<double> m, v;
    };
    AdamConfig cfg_;
    int64_t step_ = 0;
    std::unordered_map<std::string, Moments> moments_;
};

// Global gradient-norm clipping; returns the pre-clip norm.
double clip_grad_norm(std::unordered_map<std::string, std::vector<double>>& grads, double max_norm);

}  // namespace lagco::nn
