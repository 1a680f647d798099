#include "lagco/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace lagco::nn {

Tensor& ParamStore::create(const std::string& name, ad::Shape shape) {
    if (values_.count(name)) throw std::invalid_argument("ParamStore: duplicate parameter " + name);
    names_.push_back(name);
    auto [it, ok] = values_.emplace(name, Tensor::zeros(std::move(shape)));
    (void)ok;
    return it->second;
}

Tensor& ParamStore::at(const std::string& name) {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw std::out_of_range("ParamStore: unknown parameter " + name);
    return it->second;
}

Tensor ParamContext::operator()(const std::string& name) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return tensors_.at(name);
    Tensor t = tape_.watch(store_.at(name));
    bound_.emplace(name, t.node());
    node_names_.emplace(t.node(), name);
    tensors_.emplace(name, t);
    return t;
}

std::unordered_map<std::string, std::vector<double>> ParamContext::named_grads(
    const ad::GradMap& grads) const {
    std::unordered_map<std::string, std::vector<double>> out;
    for (const auto& [node, name] : node_names_) {
        auto it = grads.find(node);
        if (it != grads.end()) out.emplace(name, it->second);
    }
    return out;
}

namespace {

std::vector<int> layer_dims(const MlpSpec& spec) {
    std::vector<int> dims;
    dims.push_back(spec.in);
    for (int h : spec.hidden) dims.push_back(h);
    dims.push_back(spec.out);
    return dims;
}

Tensor activate(const Tensor& x, Activation act) {
    switch (act) {
        case Activation::ReLU: return ad::relu(x);
        case Activation::LeakyReLU: return ad::leaky_relu(x);
        case Activation::None: return x;
    }
    return x;
}

}  // namespace

void mlp_init(ParamStore& store, const std::string& prefix, const MlpSpec& spec, Rng& rng) {
    auto dims = layer_dims(spec);
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        int fan_in = dims[l], fan_out = dims[l + 1];
        double bound = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor& w = store.create(prefix + ".w" + std::to_string(l), {fan_in, fan_out});
        for (auto& v : w.data()) v = rng.uniform(-bound, bound);
        store.create(prefix + ".b" + std::to_string(l), {fan_out});
    }
}

Tensor mlp_forward(ParamContext& pc, const std::string& prefix, const MlpSpec& spec,
                   const Tensor& x) {
    auto dims = layer_dims(spec);
    Tensor h = x;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        Tensor w = pc(prefix + ".w" + std::to_string(l));
        Tensor b = pc(prefix + ".b" + std::to_string(l));
        h = ad::add_rowwise(ad::matmul(h, w), b);
        bool last = l + 2 == dims.size();
        if (!last || spec.final_act) h = activate(h, spec.act);
    }
    return h;
}

Tensor mlp_apply(const ParamStore& store, const std::string& prefix, const MlpSpec& spec,
                 const Tensor& x) {
    auto dims = layer_dims(spec);
    Tensor h = x;
    for (size_t l = 0; l + 1 < dims.size(); ++l) {
        const Tensor& w = store.at(prefix + ".w" + std::to_string(l));
        const Tensor& b = store.at(prefix + ".b" + std::to_string(l));
        h = ad::add_rowwise(ad::matmul(h, w), b);
        bool last = l + 2 == dims.size();
        if (!last || spec.final_act) h = activate(h, spec.act);
    }
    return h;
}

void Adam::step(ParamStore& params,
                const std::unordered_map<std::string, std::vector<double>>& grads) {
    ++step_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (const auto& name : params.names()) {
        auto git = grads.find(name);
        if (git == grads.end()) continue;
        Tensor& p = params.at(name);
        const auto& g = git->second;
        if (g.size() != p.data().size())
            throw std::invalid_argument("Adam: gradient shape mismatch for " + name);
        auto& mom = moments_[name];
        if (mom.m.empty()) {
            mom.m.assign(g.size(), 0.0);
            mom.v.assign(g.size(), 0.0);
        }
        auto& pd = p.data();
        for (size_t i = 0; i < g.size(); ++i) {
            double grad = g[i] + cfg_.weight_decay * pd[i];
            mom.m[i] = cfg_.beta1 * mom.m[i] + (1.0 - cfg_.beta1) * grad;
            mom.v[i] = cfg_.beta2 * mom.v[i] + (1.0 - cfg_.beta2) * grad * grad;
            double mhat = mom.m[i] / bc1;
            double vhat = mom.v[i] / bc2;
            pd[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

double clip_grad_norm(std::unordered_map<std::string, std::vector<double>>& grads,
                      double max_norm) {
    double sq = 0.0;
    for (const auto& [name, g] : grads)
        for (double x : g) sq += x * x;
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double s = max_norm / norm;
        for (auto& [name, g] : grads)
            for (double& x : g) x *= s;
    }
    return norm;
}

}  // namespace lagco::nn
