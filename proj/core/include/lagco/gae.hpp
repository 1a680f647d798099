#pragma once

#include <map>
#include <string>
#include <vector>

#include "lagco/graph.hpp"
#include "lagco/instance.hpp"
#include "lagco/nn.hpp"

namespace lagco::gae {

struct EncoderConfig {
    int num_layers = 2;
    int hidden = 32;
    int out = 16;  // node embedding dimensionality p
    nn::Activation act = nn::Activation::ReLU;
};

struct LossWeights {
    double alpha = 1.0;  // node reconstruction
    double beta = 1.0;   // edge reconstruction
    double gamma = 1.0;  // adjacency contrastive term
    double tau = 0.5;    // contrastive temperature
};

// Message-passing auto-encoder over one graph schema: encoder layers build
// node states from mean-aggregated edge-conditioned messages; decoder heads
// reconstruct node features, edge features, and adjacency from dot products.
class GaeModel {
public:
    GaeModel() = default;
    static GaeModel create(const Graph& example, const EncoderConfig& cfg, Rng& rng);

    const EncoderConfig& config() const { return cfg_; }
    const std::vector<AttributeSchema>& node_schemas() const { return node_schemas_; }
    const std::vector<AttributeSchema>& edge_schemas() const { return edge_schemas_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    bool has_decoder() const { return has_decoder_; }

    // rows are unit-norm node embeddings; expects a feature-normalized graph
    ad::Tensor encode(nn::ParamContext& pc, const Graph& g) const;
    ad::Tensor encode_values(const Graph& g) const;

    struct Reconstruction {
        std::vector<ad::Tensor> node_heads;
        std::vector<ad::Tensor> edge_heads;
        ad::Tensor adjacency;  // [V x V] dot-product scores
    };
    Reconstruction decode(nn::ParamContext& pc, const ad::Tensor& z, const Graph& g) const;

    ad::Tensor loss(const Reconstruction& rec, const ad::Tensor& z, const Graph& g,
                    const LossWeights& w) const;
    ad::Tensor forward_loss(nn::ParamContext& pc, const Graph& g, const LossWeights& w) const;
    double eval_loss(const Graph& g, const LossWeights& w) const;

    // encoder-only copy, the decoder is dropped after pretraining
    GaeModel encoder_only() const;

    friend GaeModel model_from_parts(EncoderConfig cfg, std::vector<AttributeSchema> node_schemas,
                                     std::vector<AttributeSchema> edge_schemas,
                                     nn::ParamStore params, bool has_decoder);

private:
    void check_compatible(const Graph& g) const;
    EncoderConfig cfg_;
    std::vector<AttributeSchema> node_schemas_, edge_schemas_;
    nn::ParamStore params_;
    bool has_decoder_ = false;
};

// One encoder per bundle graph name (multi-graph benchmarks train several).
struct GaePack {
    EnvKind env = EnvKind::Tsp;
    std::map<std::string, GaeModel> models;

    std::map<std::string, ad::Tensor> encode_bundle(const GraphBundle& raw_bundle) const;
};

struct GaeTrainConfig {
    double lr = 0.01;
    int batch = 32;
    int epochs = 30;
    uint64_t seed = 42;
    int rollouts_per_instance = 3;
    double holdout_frac = 0.1;
    int min_pool_factor = 10;  // snapshot pool >= factor * batch
};

// Feature-normalized graph snapshots from random-valid-action rollouts.
std::map<std::string, std::vector<Graph>> collect_snapshots(const std::vector<Instance>& instances,
                                                            int rollouts_per_instance,
                                                            uint64_t seed);

struct GaeTrainResult {
    GaePack pack;
    std::map<std::string, double> initial_holdout_loss;
    std::map<std::string, double> final_holdout_loss;
};

GaeTrainResult train_gae(EnvKind env, const std::vector<Instance>& instances,
                         const EncoderConfig& enc_cfg, const LossWeights& weights,
                         const GaeTrainConfig& cfg);

// Randomly initialized encoders matching the env's graph schemas (timing runs).
GaePack random_gae(EnvKind env, const Instance& example, const EncoderConfig& enc_cfg,
                   uint64_t seed);

void save_gae(const std::string& path, const GaePack& pack);
GaePack load_gae(const std::string& path);

// edge-vs-non-edge ranking quality of the dot-product adjacency scores
double adjacency_auc(const GaeModel& model, const std::vector<Graph>& graphs);

}  // namespace lagco::gae
