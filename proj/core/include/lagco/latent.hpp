#pragma once

#include <map>
#include <string>
#include <vector>

#include "lagco/actions.hpp"
#include "lagco/encoders.hpp"
#include "lagco/graph.hpp"
#include "lagco/instance.hpp"
#include "lagco/tensor.hpp"

namespace lagco::latent {

enum class Pooling { Mean, Max, Min, Sum };

// column-wise pooling over the rows of a [n x d] matrix
std::vector<double> pool_rows(const ad::Tensor& m, Pooling op);

// node count, edge count, average degree, density
std::vector<double> graph_descriptors(const Graph& g);

// Fixed-dimensional observation: per bundle graph (name order) the four
// poolings of Z plus structural descriptors; optionally followed by the four
// poolings of the action-embedding matrix (projection agents only).
std::vector<double> build_observation(const GraphBundle& bundle,
                                      const std::map<std::string, ad::Tensor>& z,
                                      const ad::Tensor* action_embeddings);

int observation_dim(EnvKind env, int p, int action_dim_or_zero);

// Composes action embeddings from node-embedding rows plus encoded
// non-graph attributes, one layout per benchmark.
struct ActionEmbedder {
    EnvKind env = EnvKind::Tsp;
    int p = 16;              // node embedding dimensionality
    int path_pad_nodes = 0;  // Traffic: max_path_len + 1 slots
    FeatureHashEncoder hash{};
    OneHotEncoder delta_onehot{3};

    static ActionEmbedder for_env(EnvKind env, int p, const Instance& instance);

    int dim() const;
    std::vector<double> embed_component(const ActionComponent& c,
                                        const std::map<std::string, ad::Tensor>& z) const;
    std::vector<double> embed(const ActionDescriptor& a,
                              const std::map<std::string, ad::Tensor>& z) const;
    ad::Tensor embed_all(const std::vector<ActionDescriptor>& actions,
                         const std::map<std::string, ad::Tensor>& z) const;
};

// Frozen z-score statistics and box bounds of the latent action space.
struct LatentStats {
    std::vector<double> mean, stddev;  // zero-variance dimensions clamp stddev to 1
    std::vector<double> lo, hi;        // box bounds in normalized space, +-1 margin

    int dim() const { return static_cast<int>(mean.size()); }
    std::vector<double> normalize(const std::vector<double>& v) const;
    std::vector<double> denormalize(const std::vector<double>& v) const;
    std::vector<double> clamp_to_box(std::vector<double> v) const;
};

LatentStats fit_latent_stats(const std::vector<std::vector<double>>& embeddings);

// The latent action space of one instance state: raw and normalized
// embeddings row-aligned with the action list, plus a flat exhaustive
// cosine index for decoding. Immutable once built.
class LatentSpace {
public:
    static LatentSpace build(std::vector<ActionDescriptor> actions, const ad::Tensor& raw_embeddings,
                             const LatentStats* frozen_stats);

    int size() const { return raw_.rows(); }
    int dim() const { return raw_.cols(); }
    const std::vector<ActionDescriptor>& actions() const { return actions_; }
    const ad::Tensor& raw() const { return raw_; }
    const ad::Tensor& normalized() const { return normalized_; }
    const LatentStats& stats() const { return stats_; }
    bool has_collisions() const { return collisions_; }

    // top-k valid actions by cosine similarity to the box-clamped proto;
    // ties break toward the lower action index
    std::vector<int> knn_decode(const std::vector<double>& proto, int k,
                                const std::vector<char>& valid_mask = {}) const;

    // cmp@k: mean pairwise distance over the k-th NN distance, averaged over
    // actions, in the native (raw) embedding space
    double compactness(int k) const;

    void dump(const std::string& path) const;
    static LatentSpace load(const std::string& path);

private:
    std::vector<ActionDescriptor> actions_;
    ad::Tensor raw_, normalized_;
    std::vector<double> norm_lengths_;  // L2 norms of normalized rows
    LatentStats stats_;
    bool collisions_ = false;
};

}  // namespace lagco::latent
