#include <algorithm>
#include <map>

#include "lagco/encoders.hpp"
#include "lagco/envs.hpp"

namespace lagco {

namespace {

const latent::FeatureHashEncoder& vuln_encoder() {
    static latent::FeatureHashEncoder enc{kVulnHashDim, 0x1a9c0ULL};
    return enc;
}

Graph cyber_graph(const CyberData& d, const std::vector<uint8_t>& visible,
                  const std::vector<uint8_t>& compromised,
                  const std::vector<uint8_t>& feature_visible, const std::vector<uint8_t>& dos,
                  const std::vector<uint8_t>& exfiltrated,
                  const std::vector<std::tuple<int, int, int>>& attack_edges) {
    Graph g(d.n_nodes, true);
    g.add_node_attribute({"vuln_embed", AttrKind::Continuous, kVulnHashDim, AttrNorm::L1});
    g.add_node_attribute({"visible", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"compromised", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"privilege", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"data_present", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"exfiltrated", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"persistence", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"dos", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"defense_evasion", AttrKind::Binary, 1, AttrNorm::None});
    g.add_edge_attribute({"vuln_embed", AttrKind::Continuous, kVulnHashDim, AttrNorm::L1});

    for (int v = 0; v < d.n_nodes; ++v) {
        if (!visible[static_cast<size_t>(v)]) continue;  // undiscovered: all-zero features
        g.set_node_value(1, v, 1.0);
        g.set_node_value(2, v, compromised[static_cast<size_t>(v)] ? 1.0 : 0.0);
        g.set_node_value(3, v, compromised[static_cast<size_t>(v)] ? 1.0 : 0.0);
        g.set_node_value(7, v, dos[static_cast<size_t>(v)] ? 1.0 : 0.0);
        bool details = compromised[static_cast<size_t>(v)] || feature_visible[static_cast<size_t>(v)];
        if (!details) continue;  // discovered but feature-masked
        // pooled vulnerability embedding (mean over the node's vulns)
        std::vector<double> pooled(kVulnHashDim, 0.0);
        for (const auto& vuln : d.vulns[static_cast<size_t>(v)]) {
            auto e = vuln_encoder().encode(vuln.text);
            for (int i = 0; i < kVulnHashDim; ++i) pooled[static_cast<size_t>(i)] += e[static_cast<size_t>(i)];
        }
        if (!d.vulns[static_cast<size_t>(v)].empty())
            for (auto& x : pooled) x /= static_cast<double>(d.vulns[static_cast<size_t>(v)].size());
        for (int i = 0; i < kVulnHashDim; ++i) g.set_node_value(0, v, pooled[static_cast<size_t>(i)], i);
        g.set_node_value(4, v, d.data_present[static_cast<size_t>(v)] ? 1.0 : 0.0);
        g.set_node_value(5, v, exfiltrated[static_cast<size_t>(v)] ? 1.0 : 0.0);
        g.set_node_value(6, v, compromised[static_cast<size_t>(v)] ? 1.0 : 0.0);
        g.set_node_value(8, v, compromised[static_cast<size_t>(v)] && !dos[static_cast<size_t>(v)] ? 1.0 : 0.0);
    }

    // executed attack actions, pooled per (src, dst) pair
    std::map<std::pair<int, int>, std::vector<int>> grouped;
    for (const auto& [u, v, k] : attack_edges) grouped[{u, v}].push_back(k);
    for (const auto& [key, vulns] : grouped) {
        int e = g.add_edge(key.first, key.second);
        std::vector<double> pooled(kVulnHashDim, 0.0);
        for (int k : vulns) {
            auto emb = vuln_encoder().encode(
                d.vulns[static_cast<size_t>(key.second)][static_cast<size_t>(k)].text);
            for (int i = 0; i < kVulnHashDim; ++i) pooled[static_cast<size_t>(i)] += emb[static_cast<size_t>(i)];
        }
        for (auto& x : pooled) x /= static_cast<double>(vulns.size());
        for (int i = 0; i < kVulnHashDim; ++i) g.set_edge_value(0, e, pooled[static_cast<size_t>(i)], i);
    }
    return g;
}

}  // namespace

GraphBundle cyber_base_bundle(const CyberData& d) {
    std::vector<uint8_t> none(static_cast<size_t>(d.n_nodes), 0);
    std::vector<uint8_t> all(static_cast<size_t>(d.n_nodes), 1);
    GraphBundle bundle;
    // pre-reset view: everything visible with full features, no attack history
    bundle[kAttackGraph] = cyber_graph(d, all, none, all, none, none, {});
    return bundle;
}

CyberPathEnv::CyberPathEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<CyberData>();
}

int CyberPathEnv::compromised_count() const {
    int c = 0;
    for (uint8_t x : compromised_) c += x;
    return c;
}

void CyberPathEnv::discover_neighbors(int node) {
    (void)node;  // fully connected topology: every node is adjacent
    bool found = false;
    for (int v = 0; v < d_->n_nodes; ++v) {
        if (visible_[static_cast<size_t>(v)]) continue;
        if (rng_.bernoulli(d_->p_recon)) {
            visible_[static_cast<size_t>(v)] = 1;
            feature_visible_[static_cast<size_t>(v)] = rng_.bernoulli(d_->p_feature_visible) ? 1 : 0;
            found = true;
        }
    }
    if (!found) {
        // guarantee progress: reveal one random unknown node, if any remain
        std::vector<int> unknown;
        for (int v = 0; v < d_->n_nodes; ++v)
            if (!visible_[static_cast<size_t>(v)]) unknown.push_back(v);
        if (!unknown.empty()) {
            int v = unknown[static_cast<size_t>(rng_.uniform_int(0, static_cast<int64_t>(unknown.size()) - 1))];
            visible_[static_cast<size_t>(v)] = 1;
            feature_visible_[static_cast<size_t>(v)] = rng_.bernoulli(d_->p_feature_visible) ? 1 : 0;
        }
    }
}

void CyberPathEnv::do_reset() {
    int n = d_->n_nodes;
    visible_.assign(static_cast<size_t>(n), 0);
    compromised_.assign(static_cast<size_t>(n), 0);
    feature_visible_.assign(static_cast<size_t>(n), 0);
    dos_.assign(static_cast<size_t>(n), 0);
    exfiltrated_.assign(static_cast<size_t>(n), 0);
    attack_edges_.clear();
    int start = static_cast<int>(rng_.uniform_int(0, n - 1));
    visible_[static_cast<size_t>(start)] = 1;
    feature_visible_[static_cast<size_t>(start)] = 1;
    compromised_[static_cast<size_t>(start)] = 1;
    if (d_->data_present[static_cast<size_t>(start)]) exfiltrated_[static_cast<size_t>(start)] = 1;
    discover_neighbors(start);
    rebuild_graph();
}

void CyberPathEnv::rebuild_graph() {
    bundle_[kAttackGraph] =
        cyber_graph(*d_, visible_, compromised_, feature_visible_, dos_, exfiltrated_, attack_edges_);
}

double CyberPathEnv::raw_objective() const { return static_cast<double>(compromised_count()); }

bool CyberPathEnv::naturally_done() const { return compromised_count() == d_->n_nodes; }

std::vector<ActionDescriptor> CyberPathEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (int u = 0; u < d_->n_nodes; ++u) {
        if (!compromised_[static_cast<size_t>(u)]) continue;
        for (int v = 0; v < d_->n_nodes; ++v) {
            if (v == u || !visible_[static_cast<size_t>(v)] || compromised_[static_cast<size_t>(v)])
                continue;
            for (int k = 0; k < d_->vulns_per_node; ++k)
                out.push_back({{ActionComponent::node(kAttackGraph, u),
                                ActionComponent::node(kAttackGraph, v),
                                ActionComponent::object(
                                    d_->vulns[static_cast<size_t>(v)][static_cast<size_t>(k)].text, k)}});
        }
    }
    return out;
}

bool CyberPathEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 3) return false;
    const auto& src = a.components[0];
    const auto& dst = a.components[1];
    const auto& vuln = a.components[2];
    if (src.kind != ActionComponent::Kind::Node || dst.kind != ActionComponent::Kind::Node ||
        vuln.kind != ActionComponent::Kind::Object)
        return false;
    if (src.nodes.size() != 1 || dst.nodes.size() != 1) return false;
    int u = src.nodes[0], v = dst.nodes[0], k = vuln.option;
    if (u < 0 || u >= d_->n_nodes || v < 0 || v >= d_->n_nodes || u == v) return false;
    if (k < 0 || k >= d_->vulns_per_node) return false;
    return compromised_[static_cast<size_t>(u)] && visible_[static_cast<size_t>(v)] &&
           !compromised_[static_cast<size_t>(v)];
}

double CyberPathEnv::apply(const ActionDescriptor& a) {
    int u = a.components[0].nodes[0];
    int v = a.components[1].nodes[0];
    int k = a.components[2].option;
    double span = bounds_.span();
    // failed stochastic check: negative reward, step consumed, state unchanged
    if (rng_.bernoulli(d_->p_detection)) return cfg_.cyber_reward_neg / span;
    const auto& vuln = d_->vulns[static_cast<size_t>(v)][static_cast<size_t>(k)];
    attack_edges_.emplace_back(u, v, k);
    double reward;
    if (vuln.outcome == 0) {  // credential access grants control of the target
        compromised_[static_cast<size_t>(v)] = 1;
        feature_visible_[static_cast<size_t>(v)] = 1;
        if (d_->data_present[static_cast<size_t>(v)]) exfiltrated_[static_cast<size_t>(v)] = 1;
        discover_neighbors(v);
        reward = cfg_.cyber_reward_pos / span;
    } else {  // denial of service
        dos_[static_cast<size_t>(v)] = 1;
        reward = cfg_.cyber_reward_neg / span;
    }
    rebuild_graph();
    return reward;
}

}  // namespace lagco
