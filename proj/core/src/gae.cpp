#include "lagco/gae.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lagco/checkpoint.hpp"
#include "lagco/env.hpp"

namespace lagco::gae {

using ad::Tensor;

namespace {

constexpr double kMaskValue = -1e30;

std::string layer_prefix(int layer, const char* part) {
    std::ostringstream os;
    os << "enc.l" << layer << '.' << part;
    return os.str();
}

nn::MlpSpec msg_spec(const EncoderConfig& cfg, int state_dim, int edge_dim) {
    return {state_dim + edge_dim, {}, cfg.hidden, cfg.act, true};
}

nn::MlpSpec upd_spec(const EncoderConfig& cfg, int state_dim, int layer) {
    bool last = layer == cfg.num_layers - 1;
    return {state_dim + cfg.hidden, {}, last ? cfg.out : cfg.hidden, cfg.act, !last};
}

nn::MlpSpec node_head_spec(const EncoderConfig& cfg, const AttributeSchema& schema) {
    return {cfg.out, {cfg.hidden}, schema.encoded_dim(), cfg.act, false};
}

nn::MlpSpec edge_head_spec(const EncoderConfig& cfg, const AttributeSchema& schema) {
    return {2 * cfg.out, {cfg.hidden}, schema.encoded_dim(), cfg.act, false};
}

int state_dim(const EncoderConfig& cfg, int layer, int dv) {
    return layer == 0 ? dv : cfg.hidden;
}

// directed edge occurrences (src feeds dst) over both orientations
struct Occurrences {
    std::vector<int> src, dst;
    std::vector<int> edge;  // originating stored edge
};

Occurrences occurrences(const Graph& g) {
    Occurrences occ;
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [u, v] = g.edges()[static_cast<size_t>(e)];
        occ.src.push_back(u);
        occ.dst.push_back(v);
        occ.edge.push_back(e);
        occ.src.push_back(v);
        occ.dst.push_back(u);
        occ.edge.push_back(e);
    }
    return occ;
}

}  // namespace

GaeModel model_from_parts(EncoderConfig cfg, std::vector<AttributeSchema> node_schemas,
                          std::vector<AttributeSchema> edge_schemas, nn::ParamStore params,
                          bool has_decoder) {
    GaeModel m;
    m.cfg_ = cfg;
    m.node_schemas_ = std::move(node_schemas);
    m.edge_schemas_ = std::move(edge_schemas);
    m.params_ = std::move(params);
    m.has_decoder_ = has_decoder;
    return m;
}

GaeModel GaeModel::create(const Graph& example, const EncoderConfig& cfg, Rng& rng) {
    GaeModel m;
    m.cfg_ = cfg;
    m.node_schemas_ = example.node_schemas();
    m.edge_schemas_ = example.edge_schemas();
    int dv = node_feature_dim(example);
    int de = edge_feature_dim(example);
    for (int l = 0; l < cfg.num_layers; ++l) {
        int s = state_dim(cfg, l, dv);
        nn::mlp_init(m.params_, layer_prefix(l, "msg"), msg_spec(cfg, s, de), rng);
        nn::mlp_init(m.params_, layer_prefix(l, "upd"), upd_spec(cfg, s, l), rng);
    }
    for (size_t a = 0; a < m.node_schemas_.size(); ++a)
        nn::mlp_init(m.params_, "dec.node" + std::to_string(a),
                     node_head_spec(cfg, m.node_schemas_[a]), rng);
    for (size_t a = 0; a < m.edge_schemas_.size(); ++a)
        nn::mlp_init(m.params_, "dec.edge" + std::to_string(a),
                     edge_head_spec(cfg, m.edge_schemas_[a]), rng);
    m.has_decoder_ = true;
    return m;
}

void GaeModel::check_compatible(const Graph& g) const {
    auto schema_sig = [](const std::vector<AttributeSchema>& s) {
        std::string sig;
        for (const auto& a : s) sig += a.name + "/" + std::to_string(a.encoded_dim()) + ";";
        return sig;
    };
    if (schema_sig(g.node_schemas()) != schema_sig(node_schemas_) ||
        schema_sig(g.edge_schemas()) != schema_sig(edge_schemas_))
        throw GraphError("graph feature schemas do not match the trained encoder");
}

Tensor GaeModel::encode(nn::ParamContext& pc, const Graph& g) const {
    check_compatible(g);
    Tensor h = node_feature_matrix(g);
    Tensor edge_feats = edge_feature_matrix(g);
    auto occ = occurrences(g);
    int v_count = g.num_nodes();
    int occ_count = static_cast<int>(occ.src.size());

    // duplicated edge features per occurrence
    std::vector<double> fe(static_cast<size_t>(occ_count) * edge_feats.cols());
    for (int o = 0; o < occ_count; ++o)
        for (int d = 0; d < edge_feats.cols(); ++d)
            fe[static_cast<size_t>(o) * edge_feats.cols() + d] =
                edge_feats.at(occ.edge[static_cast<size_t>(o)], d);
    Tensor occ_feats({occ_count, edge_feats.cols()}, std::move(fe));

    // mean-aggregation matrix: row v averages messages arriving at v
    std::vector<double> agg(static_cast<size_t>(v_count) * occ_count, 0.0);
    std::vector<int> indeg(static_cast<size_t>(v_count), 0);
    for (int o = 0; o < occ_count; ++o) ++indeg[static_cast<size_t>(occ.dst[static_cast<size_t>(o)])];
    for (int o = 0; o < occ_count; ++o) {
        int dst = occ.dst[static_cast<size_t>(o)];
        agg[static_cast<size_t>(dst) * occ_count + o] = 1.0 / indeg[static_cast<size_t>(dst)];
    }
    Tensor agg_matrix({v_count, occ_count}, std::move(agg));

    int dv = node_feature_dim(g);
    for (int l = 0; l < cfg_.num_layers; ++l) {
        int s = state_dim(cfg_, l, dv);
        Tensor aggregated;
        if (occ_count > 0) {
            Tensor src_states = ad::gather_rows(h, occ.src);
            Tensor msg_in = ad::concat(src_states, occ_feats, 1);
            Tensor messages = nn::mlp_forward(pc, layer_prefix(l, "msg"), msg_spec(cfg_, s, edge_feats.cols()), msg_in);
            aggregated = ad::matmul(agg_matrix, messages);
        } else {
            aggregated = Tensor::zeros({v_count, cfg_.hidden});
        }
        Tensor upd_in = ad::concat(h, aggregated, 1);
        h = nn::mlp_forward(pc, layer_prefix(l, "upd"), upd_spec(cfg_, s, l), upd_in);
    }
    return ad::l2_normalize_rows(h);
}

Tensor GaeModel::encode_values(const Graph& g) const {
    ad::Tape tape;
    nn::ParamContext pc(tape, const_cast<nn::ParamStore&>(params_));
    return encode(pc, g).detached();
}

GaeModel::Reconstruction GaeModel::decode(nn::ParamContext& pc, const Tensor& z,
                                          const Graph& g) const {
    Reconstruction rec;
    for (size_t a = 0; a < node_schemas_.size(); ++a)
        rec.node_heads.push_back(nn::mlp_forward(pc, "dec.node" + std::to_string(a),
                                                 node_head_spec(cfg_, node_schemas_[a]), z));
    if (g.num_edges() > 0 && !edge_schemas_.empty()) {
        // undirected edges are reconstructed from both orientations so the
        // loss does not depend on the stored endpoint order
        std::vector<int> us, vs;
        for (const auto& [u, v] : g.edges()) {
            us.push_back(u);
            vs.push_back(v);
            if (!g.directed()) {
                us.push_back(v);
                vs.push_back(u);
            }
        }
        Tensor pair_in = ad::concat(ad::gather_rows(z, us), ad::gather_rows(z, vs), 1);
        for (size_t a = 0; a < edge_schemas_.size(); ++a)
            rec.edge_heads.push_back(nn::mlp_forward(pc, "dec.edge" + std::to_string(a),
                                                     edge_head_spec(cfg_, edge_schemas_[a]), pair_in));
    }
    rec.adjacency = ad::matmul(z, ad::transpose(z));
    return rec;
}

namespace {

// per-attribute reconstruction loss, scaled per element
Tensor attribute_loss(const AttributeSchema& schema, const Tensor& pred,
                      const std::vector<double>& values, int rows) {
    if (schema.kind == AttrKind::Categorical) {
        std::vector<int> labels(static_cast<size_t>(rows));
        for (int r = 0; r < rows; ++r)
            labels[static_cast<size_t>(r)] = static_cast<int>(values[static_cast<size_t>(r)]);
        return ad::cross_entropy_loss(pred, labels);
    }
    Tensor target({rows, schema.storage_dim()}, values);
    if (schema.kind == AttrKind::Binary) return ad::bce_with_logits_loss(pred, target);
    return ad::mse_loss(pred, target);
}

// rowwise logsumexp with an additive mask (masked entries vanish)
Tensor masked_rowwise_lse(const Tensor& scores, const Tensor& mask) {
    Tensor x = ad::add(scores, mask);
    Tensor m = ad::reduce_axis(x, ad::Reduce::Max, 1);
    Tensor shifted = ad::add_colwise(x, ad::neg(m));
    Tensor sums = ad::reduce_axis(ad::exp(shifted), ad::Reduce::Sum, 1);
    return ad::add(m, ad::log(sums));
}

}  // namespace

Tensor GaeModel::loss(const Reconstruction& rec, const Tensor& z, const Graph& g,
                      const LossWeights& w) const {
    Tensor total = Tensor::scalar(0.0);

    Tensor node_term = Tensor::scalar(0.0);
    for (size_t a = 0; a < node_schemas_.size(); ++a)
        node_term = ad::add(node_term, attribute_loss(node_schemas_[a], rec.node_heads[a],
                                                      g.node_values(static_cast<int>(a)),
                                                      g.num_nodes()));
    total = ad::add(total, ad::scale(node_term, w.alpha));

    if (g.num_edges() > 0 && !rec.edge_heads.empty()) {
        Tensor edge_term = Tensor::scalar(0.0);
        int copies = g.directed() ? 1 : 2;
        for (size_t a = 0; a < edge_schemas_.size(); ++a) {
            // targets repeated per orientation, matching decode's row layout
            const auto& vals = g.edge_values(static_cast<int>(a));
            int dim = edge_schemas_[a].storage_dim();
            std::vector<double> expanded;
            expanded.reserve(vals.size() * static_cast<size_t>(copies));
            for (int e = 0; e < g.num_edges(); ++e)
                for (int c = 0; c < copies; ++c)
                    for (int d = 0; d < dim; ++d)
                        expanded.push_back(vals[static_cast<size_t>(e) * dim + d]);
            edge_term = ad::add(edge_term, attribute_loss(edge_schemas_[a], rec.edge_heads[a],
                                                          expanded, g.num_edges() * copies));
        }
        total = ad::add(total, ad::scale(edge_term, w.beta));
    }

    // adjacency InfoNCE over nodes with at least one positive neighbor:
    // positives are actual neighbors, negatives every other node
    int v_count = g.num_nodes();
    std::vector<std::set<int>> positives(static_cast<size_t>(v_count));
    for (const auto& [u, v] : g.edges()) {
        positives[static_cast<size_t>(u)].insert(v);
        if (!g.directed()) positives[static_cast<size_t>(v)].insert(u);
    }
    std::vector<int> qualifying;
    for (int v = 0; v < v_count; ++v)
        if (!positives[static_cast<size_t>(v)].empty() && v_count > 1) qualifying.push_back(v);
    if (!qualifying.empty()) {
        int q = static_cast<int>(qualifying.size());
        Tensor scores = ad::scale(ad::gather_rows(rec.adjacency, qualifying), 1.0 / w.tau);
        std::vector<double> mask_all(static_cast<size_t>(q) * v_count, 0.0);
        std::vector<double> mask_pos(static_cast<size_t>(q) * v_count, kMaskValue);
        for (int r = 0; r < q; ++r) {
            int i = qualifying[static_cast<size_t>(r)];
            mask_all[static_cast<size_t>(r) * v_count + i] = kMaskValue;
            for (int j : positives[static_cast<size_t>(i)])
                mask_pos[static_cast<size_t>(r) * v_count + j] = 0.0;
        }
        Tensor lse_all = masked_rowwise_lse(scores, Tensor({q, v_count}, std::move(mask_all)));
        Tensor lse_pos = masked_rowwise_lse(scores, Tensor({q, v_count}, std::move(mask_pos)));
        Tensor adj_term = ad::reduce_mean(ad::sub(lse_all, lse_pos));
        total = ad::add(total, ad::scale(adj_term, w.gamma));
    }
    (void)z;
    return total;
}

Tensor GaeModel::forward_loss(nn::ParamContext& pc, const Graph& g, const LossWeights& w) const {
    Tensor z = encode(pc, g);
    Reconstruction rec = decode(pc, z, g);
    return loss(rec, z, g, w);
}

double GaeModel::eval_loss(const Graph& g, const LossWeights& w) const {
    ad::Tape tape;
    nn::ParamContext pc(tape, const_cast<nn::ParamStore&>(params_));
    return forward_loss(pc, g, w).value();
}

GaeModel GaeModel::encoder_only() const {
    nn::ParamStore enc;
    for (const auto& name : params_.names())
        if (name.rfind("enc.", 0) == 0) enc.create(name, params_.at(name).shape()) = params_.at(name);
    return model_from_parts(cfg_, node_schemas_, edge_schemas_, std::move(enc), false);
}

std::map<std::string, ad::Tensor> GaePack::encode_bundle(const GraphBundle& raw_bundle) const {
    std::map<std::string, ad::Tensor> out;
    for (const auto& [name, g] : raw_bundle)
        out[name] = models.at(name).encode_values(normalize_features(g));
    return out;
}

std::map<std::string, std::vector<Graph>> collect_snapshots(const std::vector<Instance>& instances,
                                                            int rollouts_per_instance,
                                                            uint64_t seed) {
    std::map<std::string, std::vector<Graph>> pool;
    for (size_t i = 0; i < instances.size(); ++i) {
        auto env = make_env(instances[i]);
        for (int r = 0; r < rollouts_per_instance; ++r) {
            uint64_t rollout_seed = child_seed(seed, i * 1000 + static_cast<size_t>(r));
            Rng rng(rollout_seed);
            env->reset(rollout_seed);
            for (const auto& [name, g] : env->graphs()) pool[name].push_back(normalize_features(g));
            while (!env->done()) {
                auto actions = env->valid_actions();
                env->step(actions[static_cast<size_t>(
                    rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))]);
                for (const auto& [name, g] : env->graphs())
                    pool[name].push_back(normalize_features(g));
            }
        }
    }
    return pool;
}

GaeTrainResult train_gae(EnvKind env, const std::vector<Instance>& instances,
                         const EncoderConfig& enc_cfg, const LossWeights& weights,
                         const GaeTrainConfig& cfg) {
    if (instances.empty()) throw std::invalid_argument("train_gae: empty instance set");
    int rollouts = cfg.rollouts_per_instance;
    auto pool = collect_snapshots(instances, rollouts, cfg.seed);
    // grow the pool until it comfortably feeds the batch size
    size_t min_pool = static_cast<size_t>(cfg.min_pool_factor) * static_cast<size_t>(cfg.batch);
    while (!pool.empty() && pool.begin()->second.size() < min_pool && rollouts < 200) {
        rollouts *= 2;
        pool = collect_snapshots(instances, rollouts, cfg.seed);
    }

    GaeTrainResult result;
    result.pack.env = env;
    Rng rng(child_seed(cfg.seed, 0xae));
    for (auto& [name, graphs] : pool) {
        // shuffle and split a holdout
        std::vector<size_t> order(graphs.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        size_t holdout_count = std::max<size_t>(1, static_cast<size_t>(cfg.holdout_frac * graphs.size()));
        std::vector<Graph> holdout, train;
        for (size_t i = 0; i < order.size(); ++i)
            (i < holdout_count ? holdout : train).push_back(graphs[order[i]]);

        GaeModel model = GaeModel::create(train.front(), enc_cfg, rng);
        nn::AdamConfig adam_cfg;
        adam_cfg.lr = cfg.lr;
        nn::Adam opt(adam_cfg);

        auto holdout_loss = [&] {
            double acc = 0.0;
            for (const auto& g : holdout) acc += model.eval_loss(g, weights);
            return acc / static_cast<double>(holdout.size());
        };
        result.initial_holdout_loss[name] = holdout_loss();

        std::vector<size_t> idx(train.size());
        for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            rng.shuffle(idx);
            for (size_t start = 0; start < idx.size(); start += static_cast<size_t>(cfg.batch)) {
                size_t end = std::min(idx.size(), start + static_cast<size_t>(cfg.batch));
                ad::Tape tape;
                nn::ParamContext pc(tape, model.params());
                Tensor batch_loss = Tensor::scalar(0.0);
                for (size_t i = start; i < end; ++i)
                    batch_loss = ad::add(batch_loss, model.forward_loss(pc, train[idx[i]], weights));
                batch_loss = ad::scale(batch_loss, 1.0 / static_cast<double>(end - start));
                auto grads = pc.named_grads(tape.backward(batch_loss));
                opt.step(model.params(), grads);
            }
        }
        result.final_holdout_loss[name] = holdout_loss();
        result.pack.models.emplace(name, std::move(model));
    }
    return result;
}

GaePack random_gae(EnvKind env, const Instance& example, const EncoderConfig& enc_cfg,
                   uint64_t seed) {
    GaePack pack;
    pack.env = env;
    Rng rng(seed);
    auto env_obj = make_env(example);
    env_obj->reset(seed);
    for (const auto& [name, g] : env_obj->graphs())
        pack.models.emplace(name, GaeModel::create(normalize_features(g), enc_cfg, rng));
    return pack;
}

namespace {

nlohmann::ordered_json schema_to_json(const AttributeSchema& s) {
    return {{"name", s.name}, {"kind", to_string(s.kind)}, {"size", s.size}, {"norm", to_string(s.norm)}};
}

AttributeSchema schema_from_json(const nlohmann::ordered_json& j) {
    AttributeSchema s;
    s.name = j.at("name").get<std::string>();
    s.kind = attr_kind_from_string(j.at("kind").get<std::string>());
    s.size = j.at("size").get<int>();
    s.norm = attr_norm_from_string(j.at("norm").get<std::string>());
    return s;
}

}  // namespace

void save_gae(const std::string& path, const GaePack& pack) {
    nn::ParamStore merged;
    nlohmann::ordered_json meta;
    meta["env"] = to_string(pack.env);
    meta["graphs"] = nlohmann::ordered_json::object();
    for (const auto& [name, model] : pack.models) {
        GaeModel enc = model.has_decoder() ? model.encoder_only() : model;
        for (const auto& pname : enc.params().names())
            merged.create(name + "/" + pname, enc.params().at(pname).shape()) =
                enc.params().at(pname);
        nlohmann::ordered_json gmeta;
        gmeta["num_layers"] = model.config().num_layers;
        gmeta["hidden"] = model.config().hidden;
        gmeta["out"] = model.config().out;
        gmeta["activation"] = model.config().act == nn::Activation::ReLU ? "relu" : "leaky_relu";
        gmeta["node_schemas"] = nlohmann::ordered_json::array();
        for (const auto& s : model.node_schemas()) gmeta["node_schemas"].push_back(schema_to_json(s));
        gmeta["edge_schemas"] = nlohmann::ordered_json::array();
        for (const auto& s : model.edge_schemas()) gmeta["edge_schemas"].push_back(schema_to_json(s));
        meta["graphs"][name] = std::move(gmeta);
    }
    save_checkpoint(path, merged, meta.dump(2));
}

GaePack load_gae(const std::string& path) {
    nn::ParamStore merged = load_checkpoint(path);
    auto meta = nlohmann::ordered_json::parse(load_checkpoint_metadata(path));
    GaePack pack;
    pack.env = env_kind_from_string(meta.at("env").get<std::string>());
    for (auto it = meta.at("graphs").begin(); it != meta.at("graphs").end(); ++it) {
        EncoderConfig cfg;
        cfg.num_layers = it.value().at("num_layers").get<int>();
        cfg.hidden = it.value().at("hidden").get<int>();
        cfg.out = it.value().at("out").get<int>();
        cfg.act = it.value().at("activation").get<std::string>() == "relu"
                      ? nn::Activation::ReLU
                      : nn::Activation::LeakyReLU;
        std::vector<AttributeSchema> node_schemas, edge_schemas;
        for (const auto& js : it.value().at("node_schemas")) node_schemas.push_back(schema_from_json(js));
        for (const auto& js : it.value().at("edge_schemas")) edge_schemas.push_back(schema_from_json(js));
        nn::ParamStore params;
        std::string prefix = it.key() + "/";
        for (const auto& pname : merged.names())
            if (pname.rfind(prefix, 0) == 0)
                params.create(pname.substr(prefix.size()), merged.at(pname).shape()) =
                    merged.at(pname);
        pack.models.emplace(it.key(), model_from_parts(cfg, std::move(node_schemas),
                                                       std::move(edge_schemas), std::move(params),
                                                       false));
    }
    return pack;
}

double adjacency_auc(const GaeModel& model, const std::vector<Graph>& graphs) {
    // rank-sum AUC of edge scores vs. non-edge scores, pooled over graphs
    std::vector<std::pair<double, int>> scored;  // (score, is_edge)
    for (const auto& g : graphs) {
        Tensor z = model.encode_values(g);
        int n = g.num_nodes();
        std::set<std::pair<int, int>> edges;
        for (auto [u, v] : g.edges()) {
            edges.insert({u, v});
            if (!g.directed()) edges.insert({v, u});
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                if (!g.directed() && i > j) continue;
                double s = 0.0;
                for (int d = 0; d < z.cols(); ++d) s += z.at(i, d) * z.at(j, d);
                scored.emplace_back(s, edges.count({i, j}) ? 1 : 0);
            }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    // midranks for ties
    double pos_rank_sum = 0.0;
    int64_t positives = 0, negatives = 0;
    size_t i = 0;
    while (i < scored.size()) {
        size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (size_t k = i; k < j; ++k) {
            if (scored[k].second) {
                pos_rank_sum += midrank;
                ++positives;
            } else {
                ++negatives;
            }
        }
        i = j;
    }
    if (positives == 0 || negatives == 0) return 0.5;
    double u_stat = pos_rank_sum - static_cast<double>(positives) * (positives + 1) / 2.0;
    return u_stat / (static_cast<double>(positives) * static_cast<double>(negatives));
}

}  // namespace lagco::gae
