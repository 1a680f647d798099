#include "lagco/latent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "lagco/envs.hpp"

namespace lagco::latent {

using ad::Tensor;

std::vector<double> pool_rows(const Tensor& m, Pooling op) {
    if (m.rows() == 0) throw std::invalid_argument("pool_rows: empty matrix");
    int n = m.rows(), d = m.cols();
    std::vector<double> out(static_cast<size_t>(d));
    for (int c = 0; c < d; ++c) {
        double acc = m.at(0, c);
        for (int r = 1; r < n; ++r) {
            double v = m.at(r, c);
            switch (op) {
                case Pooling::Mean:
                case Pooling::Sum: acc += v; break;
                case Pooling::Max: acc = std::max(acc, v); break;
                case Pooling::Min: acc = std::min(acc, v); break;
            }
        }
        if (op == Pooling::Mean) acc /= n;
        out[static_cast<size_t>(c)] = acc;
    }
    return out;
}

std::vector<double> graph_descriptors(const Graph& g) {
    double n = g.num_nodes();
    double e = g.num_edges();
    double endpoints = g.directed() ? e : 2.0 * e;
    double avg_degree = n > 0 ? endpoints / n : 0.0;
    double density = n > 1 ? endpoints / (n * (n - 1)) : 0.0;
    return {n, e, avg_degree, density};
}

std::vector<double> build_observation(const GraphBundle& bundle,
                                      const std::map<std::string, ad::Tensor>& z,
                                      const Tensor* action_embeddings) {
    if (bundle.empty()) throw std::invalid_argument("build_observation: empty bundle");
    std::vector<double> obs;
    for (const auto& [name, g] : bundle) {
        if (g.num_nodes() == 0) throw std::invalid_argument("build_observation: empty graph " + name);
        const Tensor& rows = z.at(name);
        for (Pooling op : {Pooling::Mean, Pooling::Max, Pooling::Min, Pooling::Sum}) {
            auto pooled = pool_rows(rows, op);
            obs.insert(obs.end(), pooled.begin(), pooled.end());
        }
        auto desc = graph_descriptors(g);
        obs.insert(obs.end(), desc.begin(), desc.end());
    }
    if (action_embeddings != nullptr) {
        for (Pooling op : {Pooling::Mean, Pooling::Max, Pooling::Min, Pooling::Sum}) {
            auto pooled = pool_rows(*action_embeddings, op);
            obs.insert(obs.end(), pooled.begin(), pooled.end());
        }
    }
    return obs;
}

int observation_dim(EnvKind env, int p, int action_dim_or_zero) {
    int graphs = (env == EnvKind::Ospf || env == EnvKind::Traffic) ? 2 : 1;
    return graphs * (4 * p + 4) + (action_dim_or_zero > 0 ? 4 * action_dim_or_zero : 0);
}

ActionEmbedder ActionEmbedder::for_env(EnvKind env, int p, const Instance& instance) {
    ActionEmbedder e;
    e.env = env;
    e.p = p;
    e.hash.dim = kVulnHashDim;
    e.delta_onehot.classes = 3;
    if (env == EnvKind::Traffic) e.path_pad_nodes = instance.as<TrafficData>().max_path_len + 1;
    return e;
}

int ActionEmbedder::dim() const {
    switch (env) {
        case EnvKind::Tsp:
        case EnvKind::MinVertex:
        case EnvKind::MaxCut: return p;
        case EnvKind::Placement: return 2 * p;
        case EnvKind::CyberPath: return 2 * p + hash.dim;
        case EnvKind::Ospf: return 2 * p + 3;
        case EnvKind::Traffic: return 2 * p + path_pad_nodes * p;
    }
    return 0;
}

namespace {

void append_row(std::vector<double>& out, const Tensor& z, int row) {
    if (row < 0 || row >= z.rows())
        throw std::out_of_range("embed: node id " + std::to_string(row) + " out of range");
    for (int d = 0; d < z.cols(); ++d) out.push_back(z.at(row, d));
}

}  // namespace

std::vector<double> ActionEmbedder::embed_component(
    const ActionComponent& c, const std::map<std::string, ad::Tensor>& z) const {
    std::vector<double> out;
    switch (c.kind) {
        case ActionComponent::Kind::Node:
            append_row(out, z.at(c.graph), c.nodes[0]);
            break;
        case ActionComponent::Kind::Edge:
            // order-preserving: (i,j) and (j,i) embed differently
            append_row(out, z.at(c.graph), c.nodes[0]);
            append_row(out, z.at(c.graph), c.nodes[1]);
            break;
        case ActionComponent::Kind::Path: {
            int pad = path_pad_nodes > 0 ? path_pad_nodes : static_cast<int>(c.nodes.size());
            if (static_cast<int>(c.nodes.size()) > pad)
                throw std::invalid_argument("embed: path longer than the padded slot count");
            for (int i = 0; i < pad; ++i) {
                if (i < static_cast<int>(c.nodes.size()))
                    append_row(out, z.at(c.graph), c.nodes[static_cast<size_t>(i)]);
                else
                    out.insert(out.end(), static_cast<size_t>(p), 0.0);
            }
            break;
        }
        case ActionComponent::Kind::Object:
            if (env == EnvKind::Ospf) {
                auto enc = delta_onehot.encode(c.option);
                out.insert(out.end(), enc.begin(), enc.end());
            } else {
                auto enc = hash.encode(c.text);
                out.insert(out.end(), enc.begin(), enc.end());
            }
            break;
    }
    return out;
}

std::vector<double> ActionEmbedder::embed(const ActionDescriptor& a,
                                          const std::map<std::string, ad::Tensor>& z) const {
    std::vector<double> out;
    out.reserve(static_cast<size_t>(dim()));
    for (const auto& c : a.components) {
        auto part = embed_component(c, z);
        out.insert(out.end(), part.begin(), part.end());
    }
    if (static_cast<int>(out.size()) != dim())
        throw std::invalid_argument("embed: action arity does not match the " + to_string(env) +
                                    " layout (got " + std::to_string(out.size()) + " dims, want " +
                                    std::to_string(dim()) + ")");
    return out;
}

Tensor ActionEmbedder::embed_all(const std::vector<ActionDescriptor>& actions,
                                 const std::map<std::string, ad::Tensor>& z) const {
    std::vector<double> data;
    data.reserve(actions.size() * static_cast<size_t>(dim()));
    for (const auto& a : actions) {
        auto row = embed(a, z);
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor({static_cast<int>(actions.size()), dim()}, std::move(data));
}

std::vector<double> LatentStats::normalize(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean[i]) / stddev[i];
    return out;
}

std::vector<double> LatentStats::denormalize(const std::vector<double>& v) const {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] * stddev[i] + mean[i];
    return out;
}

std::vector<double> LatentStats::clamp_to_box(std::vector<double> v) const {
    for (size_t i = 0; i < v.size(); ++i) v[i] = std::min(hi[i], std::max(lo[i], v[i]));
    return v;
}

LatentStats fit_latent_stats(const std::vector<std::vector<double>>& embeddings) {
    if (embeddings.empty()) throw std::invalid_argument("fit_latent_stats: no embeddings");
    size_t d = embeddings[0].size();
    LatentStats s;
    s.mean.assign(d, 0.0);
    s.stddev.assign(d, 0.0);
    for (const auto& row : embeddings)
        for (size_t i = 0; i < d; ++i) s.mean[i] += row[i];
    for (auto& m : s.mean) m /= static_cast<double>(embeddings.size());
    for (const auto& row : embeddings)
        for (size_t i = 0; i < d; ++i) {
            double c = row[i] - s.mean[i];
            s.stddev[i] += c * c;
        }
    for (auto& v : s.stddev) {
        v = std::sqrt(v / static_cast<double>(embeddings.size()));
        if (v < 1e-12) v = 1.0;  // zero-variance dimensions stay dimensionful
    }
    s.lo.assign(d, 0.0);
    s.hi.assign(d, 0.0);
    bool first = true;
    for (const auto& row : embeddings) {
        auto n = s.normalize(row);
        for (size_t i = 0; i < d; ++i) {
            if (first) {
                s.lo[i] = s.hi[i] = n[i];
            } else {
                s.lo[i] = std::min(s.lo[i], n[i]);
                s.hi[i] = std::max(s.hi[i], n[i]);
            }
        }
        first = false;
    }
    for (size_t i = 0; i < d; ++i) {
        s.lo[i] -= 1.0;
        s.hi[i] += 1.0;
    }
    return s;
}

LatentSpace LatentSpace::build(std::vector<ActionDescriptor> actions, const Tensor& raw_embeddings,
                               const LatentStats* frozen_stats) {
    if (actions.empty()) throw std::invalid_argument("LatentSpace: empty action set");
    if (static_cast<int>(actions.size()) != raw_embeddings.rows())
        throw std::invalid_argument("LatentSpace: action/embedding row mismatch");
    LatentSpace space;
    space.actions_ = std::move(actions);
    space.raw_ = raw_embeddings;
    if (frozen_stats != nullptr) {
        space.stats_ = *frozen_stats;
    } else {
        std::vector<std::vector<double>> rows;
        for (int r = 0; r < raw_embeddings.rows(); ++r) {
            std::vector<double> row(static_cast<size_t>(raw_embeddings.cols()));
            for (int c = 0; c < raw_embeddings.cols(); ++c) row[static_cast<size_t>(c)] =
                raw_embeddings.at(r, c);
            rows.push_back(std::move(row));
        }
        space.stats_ = fit_latent_stats(rows);
    }
    int n = raw_embeddings.rows(), d = raw_embeddings.cols();
    std::vector<double> norm(static_cast<size_t>(n) * d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c)
            norm[static_cast<size_t>(r) * d + c] =
                (raw_embeddings.at(r, c) - space.stats_.mean[static_cast<size_t>(c)]) /
                space.stats_.stddev[static_cast<size_t>(c)];
    space.normalized_ = Tensor({n, d}, std::move(norm));
    space.norm_lengths_.resize(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        double sq = 0.0;
        for (int c = 0; c < d; ++c) sq += space.normalized_.at(r, c) * space.normalized_.at(r, c);
        space.norm_lengths_[static_cast<size_t>(r)] = std::sqrt(sq);
    }
    // duplicate-row detection: injectivity of the embedding on this instance
    std::set<std::vector<double>> seen;
    for (int r = 0; r < n && !space.collisions_; ++r) {
        std::vector<double> row(raw_embeddings.data().begin() + static_cast<size_t>(r) * d,
                                raw_embeddings.data().begin() + static_cast<size_t>(r + 1) * d);
        if (!seen.insert(std::move(row)).second) space.collisions_ = true;
    }
    return space;
}

std::vector<int> LatentSpace::knn_decode(const std::vector<double>& proto, int k,
                                         const std::vector<char>& valid_mask) const {
    if (static_cast<int>(proto.size()) != dim())
        throw std::invalid_argument("knn_decode: proto dimension mismatch");
    if (k < 1) throw std::invalid_argument("knn_decode: k must be >= 1");
    if (!valid_mask.empty() && static_cast<int>(valid_mask.size()) != size())
        throw std::invalid_argument("knn_decode: mask size mismatch");
    auto clamped = stats_.clamp_to_box(proto);
    double qnorm = 0.0;
    for (double v : clamped) qnorm += v * v;
    qnorm = std::sqrt(qnorm);
    std::vector<std::pair<double, int>> scored;  // (similarity, index)
    for (int r = 0; r < size(); ++r) {
        if (!valid_mask.empty() && !valid_mask[static_cast<size_t>(r)]) continue;
        double dot = 0.0;
        for (int c = 0; c < dim(); ++c) dot += clamped[static_cast<size_t>(c)] * normalized_.at(r, c);
        double denom = qnorm * norm_lengths_[static_cast<size_t>(r)];
        scored.emplace_back(denom > 0.0 ? dot / denom : 0.0, r);
    }
    if (scored.empty()) throw std::invalid_argument("knn_decode: empty valid set");
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<int> out;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(scored.size())); ++i)
        out.push_back(scored[static_cast<size_t>(i)].second);
    return out;
}

double LatentSpace::compactness(int k) const {
    int n = size();
    if (n < k + 1)
        throw std::invalid_argument("compactness: need at least k+1 actions, have " +
                                    std::to_string(n));
    // distances in the native embedding space
    std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
    double pair_sum = 0.0;
    int64_t pair_count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double sq = 0.0;
            for (int c = 0; c < dim(); ++c) {
                double delta = raw_.at(i, c) - raw_.at(j, c);
                sq += delta * delta;
            }
            double d = std::sqrt(sq);
            dist[static_cast<size_t>(i) * n + j] = d;
            dist[static_cast<size_t>(j) * n + i] = d;
            pair_sum += d;
            ++pair_count;
        }
    double mean_pairwise = pair_sum / static_cast<double>(pair_count);
    double acc = 0.0;
    int counted = 0;
    std::vector<double> neighbor;
    for (int i = 0; i < n; ++i) {
        neighbor.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) neighbor.push_back(dist[static_cast<size_t>(i) * n + j]);
        std::nth_element(neighbor.begin(), neighbor.begin() + (k - 1), neighbor.end());
        double kth = neighbor[static_cast<size_t>(k - 1)];
        if (kth <= 0.0) continue;  // exact collision, the ratio is undefined
        acc += mean_pairwise / kth;
        ++counted;
    }
    if (counted == 0) throw std::runtime_error("compactness: all k-NN distances were zero");
    return acc / static_cast<double>(counted);
}

void LatentSpace::dump(const std::string& path) const {
    nlohmann::ordered_json header;
    header["count"] = size();
    header["dim"] = dim();
    header["stats"] = {{"mean", stats_.mean},
                       {"stddev", stats_.stddev},
                       {"lo", stats_.lo},
                       {"hi", stats_.hi}};
    nlohmann::ordered_json acts = nlohmann::ordered_json::array();
    for (const auto& a : actions_) acts.push_back(nlohmann::ordered_json::parse(to_json(a)));
    header["actions"] = std::move(acts);
    std::string text = header.dump();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("LatentSpace: cannot write " + path);
    uint64_t len = text.size();
    os.write(reinterpret_cast<const char*>(&len), sizeof(len));
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    os.write(reinterpret_cast<const char*>(raw_.data().data()),
             static_cast<std::streamsize>(raw_.data().size() * sizeof(double)));
}

LatentSpace LatentSpace::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("LatentSpace: cannot open " + path);
    uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string text(len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(len));
    auto header = nlohmann::ordered_json::parse(text);
    int count = header.at("count").get<int>();
    int d = header.at("dim").get<int>();
    std::vector<double> data(static_cast<size_t>(count) * d);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!is) throw std::runtime_error("LatentSpace: truncated embedding block in " + path);
    LatentStats stats;
    stats.mean = header.at("stats").at("mean").get<std::vector<double>>();
    stats.stddev = header.at("stats").at("stddev").get<std::vector<double>>();
    stats.lo = header.at("stats").at("lo").get<std::vector<double>>();
    stats.hi = header.at("stats").at("hi").get<std::vector<double>>();
    std::vector<ActionDescriptor> actions;
    for (const auto& ja : header.at("actions")) actions.push_back(action_from_json(ja.dump()));
    return build(std::move(actions), Tensor({count, d}, std::move(data)), &stats);
}

}  // namespace lagco::latent
