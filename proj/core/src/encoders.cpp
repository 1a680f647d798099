#include "lagco/encoders.hpp"

#include <cmath>
#include <stdexcept>

namespace lagco::latent {

namespace {

uint64_t fnv1a(std::string_view s, uint64_t seed) {
    uint64_t h = 1469598103934665603ULL ^ seed;
    for (char c : s) {
        h ^= static_cast<uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

std::vector<double> FeatureHashEncoder::encode(std::string_view text) const {
    std::vector<double> out(static_cast<size_t>(dim), 0.0);
    // boundary markers keep short strings distinguishable
    std::string padded = "^" + std::string(text) + "$";
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
        uint64_t h = fnv1a(std::string_view(padded).substr(i, 3), seed);
        size_t idx = (h >> 1) % static_cast<size_t>(dim);
        double sign = (h & 1) ? 1.0 : -1.0;
        out[idx] += sign;
    }
    double norm = 0.0;
    for (double v : out) norm += std::abs(v);
    if (norm > 0.0)
        for (double& v : out) v /= norm;
    return out;
}

std::vector<double> OneHotEncoder::encode(int option) const {
    if (option < 0 || option >= classes)
        throw std::out_of_range("OneHotEncoder: option " + std::to_string(option) +
                                " out of range for " + std::to_string(classes) + " classes");
    std::vector<double> out(static_cast<size_t>(classes), 0.0);
    out[static_cast<size_t>(option)] = 1.0;
    return out;
}

}  // namespace lagco::latent
