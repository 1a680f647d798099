#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lagco::latent {

// Deterministic text encoder: signed feature hashing of character trigrams,
// L1-normalized. Stands in for an external language-model embedding.
struct FeatureHashEncoder {
    int dim = 32;
    uint64_t seed = 0x1a9c0ULL;

    std::vector<double> encode(std::string_view text) const;
};

struct OneHotEncoder {
    int classes = 0;

    std::vector<double> encode(int option) const;
};

}  // namespace lagco::latent
