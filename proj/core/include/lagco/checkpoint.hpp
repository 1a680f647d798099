#pragma once

#include <string>

#include "lagco/nn.hpp"

namespace lagco {

// Flat binary parameter checkpoint. Layout, little-endian:
//   magic "LAGC" | version u32 | records until EOF
//   record: name-length u32 | name bytes | rank u32 | dims u64[rank] | f64 payload
// A JSON sidecar (path + ".json") carries architecture metadata supplied by
// the caller.
void save_checkpoint(const std::string& path, const nn::ParamStore& params,
                     const std::string& metadata_json);
nn::ParamStore load_checkpoint(const std::string& path);
std::string load_checkpoint_metadata(const std::string& path);

}  // namespace lagco
