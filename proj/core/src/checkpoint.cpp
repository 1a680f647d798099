#include "lagco/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace lagco {

namespace {

constexpr char kMagic[4] = {'L', 'A', 'G', 'C'};
constexpr uint32_t kVersion = 1;

template <class T>
void write_raw(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const nn::ParamStore& params,
                     const std::string& metadata_json) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, 4);
    write_raw<uint32_t>(os, kVersion);
    for (const auto& name : params.names()) {
        const auto& t = params.at(name);
        write_raw<uint32_t>(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_raw<uint32_t>(os, static_cast<uint32_t>(t.shape().size()));
        for (int d : t.shape()) write_raw<uint64_t>(os, static_cast<uint64_t>(d));
        os.write(reinterpret_cast<const char*>(t.data().data()),
                 static_cast<std::streamsize>(t.data().size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
    os.close();
    std::ofstream meta(path + ".json", std::ios::trunc);
    if (!meta) throw std::runtime_error("checkpoint: cannot open " + path + ".json for writing");
    meta << metadata_json;
    if (!metadata_json.empty() && metadata_json.back() != '\n') meta << '\n';
}

nn::ParamStore load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kMagic, 4))
        throw std::runtime_error("checkpoint: bad magic in " + path);
    uint32_t version = read_raw<uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    nn::ParamStore store;
    for (;;) {
        uint32_t name_len;
        is.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
        if (is.eof()) break;
        if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        uint32_t rank = read_raw<uint32_t>(is);
        ad::Shape shape;
        int64_t numel = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            auto d = static_cast<int>(read_raw<uint64_t>(is));
            shape.push_back(d);
            numel *= d;
        }
        std::vector<double> data(static_cast<size_t>(numel));
        is.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: truncated payload in " + path);
        store.create(name, shape) = ad::Tensor(shape, std::move(data));
    }
    return store;
}

std::string load_checkpoint_metadata(const std::string& path) {
    std::ifstream is(path + ".json");
    if (!is) throw std::runtime_error("checkpoint: missing sidecar " + path + ".json");
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace lagco
