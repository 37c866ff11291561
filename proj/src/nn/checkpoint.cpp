#include "nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace newsrank::nn {

namespace {

constexpr char kMagic[8] = {'N', 'R', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw InputError("truncated checkpoint: " + path);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &p[i], 8);
        write_u64(os, bits);
    }
}

void read_doubles(std::istream& is, double* p, std::size_t n, const std::string& path) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t bits = read_u64(is, path);
        std::memcpy(&p[i], &bits, 8);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write checkpoint: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, ck.metadata_json.size());
    os.write(ck.metadata_json.data(), static_cast<std::streamsize>(ck.metadata_json.size()));
    write_u64(os, ck.params.size());
    for (const ParamGroup& p : ck.params) {
        write_u64(os, p.name.size());
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_u64(os, p.value.rank());
        for (std::size_t d : p.value.shape()) write_u64(os, d);
        write_doubles(os, p.value.data(), p.value.size());
    }
    if (!os) throw InputError("write failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open checkpoint: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw InputError("not a checkpoint file (bad magic): " + path);
    }
    Checkpoint ck;
    const std::uint64_t meta_len = read_u64(is, path);
    ck.metadata_json.resize(meta_len);
    if (meta_len > 0 && !is.read(ck.metadata_json.data(), static_cast<std::streamsize>(meta_len))) {
        throw InputError("truncated checkpoint metadata: " + path);
    }
    const std::uint64_t n_params = read_u64(is, path);
    ck.params.reserve(n_params);
    for (std::uint64_t i = 0; i < n_params; ++i) {
        const std::uint64_t name_len = read_u64(is, path);
        std::string name(name_len, '\0');
        if (name_len > 0 && !is.read(name.data(), static_cast<std::streamsize>(name_len))) {
            throw InputError("truncated checkpoint record: " + path);
        }
        const std::uint64_t rank = read_u64(is, path);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(read_u64(is, path));
        Tensor value(shape);
        read_doubles(is, value.data(), value.size(), path);
        ck.params.emplace_back(std::move(name), std::move(value));
    }
    return ck;
}

}  // namespace newsrank::nn
