#include "encoder/embedding_store.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace newsrank::enc {

namespace {

constexpr char kMagic[8] = {'N', 'R', 'E', 'M', 'B', '0', '0', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) {
        throw InputError("truncated embedding file: " + path);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

}  // namespace

EmbeddingStore::EmbeddingStore(std::size_t dim, Provenance provenance)
    : dim_(dim), provenance_(provenance) {
    if (dim_ == 0) throw InputError("embedding store: dim must be positive");
}

void EmbeddingStore::add(const std::string& id, const std::vector<double>& values) {
    if (values.size() != dim_) {
        throw InputError("embedding for id '" + id + "' has dimension " +
                         std::to_string(values.size()) + ", expected " + std::to_string(dim_));
    }
    if (!index_.emplace(id, ids_.size()).second) {
        throw InputError("duplicate embedding id '" + id + "'");
    }
    ids_.push_back(id);
    data_.insert(data_.end(), values.begin(), values.end());
}

const double* EmbeddingStore::vector_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("no embedding for headline id '" + id + "'");
    return data_.data() + it->second * dim_;
}

EmbeddingStore EmbeddingStore::load(const std::string& path, std::size_t dim) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open embedding file: " + path);

    char magic[8] = {};
    is.read(magic, 8);
    const bool binary = is.gcount() == 8 && std::memcmp(magic, kMagic, 8) == 0;
    EmbeddingStore store(dim, Provenance::precomputed);

    if (binary) {
        const std::uint64_t count = read_u64(is, path);
        const std::uint64_t file_dim = read_u64(is, path);
        if (file_dim != dim) {
            throw InputError("embedding file " + path + " has dimension " +
                             std::to_string(file_dim) + ", expected " + std::to_string(dim));
        }
        std::vector<std::string> ids(count);
        for (auto& id : ids) {
            const std::uint64_t len = read_u64(is, path);
            id.resize(len);
            if (len > 0 && !is.read(id.data(), static_cast<std::streamsize>(len))) {
                throw InputError("truncated embedding id table: " + path);
            }
        }
        std::vector<double> row(dim);
        for (std::uint64_t i = 0; i < count; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                const std::uint64_t bits = read_u64(is, path);
                std::memcpy(&row[j], &bits, 8);
            }
            store.add(ids[i], row);
        }
        return store;
    }

    is.clear();
    is.seekg(0);
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 'id<TAB>values'");
        }
        const std::string id = line.substr(0, tab);
        row.clear();
        const char* p = line.data() + tab + 1;
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && *p == ' ') ++p;
            if (p >= end) break;
            double v = 0.0;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc()) {
                throw InputError(path + ":" + std::to_string(line_no) + ": bad number near '" +
                                 std::string(p, std::min<std::size_t>(8, end - p)) + "'");
            }
            row.push_back(v);
            p = next;
        }
        if (row.size() != dim) {
            throw InputError(path + ":" + std::to_string(line_no) + ": id '" + id + "' has " +
                             std::to_string(row.size()) + " values, expected " +
                             std::to_string(dim));
        }
        store.add(id, row);
    }
    return store;
}

void EmbeddingStore::save_text(const std::string& path) const {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw InputError("cannot write embedding file: " + path);
    char buf[32];
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        os << ids_[i] << '\t';
        const double* row = data_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
            if (j) os << ' ';
            os << buf;
        }
        os << '\n';
    }
    if (!os) throw InputError("write failed for embedding file: " + path);
}

void EmbeddingStore::save_binary(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("cannot write embedding file: " + path);
    os.write(kMagic, sizeof(kMagic));
    write_u64(os, ids_.size());
    write_u64(os, dim_);
    for (const auto& id : ids_) {
        write_u64(os, id.size());
        os.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    for (double v : data_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        write_u64(os, bits);
    }
    if (!os) throw InputError("write failed for embedding file: " + path);
}

}  // namespace newsrank::enc
