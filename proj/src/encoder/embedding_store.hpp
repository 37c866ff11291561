#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "encoder/hash_encoder.hpp"
#include "nn/tensor.hpp"

namespace newsrank::enc {

// Read-only after load/build: headline id -> fixed-width embedding vector.
class EmbeddingStore {
public:
    enum class Provenance { precomputed, hashed };

    explicit EmbeddingStore(std::size_t dim = kHeadlineDim,
                            Provenance provenance = Provenance::precomputed);

    // Detects the binary magic, otherwise parses the text format
    // "id TAB value value ...". Rejects rows whose width is not `dim` and
    // duplicate ids, naming the offender.
    static EmbeddingStore load(const std::string& path, std::size_t dim = kHeadlineDim);

    void save_text(const std::string& path) const;
    void save_binary(const std::string& path) const;

    void add(const std::string& id, const std::vector<double>& values);
    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    // Throws InputError naming the id when absent.
    const double* vector_of(const std::string& id) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    Provenance provenance() const { return provenance_; }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    std::size_t dim_;
    Provenance provenance_;
    std::vector<std::string> ids_;
    std::vector<double> data_;  // ids_.size() x dim_, row-major
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace newsrank::enc
