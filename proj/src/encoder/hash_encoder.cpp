#include "encoder/hash_encoder.hpp"

#include <cmath>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace newsrank::enc {

namespace {

constexpr std::uint64_t kBucketStream = 0x9ae16a3b2f90404fULL;
constexpr std::uint64_t kSignStream = 0xc3a5c85c97cb3127ULL;

void add_feature(std::vector<double>& acc, const std::string& feature, std::uint64_t seed) {
    const std::uint64_t h1 = fnv1a(feature, mix_bits(seed ^ kBucketStream));
    const std::uint64_t h2 = fnv1a(feature, mix_bits(seed ^ kSignStream));
    const std::size_t bucket = static_cast<std::size_t>(h1 % acc.size());
    acc[bucket] += (h2 & 1) ? 1.0 : -1.0;
}

}  // namespace

nn::Tensor hash_encode(const std::vector<std::string>& tokens, std::size_t dims,
                       std::uint64_t seed) {
    if (tokens.empty()) throw InputError("hash_encode: empty token list");
    if (dims == 0) throw InputError("hash_encode: dims must be positive");

    std::vector<double> acc(dims, 0.0);
    for (const auto& tok : tokens) add_feature(acc, tok, seed);
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        add_feature(acc, tokens[i] + '\x1f' + tokens[i + 1], seed);
    }

    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) {
        // all features cancelled; fall back to a unit vector on the first
        // token's bucket so the contract (unit norm) still holds
        const std::uint64_t h1 = fnv1a(tokens.front(), mix_bits(seed ^ kBucketStream));
        acc[static_cast<std::size_t>(h1 % dims)] = 1.0;
        norm_sq = 1.0;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (double& v : acc) v *= inv_norm;
    return nn::Tensor({dims}, std::move(acc));
}

}  // namespace newsrank::enc
