#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace newsrank::enc {

inline constexpr std::size_t kHeadlineDim = 768;

// Signed feature hashing over unigrams and bigrams, L2-normalized. Two
// independent hash streams decide bucket and sign, so collisions do not
// systematically inflate similarity. Deterministic given (tokens, seed).
nn::Tensor hash_encode(const std::vector<std::string>& tokens, std::size_t dims = kHeadlineDim,
                       std::uint64_t seed = 0);

}  // namespace newsrank::enc
