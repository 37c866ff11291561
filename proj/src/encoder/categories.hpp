#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "nn/tensor.hpp"

namespace newsrank::enc {

// Stable category ordering; "unclassified" is the final row.
inline constexpr std::size_t kNumCategories = 8;
inline constexpr std::size_t kNumScoredCategories = 7;  // excludes unclassified
inline constexpr std::size_t kCategoryDim = 30;
inline constexpr std::size_t kUnclassified = 7;

const std::array<std::string, kNumCategories>& category_names();

// Throws InputError for unknown labels.
std::size_t category_index(const std::string& name);
std::optional<std::size_t> try_category_index(const std::string& name);
const std::string& category_name(std::size_t index);

// 8 x 30 trainable table, rows initialized from normal(0, 1/sqrt(30)).
nn::Tensor init_category_table(std::uint64_t seed);

}  // namespace newsrank::enc
