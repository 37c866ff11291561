#include "encoder/categories.hpp"

#include <cmath>

#include "common/error.hpp"

namespace newsrank::enc {

const std::array<std::string, kNumCategories>& category_names() {
    static const std::array<std::string, kNumCategories> names = {
        "business", "entertainment", "health", "sci-tech",
        "sport",    "us",            "world",  "unclassified"};
    return names;
}

std::optional<std::size_t> try_category_index(const std::string& name) {
    const auto& names = category_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t category_index(const std::string& name) {
    auto idx = try_category_index(name);
    if (!idx) throw InputError("unknown category: '" + name + "'");
    return *idx;
}

const std::string& category_name(std::size_t index) {
    if (index >= kNumCategories) throw InputError("category index out of range");
    return category_names()[index];
}

nn::Tensor init_category_table(std::uint64_t seed) {
    return nn::gaussian_init({kNumCategories, kCategoryDim}, 1.0 / std::sqrt(30.0), seed);
}

}  // namespace newsrank::enc
