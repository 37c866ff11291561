#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "encoder/categories.hpp"
#include "encoder/hash_encoder.hpp"
#include "nn/optimizer.hpp"
#include "nn/tensor.hpp"

namespace newsrank::cat {

// Linear softmax head over encoder vectors; scores the seven real
// categories, with "unclassified" reserved for low-confidence outputs.
struct CategoryModel {
    nn::Tensor weight;  // dim x 7
    nn::Tensor bias;    // 7
    double threshold = 0.5;
    std::size_t dim() const { return weight.rows(); }
};

struct CategorizerConfig {
    std::size_t dim = enc::kHeadlineDim;
    double threshold = 0.5;
    std::size_t epochs = 40;
    std::size_t batch_size = 32;
    double holdout_frac = 0.2;
    std::uint64_t seed = 0;
    nn::OptimizerConfig opt = {.learning_rate = 0.05, .weight_decay = 0.0};
};

struct LabeledVector {
    nn::Tensor vec;            // encoder output, length dim
    std::size_t category = 0;  // 0..6
};

struct TrainedCategorizer {
    CategoryModel model;
    double macro_f1 = 0.0;             // on the held-out slice
    std::vector<double> per_class_f1;  // 7 entries; absent classes report 0
    std::size_t holdout_size = 0;
};

// Softmax probabilities over the 7 scored categories.
nn::Tensor category_probs(const CategoryModel& model, const nn::Tensor& vec);

// Argmax class when its probability reaches the threshold (inclusive),
// otherwise unclassified.
std::size_t category_from_probs(const nn::Tensor& probs, double threshold);
std::size_t predict_category(const CategoryModel& model, const nn::Tensor& vec);

// Cross-entropy training with a seeded shuffle and a held-out slice for
// macro F1 (averaged over classes present in the holdout). Needs at least
// two distinct classes.
TrainedCategorizer train_categorizer(const std::vector<LabeledVector>& examples,
                                     const CategorizerConfig& config);

// "class TAB headline text" per line; class must be one of the 7 scored
// labels. Errors name the offending line.
std::vector<std::pair<std::size_t, std::string>> load_labeled_text(const std::string& path);

}  // namespace newsrank::cat
