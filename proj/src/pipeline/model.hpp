#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "encoder/categories.hpp"
#include "encoder/embedding_store.hpp"
#include "ingest/dataset.hpp"
#include "nn/checkpoint.hpp"
#include "nn/graph.hpp"
#include "nn/tensor.hpp"

namespace newsrank::pipe {

struct ModelConfig {
    std::size_t headline_dim = enc::kHeadlineDim;  // encoder width
    std::size_t category_dim = enc::kCategoryDim;
    std::size_t hidden_dim = 100;
    std::size_t num_classes = 3;
    std::size_t day_cap = ingest::kDayCap;
    double dropout_rate = 0.25;
    double ln_eps = 1e-5;
    std::uint64_t seed = 0;

    std::size_t input_dim() const { return headline_dim + category_dim; }
};

// One day of headlines as the network sees it. Rows may include padding;
// only rows with mask=true enter the computation, so padded rows can hold
// anything.
struct DayInput {
    nn::Tensor vectors;                   // m x headline_dim
    std::vector<std::size_t> categories;  // m entries, each < kNumCategories
    std::vector<bool> mask;               // m entries, true = real headline
    ingest::Movement label = ingest::Movement::Stay;
};

// Attention over already-projected headline rows. Masked logits read -inf
// in the output; masked alphas are exactly 0 (their rows never enter the
// softmax).
struct AttentionResult {
    nn::Tensor day_vec;          // hidden_dim
    std::vector<double> alphas;  // per input row
    std::vector<double> logits;  // per input row
};
AttentionResult attention_forward(const nn::Tensor& h_rows, const std::vector<bool>& mask,
                                  const nn::Tensor& w_attn, const nn::Tensor& b_attn,
                                  const nn::Tensor& u_attn);

// The movement classifier: per headline, concat(headline vec, category
// embedding) -> layer norm -> dense+ELU -> additive attention pools the day
// -> layer norm -> dense -> softmax over DOWN/STAY/UP. The pre-softmax
// attention scalar doubles as the global relevance score.
class Model {
public:
    explicit Model(ModelConfig config);

    struct DayOutput {
        nn::Tensor probs;            // num_classes
        std::vector<double> alphas;  // m, exactly 0 at masked rows
        std::vector<double> logits;  // m, -inf at masked rows
    };

    // Inference pass, dropout off.
    DayOutput forward_day(const DayInput& day) const;

    // Projection of one concatenated input row (inference path).
    nn::Tensor project(const nn::Tensor& x_row) const;

    // Relevance score of a single headline: its attention logit. Bitwise
    // equal to the logit the same headline gets inside any day batch.
    double score_headline(const double* vec, std::size_t category) const;

    // Records the forward pass for one day on the tape and returns the
    // cross-entropy loss node. dropout_rng must outlive backward().
    nn::Var record_loss(nn::Tape& tape, const DayInput& day, bool training, Rng* dropout_rng);

    std::vector<nn::ParamGroup*> params();
    std::vector<const nn::ParamGroup*> params() const;
    const ModelConfig& config() const { return config_; }

    nn::Checkpoint to_checkpoint(const std::string& extra_metadata_json = "") const;
    static Model from_checkpoint(const nn::Checkpoint& ck);

private:
    Model() = default;
    void validate_day(const DayInput& day) const;

    ModelConfig config_;
    nn::ParamGroup category_table_;  // kNumCategories x category_dim
    nn::ParamGroup ln_in_gain_, ln_in_bias_;
    nn::ParamGroup w_proj_, b_proj_;
    nn::ParamGroup w_attn_, b_attn_, u_attn_;
    nn::ParamGroup ln_day_gain_, ln_day_bias_;
    nn::ParamGroup w_out_, b_out_;
};

// Copies the example's headline vectors and categories out of the store.
DayInput make_day_input(const ingest::Dataset& ds, const ingest::DayExample& ex,
                        const enc::EmbeddingStore& store);

}  // namespace newsrank::pipe
