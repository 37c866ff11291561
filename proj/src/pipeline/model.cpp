#include "pipeline/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <json.hpp>

#include "common/error.hpp"
#include "nn/ops.hpp"

namespace newsrank::pipe {

using nlohmann::json;
using nn::Tensor;

namespace {

Tensor as_column(const Tensor& v) { return Tensor({v.size(), 1}, v.values()); }

// Compacted view of a day: the network only ever sees real rows.
struct CompactDay {
    Tensor vectors;                       // n x headline_dim
    std::vector<std::size_t> categories;  // n
    std::vector<std::size_t> slots;       // original row of each real headline
};

CompactDay compact(const DayInput& day, std::size_t headline_dim) {
    CompactDay out;
    for (std::size_t i = 0; i < day.mask.size(); ++i) {
        if (day.mask[i]) out.slots.push_back(i);
    }
    if (out.slots.empty()) throw InputError("day batch has no unmasked headlines");
    out.vectors = Tensor::zeros({out.slots.size(), headline_dim});
    for (std::size_t j = 0; j < out.slots.size(); ++j) {
        const std::size_t src = out.slots[j];
        std::memcpy(out.vectors.data() + j * headline_dim, day.vectors.data() + src * headline_dim,
                    headline_dim * sizeof(double));
        out.categories.push_back(day.categories[src]);
    }
    return out;
}

}  // namespace

AttentionResult attention_forward(const Tensor& h_rows, const std::vector<bool>& mask,
                                  const Tensor& w_attn, const Tensor& b_attn,
                                  const Tensor& u_attn) {
    const std::size_t m = h_rows.rows();
    const std::size_t dim = h_rows.cols();
    if (mask.size() != m) throw InputError("attention mask length does not match rows");
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < m; ++i) {
        if (mask[i]) slots.push_back(i);
    }
    if (slots.empty()) throw InputError("day batch has no unmasked headlines");

    Tensor packed = Tensor::zeros({slots.size(), dim});
    for (std::size_t j = 0; j < slots.size(); ++j) {
        std::memcpy(packed.data() + j * dim, h_rows.data() + slots[j] * dim,
                    dim * sizeof(double));
    }

    const Tensor scores = nn::tanh_op(nn::dense(packed, w_attn, b_attn));
    const Tensor logits = nn::matmul(scores, as_column(u_attn));  // n x 1
    Tensor flat_logits({slots.size()}, logits.values());
    const Tensor alphas = nn::softmax(flat_logits);

    AttentionResult out;
    out.day_vec = nn::matmul(alphas, packed);  // 1 x n times n x dim -> dim
    out.alphas.assign(m, 0.0);
    out.logits.assign(m, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < slots.size(); ++j) {
        out.alphas[slots[j]] = alphas[j];
        out.logits[slots[j]] = flat_logits[j];
    }
    return out;
}

Model::Model(ModelConfig config) : config_(config) {
    const auto seed_for = [&](const char* name) { return derive_seed(config_.seed, name); };
    const std::size_t in = config_.input_dim();
    const std::size_t hid = config_.hidden_dim;

    category_table_ = nn::ParamGroup(
        "category_table", nn::gaussian_init({enc::kNumCategories, config_.category_dim},
                                            1.0 / std::sqrt(double(config_.category_dim)),
                                            seed_for("category_table")));
    ln_in_gain_ = nn::ParamGroup("ln_in.gain", Tensor::full({in}, 1.0));
    ln_in_bias_ = nn::ParamGroup("ln_in.bias", Tensor::zeros({in}));
    w_proj_ = nn::ParamGroup("proj.weight", nn::he_init({in, hid}, in, seed_for("proj.weight")));
    b_proj_ = nn::ParamGroup("proj.bias", Tensor::zeros({hid}));
    w_attn_ = nn::ParamGroup("attn.weight", nn::he_init({hid, hid}, hid, seed_for("attn.weight")));
    b_attn_ = nn::ParamGroup("attn.bias", Tensor::zeros({hid}));
    u_attn_ = nn::ParamGroup("attn.context", nn::he_init({hid}, hid, seed_for("attn.context")));
    ln_day_gain_ = nn::ParamGroup("ln_day.gain", Tensor::full({hid}, 1.0));
    ln_day_bias_ = nn::ParamGroup("ln_day.bias", Tensor::zeros({hid}));
    w_out_ = nn::ParamGroup("out.weight", nn::he_init({hid, config_.num_classes}, hid,
                                                      seed_for("out.weight")));
    b_out_ = nn::ParamGroup("out.bias", Tensor::zeros({config_.num_classes}));
}

void Model::validate_day(const DayInput& day) const {
    const std::size_t m = day.mask.size();
    if (day.vectors.rank() != 2 || day.vectors.rows() != m ||
        day.vectors.cols() != config_.headline_dim) {
        throw InputError("day vectors must be rows of width " +
                         std::to_string(config_.headline_dim) + ", got " +
                         day.vectors.shape_str());
    }
    if (day.categories.size() != m) throw InputError("day category list does not match rows");
    if (m > config_.day_cap) {
        throw InputError("day batch exceeds the per-day cap of " +
                         std::to_string(config_.day_cap));
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (day.mask[i] && day.categories[i] >= enc::kNumCategories) {
            throw InputError("day category index out of range: " +
                             std::to_string(day.categories[i]));
        }
    }
}

nn::Tensor Model::project(const Tensor& x_row) const {
    if (x_row.size() != config_.input_dim()) {
        throw InputError("project expects " + std::to_string(config_.input_dim()) +
                         "-dim input, got " + std::to_string(x_row.size()));
    }
    const Tensor normed =
        nn::layer_norm(x_row, ln_in_gain_.value, ln_in_bias_.value, config_.ln_eps);
    return nn::elu(nn::dense(normed, w_proj_.value, b_proj_.value));
}

Model::DayOutput Model::forward_day(const DayInput& day) const {
    validate_day(day);
    const CompactDay cd = compact(day, config_.headline_dim);
    const std::size_t n = cd.slots.size();

    // h_i = elu(dense(ln(hl_i ++ category_i)))
    Tensor x = Tensor::zeros({n, config_.input_dim()});
    for (std::size_t j = 0; j < n; ++j) {
        double* row = x.data() + j * config_.input_dim();
        std::memcpy(row, cd.vectors.data() + j * config_.headline_dim,
                    config_.headline_dim * sizeof(double));
        std::memcpy(row + config_.headline_dim,
                    category_table_.value.data() + cd.categories[j] * config_.category_dim,
                    config_.category_dim * sizeof(double));
    }
    const Tensor normed = nn::layer_norm(x, ln_in_gain_.value, ln_in_bias_.value, config_.ln_eps);
    const Tensor projected = nn::elu(nn::dense(normed, w_proj_.value, b_proj_.value));

    std::vector<bool> all_real(n, true);
    AttentionResult att =
        attention_forward(projected, all_real, w_attn_.value, b_attn_.value, u_attn_.value);

    const Tensor day_normed =
        nn::layer_norm(att.day_vec, ln_day_gain_.value, ln_day_bias_.value, config_.ln_eps);
    DayOutput out;
    out.probs = nn::softmax(nn::dense(day_normed, w_out_.value, b_out_.value));
    out.alphas.assign(day.mask.size(), 0.0);
    out.logits.assign(day.mask.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < n; ++j) {
        out.alphas[cd.slots[j]] = att.alphas[j];
        out.logits[cd.slots[j]] = att.logits[j];
    }
    return out;
}

double Model::score_headline(const double* vec, std::size_t category) const {
    if (category >= enc::kNumCategories) {
        throw InputError("category index out of range: " + std::to_string(category));
    }
    Tensor x = Tensor::zeros({config_.input_dim()});
    std::memcpy(x.data(), vec, config_.headline_dim * sizeof(double));
    std::memcpy(x.data() + config_.headline_dim,
                category_table_.value.data() + category * config_.category_dim,
                config_.category_dim * sizeof(double));
    const Tensor h = project(x);
    const Tensor score = nn::tanh_op(nn::dense(h, w_attn_.value, b_attn_.value));
    return nn::matmul(score, as_column(u_attn_.value))[0];
}

nn::Var Model::record_loss(nn::Tape& tape, const DayInput& day, bool training, Rng* dropout_rng) {
    validate_day(day);
    if (training && dropout_rng == nullptr) {
        throw TrainError("training pass needs a dropout rng");
    }
    const CompactDay cd = compact(day, config_.headline_dim);

    nn::Var table = tape.param(category_table_);
    nn::Var ln_in_g = tape.param(ln_in_gain_);
    nn::Var ln_in_b = tape.param(ln_in_bias_);
    nn::Var wp = tape.param(w_proj_);
    nn::Var bp = tape.param(b_proj_);
    nn::Var wa = tape.param(w_attn_);
    nn::Var ba = tape.param(b_attn_);
    nn::Var ua = tape.param(u_attn_);
    nn::Var ln_day_g = tape.param(ln_day_gain_);
    nn::Var ln_day_b = tape.param(ln_day_bias_);
    nn::Var wo = tape.param(w_out_);
    nn::Var bo = tape.param(b_out_);

    nn::Var hv = tape.constant(cd.vectors);
    nn::Var cats = tape.gather_rows(table, cd.categories);
    nn::Var x = tape.concat_cols(hv, cats);
    nn::Var normed = tape.layer_norm(x, ln_in_g, ln_in_b, config_.ln_eps);
    nn::Var projected = tape.elu(tape.dense(normed, wp, bp));
    if (training && config_.dropout_rate > 0.0) {
        projected = tape.dropout(projected, config_.dropout_rate, true, *dropout_rng);
    }

    nn::Var scores = tape.tanh(tape.dense(projected, wa, ba));
    nn::Var logits = tape.matmul(scores, ua);  // n
    nn::Var alphas = tape.softmax(logits);
    nn::Var day_vec = tape.matmul(alphas, projected);  // hidden_dim
    nn::Var day_normed = tape.layer_norm(day_vec, ln_day_g, ln_day_b, config_.ln_eps);
    nn::Var probs = tape.softmax(tape.dense(day_normed, wo, bo));
    return tape.cross_entropy(probs, static_cast<std::size_t>(day.label));
}

std::vector<nn::ParamGroup*> Model::params() {
    return {&category_table_, &ln_in_gain_, &ln_in_bias_, &w_proj_, &b_proj_, &w_attn_,
            &b_attn_,         &u_attn_,     &ln_day_gain_, &ln_day_bias_, &w_out_, &b_out_};
}

std::vector<const nn::ParamGroup*> Model::params() const {
    auto mutable_params = const_cast<Model*>(this)->params();
    return {mutable_params.begin(), mutable_params.end()};
}

nn::Checkpoint Model::to_checkpoint(const std::string& extra_metadata_json) const {
    json meta{{"format", "newsrank-model"},
              {"version", 1},
              {"headline_dim", config_.headline_dim},
              {"category_dim", config_.category_dim},
              {"hidden_dim", config_.hidden_dim},
              {"num_classes", config_.num_classes},
              {"day_cap", config_.day_cap},
              {"dropout_rate", config_.dropout_rate},
              {"ln_eps", config_.ln_eps},
              {"seed", config_.seed}};
    if (!extra_metadata_json.empty()) meta["run"] = json::parse(extra_metadata_json);

    nn::Checkpoint ck;
    ck.metadata_json = meta.dump();
    for (const auto* p : params()) ck.params.emplace_back(p->name, p->value);
    return ck;
}

Model Model::from_checkpoint(const nn::Checkpoint& ck) {
    json meta;
    try {
        meta = json::parse(ck.metadata_json);
    } catch (const json::exception& e) {
        throw InputError(std::string("bad checkpoint metadata: ") + e.what());
    }
    if (meta.value("format", "") != "newsrank-model") {
        throw InputError("checkpoint is not a model checkpoint");
    }
    ModelConfig config;
    config.headline_dim = meta.at("headline_dim").get<std::size_t>();
    config.category_dim = meta.at("category_dim").get<std::size_t>();
    config.hidden_dim = meta.at("hidden_dim").get<std::size_t>();
    config.num_classes = meta.at("num_classes").get<std::size_t>();
    config.day_cap = meta.at("day_cap").get<std::size_t>();
    config.dropout_rate = meta.at("dropout_rate").get<double>();
    config.ln_eps = meta.at("ln_eps").get<double>();
    config.seed = meta.at("seed").get<std::uint64_t>();

    Model model(config);
    auto params = model.params();
    if (ck.params.size() != params.size()) {
        throw InputError("checkpoint holds " + std::to_string(ck.params.size()) +
                         " tensors, expected " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (ck.params[i].name != params[i]->name) {
            throw InputError("checkpoint tensor '" + ck.params[i].name + "' where '" +
                             params[i]->name + "' was expected");
        }
        if (ck.params[i].value.shape() != params[i]->value.shape()) {
            throw InputError("checkpoint tensor '" + ck.params[i].name + "' has shape " +
                             ck.params[i].value.shape_str() + ", expected " +
                             params[i]->value.shape_str());
        }
        params[i]->value = ck.params[i].value;
    }
    return model;
}

DayInput make_day_input(const ingest::Dataset& ds, const ingest::DayExample& ex,
                        const enc::EmbeddingStore& store) {
    const std::size_t n = ex.headline_indices.size();
    DayInput day;
    day.vectors = Tensor::zeros({n, store.dim()});
    day.categories.resize(n);
    day.mask.assign(n, true);
    day.label = ex.label;
    for (std::size_t j = 0; j < n; ++j) {
        const auto& h = ds.headlines.at(ex.headline_indices[j]);
        std::memcpy(day.vectors.data() + j * store.dim(), store.vector_of(h.id),
                    store.dim() * sizeof(double));
        day.categories[j] = h.category;
    }
    return day;
}

}  // namespace newsrank::pipe
