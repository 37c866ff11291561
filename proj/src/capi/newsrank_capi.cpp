#include "newsrank.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <utility>

#include "common/error.hpp"
#include "encoder/categories.hpp"
#include "encoder/hash_encoder.hpp"
#include "ingest/headlines.hpp"
#include "json.hpp"
#include "nn/checkpoint.hpp"
#include "pipeline/model.hpp"
#include "runner/config.hpp"
#include "runner/stages.hpp"

using nlohmann::json;

struct nr_config {
    newsrank::run::RunConfig impl;
};

struct nr_model {
    newsrank::pipe::Model impl;
    bool hashed = false;
    std::size_t hash_dims = 0;
    std::uint64_t hash_seed = 0;
};

namespace {

thread_local std::string t_last_error;

// Copies into C-allocated memory so nr_string_free pairs with any caller.
char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
nr_status guarded(Fn&& fn) {
    t_last_error.clear();
    try {
        fn();
        return NR_OK;
    } catch (const newsrank::InputError& e) {
        t_last_error = e.what();
        return NR_INVALID_INPUT;
    } catch (const newsrank::TrainError& e) {
        t_last_error = e.what();
        return NR_TRAIN_FAILED;
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return NR_ERROR;
    } catch (...) {
        t_last_error = "unknown failure";
        return NR_ERROR;
    }
}

nr_status fail_invalid(const std::string& msg) {
    t_last_error = msg;
    return NR_INVALID_INPUT;
}

nr_status emit(char** out, const json& j) {
    *out = dup_string(j.dump(2));
    if (*out == nullptr) {
        t_last_error = "out of memory";
        return NR_ERROR;
    }
    return NR_OK;
}

}  // namespace

extern "C" {

const char* nr_version(void) { return "0.1.0"; }

const char* nr_last_error(void) { return t_last_error.c_str(); }

void nr_string_free(char* s) { std::free(s); }

nr_config* nr_config_create(void) { return new (std::nothrow) nr_config(); }

void nr_config_free(nr_config* config) { delete config; }

nr_status nr_config_load_file(nr_config* config, const char* path) {
    if (config == nullptr || path == nullptr) return fail_invalid("null config or path");
    return guarded([&] { config->impl.load_file(path); });
}

nr_status nr_config_set(nr_config* config, const char* key, const char* value) {
    if (config == nullptr || key == nullptr || value == nullptr)
        return fail_invalid("null config, key, or value");
    return guarded([&] { config->impl.set(key, value); });
}

nr_status nr_config_dump(const nr_config* config, char** out_json) {
    if (config == nullptr || out_json == nullptr) return fail_invalid("null config or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] { rc = emit(out_json, json::parse(config->impl.dump())); });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_run_ingest(const nr_config* config, char** out_summary_json) {
    if (config == nullptr || out_summary_json == nullptr)
        return fail_invalid("null config or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] {
        const auto s = newsrank::run::run_ingest(config->impl);
        json j = {{"threshold", s.threshold},
                  {"class_counts",
                   {{"DOWN", s.class_counts[0]},
                    {"STAY", s.class_counts[1]},
                    {"UP", s.class_counts[2]}}},
                  {"days",
                   {{"labeled", s.days_labeled},
                    {"kept", s.days_kept},
                    {"dropped", s.days_dropped},
                    {"dropped_fraction", s.day_dropped_fraction}}},
                  {"headlines_kept", s.headlines_kept},
                  {"examples", s.examples}};
        rc = emit(out_summary_json, j);
    });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_run_train(const nr_config* config, char** out_summary_json) {
    if (config == nullptr || out_summary_json == nullptr)
        return fail_invalid("null config or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] {
        const auto s = newsrank::run::run_train(config->impl);
        json j = {{"criterion", s.criterion},
                  {"selected_epoch", s.selected_epoch},
                  {"epochs_considered", s.epochs_considered},
                  {"val_acc", s.val_acc},
                  {"val_loss", s.val_loss},
                  {"checkpoint", s.checkpoint_path}};
        rc = emit(out_summary_json, j);
    });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_run_score(const nr_config* config, char** out_summary_json) {
    if (config == nullptr || out_summary_json == nullptr)
        return fail_invalid("null config or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] {
        const auto s = newsrank::run::run_score(config->impl);
        json j = {{"scored", s.scored},
                  {"base_fraction", s.base_fraction},
                  {"ranked_path", s.ranked_path},
                  {"annotation_written", s.annotation_written}};
        rc = emit(out_summary_json, j);
    });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_run_eval(const nr_config* config, char** out_table_json) {
    if (config == nullptr || out_table_json == nullptr)
        return fail_invalid("null config or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] {
        const auto rows = newsrank::run::run_eval(config->impl);
        json table = json::array();
        for (const auto& row : rows) {
            json r = {{"category", row.category},
                      {"examples", row.examples},
                      {"absent", row.absent}};
            if (row.absent) {
                r["max_val_acc"] = nullptr;
                r["best_epoch"] = nullptr;
            } else {
                r["max_val_acc"] = row.max_val_acc;
                r["best_epoch"] = row.best_epoch;
            }
            table.push_back(std::move(r));
        }
        rc = emit(out_table_json, table);
    });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_run_agreement(const char* labels_a_path, const char* labels_b_path,
                           char** out_json) {
    if (labels_a_path == nullptr || labels_b_path == nullptr || out_json == nullptr)
        return fail_invalid("null path or output");
    nr_status rc = NR_ERROR;
    nr_status guard = guarded([&] {
        const auto r = newsrank::run::run_agreement(labels_a_path, labels_b_path);
        json j = {{"kappa", r.kappa},
                  {"observed_agreement", r.observed_agreement},
                  {"items", r.items}};
        rc = emit(out_json, j);
    });
    return guard == NR_OK ? rc : guard;
}

nr_status nr_model_open(const char* checkpoint_path, nr_model** out_model) {
    if (checkpoint_path == nullptr || out_model == nullptr)
        return fail_invalid("null path or output");
    return guarded([&] {
        const auto ck = newsrank::nn::load_checkpoint(checkpoint_path);
        auto model = newsrank::pipe::Model::from_checkpoint(ck);
        bool hashed = false;
        std::size_t dims = 0;
        std::uint64_t seed = 0;
        const json meta = json::parse(ck.metadata_json);
        if (meta.contains("run") && meta["run"].contains("encoder")) {
            const json& e = meta["run"]["encoder"];
            if (e.at("mode") == "hashed") {
                hashed = true;
                dims = e.at("dims").get<std::size_t>();
                seed = e.at("seed").get<std::uint64_t>();
            }
        }
        *out_model = new nr_model{std::move(model), hashed, dims, seed};
    });
}

size_t nr_model_dim(const nr_model* model) {
    return model == nullptr ? 0 : model->impl.config().headline_dim;
}

nr_status nr_model_score(const nr_model* model, const double* vector, size_t vector_len,
                         size_t category, double* out_score) {
    if (model == nullptr || vector == nullptr || out_score == nullptr)
        return fail_invalid("null model, vector, or output");
    return guarded([&] {
        if (vector_len != model->impl.config().headline_dim)
            throw newsrank::InputError("vector length " + std::to_string(vector_len) +
                                       " does not match model width " +
                                       std::to_string(model->impl.config().headline_dim));
        if (category >= newsrank::enc::kNumCategories)
            throw newsrank::InputError("category index out of range");
        *out_score = model->impl.score_headline(vector, category);
    });
}

nr_status nr_model_score_text(const nr_model* model, const char* text, const char* category,
                              double* out_score) {
    if (model == nullptr || text == nullptr || out_score == nullptr)
        return fail_invalid("null model, text, or output");
    return guarded([&] {
        if (!model->hashed)
            throw newsrank::InputError(
                "model was trained on precomputed embeddings; encode the text yourself and "
                "call nr_model_score");
        const auto tokens = newsrank::ingest::tokenize(text);
        if (tokens.empty()) throw newsrank::InputError("text produced no tokens");
        const auto vec =
            newsrank::enc::hash_encode(tokens, model->hash_dims, model->hash_seed);
        const std::size_t cat = (category == nullptr || *category == '\0')
                                    ? newsrank::enc::kUnclassified
                                    : newsrank::enc::category_index(category);
        *out_score = model->impl.score_headline(vec.data(), cat);
    });
}

void nr_model_free(nr_model* model) { delete model; }

}  // extern "C"
