#include "runner/config.hpp"

#include <fstream>

#include "common/error.hpp"
#include "json.hpp"

namespace newsrank::run {

using nlohmann::json;

namespace {

double as_double(const json& v, const std::string& key) {
    if (!v.is_number()) throw InputError("config key '" + key + "' expects a number");
    return v.get<double>();
}

std::size_t as_size(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw InputError("config key '" + key + "' expects a non-negative integer");
    return v.get<std::size_t>();
}

std::uint64_t as_u64(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw InputError("config key '" + key + "' expects a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& key) {
    if (!v.is_string()) throw InputError("config key '" + key + "' expects a string");
    return v.get<std::string>();
}

std::vector<double> as_double_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw InputError("config key '" + key + "' expects an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_double(e, key));
    return out;
}

std::vector<std::size_t> as_size_list(const json& v, const std::string& key) {
    if (!v.is_array()) throw InputError("config key '" + key + "' expects an array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) out.push_back(as_size(e, key));
    return out;
}

void overlay(RunConfig& c, const json& j) {
    if (!j.is_object()) throw InputError("config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "prices") c.prices = as_string(v, key);
        else if (key == "headlines") c.headlines = as_string(v, key);
        else if (key == "embeddings") c.embeddings = as_string(v, key);
        else if (key == "dataset_dir") c.dataset_dir = as_string(v, key);
        else if (key == "checkpoint") c.checkpoint = as_string(v, key);
        else if (key == "out_dir") c.out_dir = as_string(v, key);
        else if (key == "index_name") c.index_name = as_string(v, key);
        else if (key == "threshold") c.threshold = as_double(v, key);
        else if (key == "grid") c.grid = as_double_list(v, key);
        else if (key == "day_cap") c.day_cap = as_size(v, key);
        else if (key == "min_day_headlines") c.min_day_headlines = as_size(v, key);
        else if (key == "top_categories") c.top_categories = as_size(v, key);
        else if (key == "embedding_dim") c.embedding_dim = as_size(v, key);
        else if (key == "hash_dims") c.hash_dims = as_size(v, key);
        else if (key == "hash_seed") c.hash_seed = as_u64(v, key);
        else if (key == "hidden_dim") c.hidden_dim = as_size(v, key);
        else if (key == "category_dim") c.category_dim = as_size(v, key);
        else if (key == "dropout") c.dropout = as_double(v, key);
        else if (key == "epochs") c.epochs = as_size(v, key);
        else if (key == "batch_size") c.batch_size = as_size(v, key);
        else if (key == "learning_rate") c.learning_rate = as_double(v, key);
        else if (key == "weight_decay") c.weight_decay = as_double(v, key);
        else if (key == "warmup_frac") c.warmup_frac = as_double(v, key);
        else if (key == "threads") c.threads = as_size(v, key);
        else if (key == "select") c.select = as_string(v, key);
        else if (key == "train_frac") c.train_frac = as_double(v, key);
        else if (key == "val_frac") c.val_frac = as_double(v, key);
        else if (key == "test_frac") c.test_frac = as_double(v, key);
        else if (key == "target_category") c.target_category = as_string(v, key);
        else if (key == "ks") c.ks = as_size_list(v, key);
        else if (key == "score_split") c.score_split = as_string(v, key);
        else if (key == "annotation_top") c.annotation_top = as_size(v, key);
        else if (key == "annotation_uniform") c.annotation_uniform = as_size(v, key);
        else if (key == "seed") c.seed = as_u64(v, key);
        else throw InputError("unknown config key '" + key + "'");
    }
}

json to_json(const RunConfig& c) {
    // json objects keep keys sorted, so the snapshot is canonical.
    json j;
    j["prices"] = c.prices;
    j["headlines"] = c.headlines;
    j["embeddings"] = c.embeddings;
    j["dataset_dir"] = c.dataset_dir;
    j["checkpoint"] = c.checkpoint;
    j["out_dir"] = c.out_dir;
    j["index_name"] = c.index_name;
    j["threshold"] = c.threshold;
    j["grid"] = c.grid;
    j["day_cap"] = c.day_cap;
    j["min_day_headlines"] = c.min_day_headlines;
    j["top_categories"] = c.top_categories;
    j["embedding_dim"] = c.embedding_dim;
    j["hash_dims"] = c.hash_dims;
    j["hash_seed"] = c.hash_seed;
    j["hidden_dim"] = c.hidden_dim;
    j["category_dim"] = c.category_dim;
    j["dropout"] = c.dropout;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["warmup_frac"] = c.warmup_frac;
    j["threads"] = c.threads;
    j["select"] = c.select;
    j["train_frac"] = c.train_frac;
    j["val_frac"] = c.val_frac;
    j["test_frac"] = c.test_frac;
    j["target_category"] = c.target_category;
    j["ks"] = c.ks;
    j["score_split"] = c.score_split;
    j["annotation_top"] = c.annotation_top;
    j["annotation_uniform"] = c.annotation_uniform;
    j["seed"] = c.seed;
    return j;
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("config file " + path + " is not valid JSON: " + e.what());
    }
    overlay(*this, j);
}

void RunConfig::set(const std::string& key, const std::string& value) {
    json parsed;
    try {
        parsed = json::parse(value);
    } catch (const json::exception&) {
        parsed = value;  // bare strings need no quoting
    }
    overlay(*this, json{{key, parsed}});
}

std::string RunConfig::dump() const { return to_json(*this).dump(2); }

void RunConfig::validate() const {
    if (threshold < 0.0) throw InputError("threshold must be non-negative");
    for (double g : grid)
        if (g <= 0.0) throw InputError("grid thresholds must be positive");
    if (day_cap == 0) throw InputError("day_cap must be positive");
    if (min_day_headlines == 0) throw InputError("min_day_headlines must be positive");
    if (top_categories == 0) throw InputError("top_categories must be positive");
    if (embedding_dim == 0) throw InputError("embedding_dim must be positive");
    if (hash_dims == 0) throw InputError("hash_dims must be positive");
    if (hidden_dim == 0) throw InputError("hidden_dim must be positive");
    if (category_dim == 0) throw InputError("category_dim must be positive");
    if (dropout < 0.0 || dropout >= 1.0) throw InputError("dropout must lie in [0, 1)");
    if (epochs == 0) throw InputError("epochs must be positive");
    if (batch_size == 0) throw InputError("batch_size must be positive");
    if (learning_rate <= 0.0) throw InputError("learning_rate must be positive");
    if (weight_decay < 0.0) throw InputError("weight_decay must be non-negative");
    if (warmup_frac < 0.0 || warmup_frac > 1.0) throw InputError("warmup_frac must lie in [0, 1]");
    if (threads == 0) throw InputError("threads must be positive");
    if (select != "max-acc" && select != "min-loss")
        throw InputError("select must be 'max-acc' or 'min-loss'");
    if (score_split != "train" && score_split != "val" && score_split != "test" &&
        score_split != "all")
        throw InputError("score_split must be one of train, val, test, all");
    for (std::size_t k : ks)
        if (k == 0) throw InputError("ks entries must be positive");
    if (ks.empty()) throw InputError("ks must not be empty");
}

}  // namespace newsrank::run
