#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace newsrank::run {

// Everything a run needs, resolvable from defaults, then a JSON config
// file, then individual key=value overrides (last writer wins).
struct RunConfig {
    // inputs and artifact locations
    std::string prices;
    std::string headlines;
    std::string embeddings;  // empty = built-in hashed encoder
    std::string dataset_dir;
    std::string checkpoint;
    std::string out_dir;
    std::string index_name = "index";

    // labeling
    double threshold = 0.0;  // 0 = search the grid
    std::vector<double> grid;  // empty = 0.1 .. 1.0

    // preprocessing
    std::size_t day_cap = 115;
    std::size_t min_day_headlines = 25;
    std::size_t top_categories = 4;

    // encoder
    std::size_t embedding_dim = 768;  // row width of a precomputed embeddings file
    std::size_t hash_dims = 768;
    std::uint64_t hash_seed = 0;

    // model
    std::size_t hidden_dim = 100;
    std::size_t category_dim = 30;
    double dropout = 0.25;

    // training
    std::size_t epochs = 20;
    std::size_t batch_size = 15;
    double learning_rate = 1e-3;
    double weight_decay = 0.01;
    double warmup_frac = 0.1;
    std::size_t threads = 1;
    std::string select = "max-acc";  // or "min-loss"
    double train_frac = 0.8;
    double val_frac = 0.1;
    double test_frac = 0.1;

    // scoring
    std::string target_category = "business";
    std::vector<std::size_t> ks = {10, 100, 1000, 2500};
    std::string score_split = "test";  // train | val | test | all
    std::size_t annotation_top = 200;
    std::size_t annotation_uniform = 200;

    std::uint64_t seed = 0;

    // Parses the file as JSON and overlays it onto *this. Unknown keys are
    // errors so typos fail loudly.
    void load_file(const std::string& path);

    // Sets one field by its config key; the value uses the same JSON
    // spelling as the file format (bare strings also accepted).
    void set(const std::string& key, const std::string& value);

    std::string dump() const;  // canonical JSON snapshot
    void validate() const;
};

}  // namespace newsrank::run
