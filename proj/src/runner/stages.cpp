#include "runner/stages.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <utility>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "encoder/categories.hpp"
#include "encoder/embedding_store.hpp"
#include "encoder/hash_encoder.hpp"
#include "ingest/dataset.hpp"
#include "ingest/headlines.hpp"
#include "ingest/labeling.hpp"
#include "ingest/prices.hpp"
#include "json.hpp"
#include "pipeline/model.hpp"
#include "pipeline/train.hpp"
#include "ranker/ranker.hpp"
#include "runner/manifest.hpp"

namespace newsrank::run {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InputError(what);
}

void ensure_out_dir(const RunConfig& config) {
    require(!config.out_dir.empty(), "out_dir is required");
    fs::create_directories(config.out_dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

// TSV cells must not carry the delimiters themselves.
std::string tsv_safe(std::string text) {
    for (char& c : text)
        if (c == '\t' || c == '\n' || c == '\r') c = ' ';
    return text;
}

std::string format_score(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Vectors either come from a precomputed embeddings file or are hashed from
// tokens on the fly; both paths are deterministic.
enc::EmbeddingStore build_store(const RunConfig& config,
                                const std::vector<ingest::Headline>& headlines) {
    if (!config.embeddings.empty())
        return enc::EmbeddingStore::load(config.embeddings, config.embedding_dim);
    enc::EmbeddingStore store(config.hash_dims, enc::EmbeddingStore::Provenance::hashed);
    for (const auto& h : headlines)
        store.add(h.id, enc::hash_encode(h.tokens, config.hash_dims, config.hash_seed).values());
    return store;
}

json encoder_metadata(const RunConfig& config) {
    json j;
    if (!config.embeddings.empty()) {
        j["mode"] = "precomputed";
        j["dims"] = config.embedding_dim;
    } else {
        j["mode"] = "hashed";
        j["dims"] = config.hash_dims;
        j["seed"] = config.hash_seed;
    }
    return j;
}

void add_dataset_inputs(ManifestBuilder& manifest, const RunConfig& config) {
    for (const char* name : {"headlines.jsonl", "examples.jsonl", "threshold.json"})
        manifest.add_input(join(config.dataset_dir, name));
    if (!config.embeddings.empty()) manifest.add_input(config.embeddings);
}

pipe::ModelConfig model_config_from(const RunConfig& config, std::size_t headline_dim,
                                    std::uint64_t seed) {
    pipe::ModelConfig mc;
    mc.headline_dim = headline_dim;
    mc.category_dim = config.category_dim;
    mc.hidden_dim = config.hidden_dim;
    mc.day_cap = config.day_cap;
    mc.dropout_rate = config.dropout;
    mc.seed = seed;
    return mc;
}

pipe::TrainConfig train_config_from(const RunConfig& config, std::uint64_t seed) {
    pipe::TrainConfig tc;
    tc.epochs = config.epochs;
    tc.batch_size = config.batch_size;
    tc.threads = config.threads;
    tc.warmup_frac = config.warmup_frac;
    tc.opt.learning_rate = config.learning_rate;
    tc.opt.weight_decay = config.weight_decay;
    tc.seed = seed;
    return tc;
}

}  // namespace

IngestSummary run_ingest(const RunConfig& config) {
    config.validate();
    require(!config.prices.empty(), "prices path is required");
    require(!config.headlines.empty(), "headlines path is required");
    ensure_out_dir(config);

    const auto prices = ingest::load_prices(config.prices, config.index_name);
    const auto returns = ingest::compute_returns(prices);
    std::vector<double> values;
    values.reserve(returns.size());
    for (const auto& r : returns) values.push_back(r.return_pct);

    double threshold = config.threshold;
    ingest::ClassDistribution dist;
    if (threshold > 0.0) {
        dist = ingest::class_distribution(values, threshold);
    } else {
        const auto grid = config.grid.empty() ? ingest::default_threshold_grid() : config.grid;
        const auto found = ingest::threshold_search(values, grid);
        threshold = found.best_threshold;
        dist = found.distribution;
    }

    ingest::DropCounts drops;
    auto filtered = ingest::filter_headlines(ingest::load_headlines(config.headlines), drops);

    // Attach each surviving headline to the trading day it can label. Days
    // without a next-session return (weekends, the final session) cannot be
    // labeled, so their headlines are dropped.
    std::map<std::string, double> return_by_day;
    for (const auto& r : returns) return_by_day[r.date] = r.return_pct;

    std::vector<ingest::Headline> corpus;
    std::map<std::string, ingest::LabeledDay> by_day;
    for (auto& h : filtered) {
        const auto it = return_by_day.find(h.day);
        if (it == return_by_day.end()) {
            drops.bump("no_session_return");
            continue;
        }
        auto& day = by_day[h.day];
        if (day.day.empty()) {
            day.day = h.day;
            day.return_pct = it->second;
            day.label = ingest::label_from_threshold(it->second, threshold);
        }
        day.headline_indices.push_back(corpus.size());
        corpus.push_back(std::move(h));
    }
    require(!by_day.empty(), "no headline falls on a day with a labeled return");

    std::vector<ingest::LabeledDay> days;
    days.reserve(by_day.size());
    for (auto& [_, day] : by_day) days.push_back(std::move(day));

    const auto top = ingest::top_categories(corpus, config.top_categories);
    auto day_filter = ingest::filter_days(days, corpus, top, config.min_day_headlines);
    require(!day_filter.kept.empty(), "no day passed the minimum-headline filter");

    std::set<std::string> kept_names;
    for (const auto& d : day_filter.kept) kept_names.insert(d.day);
    for (const auto& d : days)
        if (kept_names.count(d.day) == 0)
            drops.bump("day_below_min_headlines", d.headline_indices.size());

    // Compact the corpus to the kept days and rewrite the indices.
    std::vector<std::size_t> remap(corpus.size(), corpus.size());
    std::vector<ingest::Headline> kept_corpus;
    for (auto& day : day_filter.kept) {
        for (auto& idx : day.headline_indices) {
            if (remap[idx] == corpus.size()) {
                remap[idx] = kept_corpus.size();
                kept_corpus.push_back(std::move(corpus[idx]));
            }
            idx = remap[idx];
        }
    }

    std::vector<ingest::DayExample> examples;
    for (const auto& day : day_filter.kept) {
        auto subs = ingest::stratified_subsample(day, kept_corpus, config.day_cap, config.seed);
        examples.insert(examples.end(), std::make_move_iterator(subs.begin()),
                        std::make_move_iterator(subs.end()));
    }
    ingest::split_dataset(examples, config.train_frac, config.val_frac, config.test_frac,
                          config.seed);

    ingest::Dataset ds;
    ds.headlines = std::move(kept_corpus);
    ds.examples = std::move(examples);
    ds.threshold = threshold;
    ds.distribution = dist;
    ds.index_name = config.index_name;
    ingest::save_dataset(ds, config.out_dir);

    json report;
    report["drops"] = drops.by_rule;
    report["truncated"] = drops.truncated;
    report["days"] = {{"labeled", days.size()},
                      {"kept", day_filter.kept.size()},
                      {"dropped", day_filter.dropped},
                      {"dropped_fraction", day_filter.dropped_fraction}};
    report["headlines_kept"] = ds.headlines.size();
    report["examples"] = ds.examples.size();
    const std::string report_path = join(config.out_dir, "drop_report.json");
    {
        std::ofstream out(report_path);
        require(static_cast<bool>(out), "cannot write " + report_path);
        out << report.dump(2) << "\n";
    }

    ManifestBuilder manifest("ingest", config.dump(), config.seed);
    manifest.add_input(config.prices);
    manifest.add_input(config.headlines);
    for (const char* name : {"headlines.jsonl", "examples.jsonl", "threshold.json"})
        manifest.add_output(join(config.out_dir, name));
    manifest.add_output(report_path);
    manifest.write(config.out_dir);

    IngestSummary summary;
    summary.threshold = threshold;
    summary.class_counts = dist.counts;
    summary.days_labeled = days.size();
    summary.days_kept = day_filter.kept.size();
    summary.days_dropped = day_filter.dropped;
    summary.day_dropped_fraction = day_filter.dropped_fraction;
    summary.headlines_kept = ds.headlines.size();
    summary.examples = ds.examples.size();
    return summary;
}

TrainSummary run_train(const RunConfig& config) {
    config.validate();
    require(!config.dataset_dir.empty(), "dataset_dir is required");
    ensure_out_dir(config);

    const auto ds = ingest::load_dataset(config.dataset_dir);
    const auto store = build_store(config, ds.headlines);

    pipe::Model model(model_config_from(config, store.dim(), config.seed));
    const auto result = pipe::train(model, ds, store, train_config_from(config, config.seed));

    const pipe::Selection sel = config.select == "max-acc"
                                    ? pipe::select_max_accuracy(result.log)
                                    : pipe::select_min_loss_patience(result.log);
    const pipe::EpochStats& chosen = result.log[sel.epoch - 1];

    const std::string log_path = join(config.out_dir, "epoch_log.jsonl");
    {
        std::ofstream out(log_path);
        require(static_cast<bool>(out), "cannot write " + log_path);
        for (const auto& e : result.log) {
            json row = {{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"val_loss", e.val_loss},
                        {"val_acc", e.val_acc}};
            out << row.dump() << "\n";
        }
    }

    json selection = {{"criterion", sel.criterion},
                      {"epoch", sel.epoch},
                      {"considered", sel.considered},
                      {"val_acc", chosen.val_acc},
                      {"val_loss", chosen.val_loss}};
    const std::string selection_path = join(config.out_dir, "selection.json");
    {
        std::ofstream out(selection_path);
        require(static_cast<bool>(out), "cannot write " + selection_path);
        out << selection.dump(2) << "\n";
    }

    // Re-save the selected epoch's weights with the run recorded alongside,
    // so scoring can rebuild the same encoder without the original config.
    json run_info;
    run_info["selection"] = selection;
    run_info["encoder"] = encoder_metadata(config);
    run_info["index_name"] = ds.index_name;
    const pipe::Model selected = pipe::Model::from_checkpoint(result.epoch_checkpoints[sel.epoch - 1]);
    const std::string ck_path = join(config.out_dir, "model.nrck");
    nn::save_checkpoint(ck_path, selected.to_checkpoint(run_info.dump()));

    ManifestBuilder manifest("train", config.dump(), config.seed);
    add_dataset_inputs(manifest, config);
    manifest.add_output(ck_path);
    manifest.add_output(log_path);
    manifest.add_output(selection_path);
    manifest.write(config.out_dir);

    TrainSummary summary;
    summary.criterion = sel.criterion;
    summary.selected_epoch = sel.epoch;
    summary.epochs_considered = sel.considered;
    summary.val_acc = chosen.val_acc;
    summary.val_loss = chosen.val_loss;
    summary.checkpoint_path = ck_path;
    return summary;
}

ScoreSummary run_score(const RunConfig& config) {
    config.validate();
    require(!config.checkpoint.empty(), "checkpoint path is required");
    require(!config.dataset_dir.empty(), "dataset_dir is required");
    ensure_out_dir(config);

    const nn::Checkpoint ck = nn::load_checkpoint(config.checkpoint);
    const pipe::Model model = pipe::Model::from_checkpoint(ck);

    // Encoder settings travel with the checkpoint; config fields are the
    // fallback for checkpoints produced outside run_train.
    RunConfig encoder_config = config;
    try {
        const json meta = json::parse(ck.metadata_json);
        if (meta.contains("run") && meta["run"].contains("encoder")) {
            const json& e = meta["run"]["encoder"];
            if (e.at("mode") == "hashed") {
                encoder_config.embeddings.clear();
                encoder_config.hash_dims = e.at("dims").get<std::size_t>();
                encoder_config.hash_seed = e.at("seed").get<std::uint64_t>();
            } else {
                require(!config.embeddings.empty(),
                        "checkpoint was trained on precomputed embeddings; pass their path");
                encoder_config.embedding_dim = e.at("dims").get<std::size_t>();
            }
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("checkpoint metadata is not valid JSON: ") + e.what());
    }

    const auto ds = ingest::load_dataset(config.dataset_dir);

    // Restrict to the requested split. A day's subsets all share one split,
    // so this is a day-level selection.
    std::vector<ingest::Headline> subset;
    if (config.score_split == "all") {
        subset = ds.headlines;
    } else {
        const auto wanted = ingest::split_from_name(config.score_split);
        std::vector<bool> seen(ds.headlines.size(), false);
        for (const auto& ex : ds.examples)
            if (ex.split == wanted)
                for (std::size_t idx : ex.headline_indices) seen[idx] = true;
        for (std::size_t i = 0; i < ds.headlines.size(); ++i)
            if (seen[i]) subset.push_back(ds.headlines[i]);
    }
    require(!subset.empty(), "split '" + config.score_split + "' holds no headlines");

    const auto store = build_store(encoder_config, subset);
    const auto ranked = rank::global_rank(rank::score_all(model, subset, store));

    const std::string ranked_path = join(config.out_dir, "ranked.tsv");
    {
        std::ofstream out(ranked_path);
        require(static_cast<bool>(out), "cannot write " + ranked_path);
        out << "rank\tscore\tday\tcategory\theadline_id\ttext\n";
        for (const auto& r : ranked) {
            out << r.rank << "\t" << format_score(r.score) << "\t" << r.day << "\t"
                << enc::category_name(r.category) << "\t" << r.headline_id << "\t"
                << tsv_safe(subset[r.headline_index].text) << "\n";
        }
    }

    std::vector<std::size_t> ks;
    for (std::size_t k : config.ks) ks.push_back(std::min(k, ranked.size()));
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    const std::size_t target = enc::category_index(config.target_category);
    const auto skew = rank::skew_report(ranked, target, ks);

    json skew_json;
    skew_json["target_category"] = enc::category_name(skew.target_category);
    skew_json["base_fraction"] = skew.base_fraction;
    skew_json["total"] = skew.total;
    skew_json["rows"] = json::array();
    for (const auto& row : skew.rows)
        skew_json["rows"].push_back(
            {{"k", row.k}, {"fraction", row.fraction}, {"increase_pct", row.increase_pct}});
    const std::string skew_path = join(config.out_dir, "skew_report.json");
    {
        std::ofstream out(skew_path);
        require(static_cast<bool>(out), "cannot write " + skew_path);
        out << skew_json.dump(2) << "\n";
    }

    bool annotation_written = false;
    std::string sample_path, mapping_path;
    if (config.annotation_top > 0 && ranked.size() >= config.annotation_top) {
        const auto sample = rank::export_annotation_sample(
            ranked, subset, config.annotation_top, config.annotation_uniform, config.seed);
        sample_path = join(config.out_dir, "annotation_sample.tsv");
        mapping_path = join(config.out_dir, "annotation_mapping.tsv");
        std::ofstream rows_out(sample_path);
        std::ofstream map_out(mapping_path);
        require(static_cast<bool>(rows_out) && static_cast<bool>(map_out),
                "cannot write annotation files");
        rows_out << "blind_id\ttext\n";
        for (const auto& row : sample.rows)
            rows_out << row.blind_id << "\t" << tsv_safe(row.text) << "\n";
        map_out << "blind_id\theadline_id\tprovenance\n";
        for (const auto& row : sample.mapping)
            map_out << row.blind_id << "\t" << row.headline_id << "\t" << row.provenance << "\n";
        annotation_written = true;
    }

    ManifestBuilder manifest("score", config.dump(), config.seed);
    manifest.add_input(config.checkpoint);
    add_dataset_inputs(manifest, config);
    manifest.add_output(ranked_path);
    manifest.add_output(skew_path);
    if (annotation_written) {
        manifest.add_output(sample_path);
        manifest.add_output(mapping_path);
    }
    manifest.write(config.out_dir);

    ScoreSummary summary;
    summary.scored = ranked.size();
    summary.base_fraction = skew.base_fraction;
    summary.ranked_path = ranked_path;
    summary.annotation_written = annotation_written;
    return summary;
}

std::vector<EvalRow> run_eval(const RunConfig& config) {
    config.validate();
    require(!config.dataset_dir.empty(), "dataset_dir is required");
    ensure_out_dir(config);

    const auto ds = ingest::load_dataset(config.dataset_dir);
    const bool any_category =
        std::any_of(ds.headlines.begin(), ds.headlines.end(),
                    [](const ingest::Headline& h) { return h.has_category; });
    require(any_category, "per-category evaluation needs a category column in the headlines");

    const auto store = build_store(config, ds.headlines);

    std::vector<EvalRow> rows;
    auto eval_subset = [&](const std::string& label, const ingest::Dataset& subset) {
        EvalRow row;
        row.category = label;
        row.examples = subset.examples.size();
        std::size_t n_train = 0, n_val = 0;
        for (const auto& ex : subset.examples) {
            if (ex.split == ingest::Split::Train) ++n_train;
            if (ex.split == ingest::Split::Val) ++n_val;
        }
        if (n_train == 0 || n_val == 0) {
            row.absent = true;
            rows.push_back(row);
            return;
        }
        const std::uint64_t seed = derive_seed(config.seed, "eval:" + label);
        pipe::Model model(model_config_from(config, store.dim(), seed));
        const auto result = pipe::train(model, subset, store, train_config_from(config, seed));
        const auto sel = pipe::select_max_accuracy(result.log);
        row.max_val_acc = result.log[sel.epoch - 1].val_acc;
        row.best_epoch = sel.epoch;
        rows.push_back(row);
    };

    for (std::size_t cat = 0; cat < enc::kNumScoredCategories; ++cat) {
        ingest::Dataset subset;
        subset.headlines = ds.headlines;
        subset.threshold = ds.threshold;
        subset.distribution = ds.distribution;
        subset.index_name = ds.index_name;
        for (const auto& ex : ds.examples) {
            ingest::DayExample reduced = ex;
            reduced.headline_indices.clear();
            for (std::size_t idx : ex.headline_indices)
                if (ds.headlines[idx].category == cat) reduced.headline_indices.push_back(idx);
            if (!reduced.headline_indices.empty()) subset.examples.push_back(std::move(reduced));
        }
        eval_subset(enc::category_name(cat), subset);
    }
    eval_subset("all", ds);

    json table = json::array();
    for (const auto& row : rows) {
        json r = {{"category", row.category}, {"examples", row.examples}, {"absent", row.absent}};
        if (row.absent) {
            r["max_val_acc"] = nullptr;
            r["best_epoch"] = nullptr;
        } else {
            r["max_val_acc"] = row.max_val_acc;
            r["best_epoch"] = row.best_epoch;
        }
        table.push_back(std::move(r));
    }
    const std::string table_path = join(config.out_dir, "eval_table.json");
    {
        std::ofstream out(table_path);
        require(static_cast<bool>(out), "cannot write " + table_path);
        out << table.dump(2) << "\n";
    }

    ManifestBuilder manifest("eval", config.dump(), config.seed);
    add_dataset_inputs(manifest, config);
    manifest.add_output(table_path);
    manifest.write(config.out_dir);
    return rows;
}

AgreementResult run_agreement(const std::string& path_a, const std::string& path_b) {
    auto load_labels = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open annotation file " + path);
        std::map<std::string, std::string> labels;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
                throw InputError(path + ":" + std::to_string(line_no) +
                                 ": expected 'blind_id<TAB>label'");
            const std::string id = line.substr(0, tab);
            if (id == "blind_id") continue;  // header row
            if (!labels.emplace(id, line.substr(tab + 1)).second)
                throw InputError(path + ":" + std::to_string(line_no) + ": duplicate id " + id);
        }
        return labels;
    };

    const auto a = load_labels(path_a);
    const auto b = load_labels(path_b);
    for (const auto& [id, _] : a)
        if (b.count(id) == 0)
            throw InputError("id " + id + " appears only in " + path_a);
    for (const auto& [id, _] : b)
        if (a.count(id) == 0)
            throw InputError("id " + id + " appears only in " + path_b);

    std::vector<std::string> seq_a, seq_b;
    std::size_t matches = 0;
    for (const auto& [id, label] : a) {
        seq_a.push_back(label);
        seq_b.push_back(b.at(id));
        if (label == b.at(id)) ++matches;
    }

    AgreementResult result;
    result.kappa = rank::cohens_kappa(seq_a, seq_b);
    result.items = seq_a.size();
    result.observed_agreement =
        seq_a.empty() ? 0.0 : static_cast<double>(matches) / static_cast<double>(seq_a.size());
    return result;
}

}  // namespace newsrank::run
