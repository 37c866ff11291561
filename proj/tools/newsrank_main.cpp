// Command-line front end. Everything is driven through the public C
// interface in newsrank.h, so this file doubles as a usage example for
// embedding the shared library.
//
// Exit codes: 0 success, 2 invalid input or configuration, 3 runtime or
// training failure.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "newsrank.h"

namespace {

struct ConfigHandle {
    nr_config* c = nr_config_create();
    ~ConfigHandle() { nr_config_free(c); }
};

int exit_code_for(nr_status rc) { return rc == NR_INVALID_INPUT ? 2 : 3; }

int fail(nr_status rc) {
    std::cerr << "newsrank: " << nr_last_error() << "\n";
    return exit_code_for(rc);
}

// Options land here in a fixed precedence: defaults, then NEWSRANK_THREADS,
// then --config file, then flags, then --set pairs.
struct Staged {
    std::string config_file;
    std::vector<std::pair<std::string, std::string>> sets;
    std::vector<std::string> raw_sets;  // "key=value" from --set

    int apply(nr_config* c) const {
        if (const char* threads = std::getenv("NEWSRANK_THREADS");
            threads != nullptr && *threads != '\0') {
            if (nr_status rc = nr_config_set(c, "threads", threads); rc != NR_OK)
                return fail(rc);
        }
        if (!config_file.empty()) {
            if (nr_status rc = nr_config_load_file(c, config_file.c_str()); rc != NR_OK)
                return fail(rc);
        }
        for (const auto& [key, value] : sets) {
            if (nr_status rc = nr_config_set(c, key.c_str(), value.c_str()); rc != NR_OK)
                return fail(rc);
        }
        for (const auto& pair : raw_sets) {
            const auto eq = pair.find('=');
            if (eq == std::string::npos) {
                std::cerr << "newsrank: --set expects key=value, got '" << pair << "'\n";
                return 2;
            }
            if (nr_status rc =
                    nr_config_set(c, pair.substr(0, eq).c_str(), pair.substr(eq + 1).c_str());
                rc != NR_OK)
                return fail(rc);
        }
        return 0;
    }
};

// Binds a flag to a config key; the value is staged only when the user
// passes the flag, so file values survive unless overridden.
void bind(CLI::App* sub, Staged& staged, const std::string& flag, const std::string& key,
          const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&staged, key](const std::string& v) { staged.sets.emplace_back(key, v); }, help);
}

void add_common(CLI::App* sub, Staged& staged) {
    sub->add_option("--config", staged.config_file, "JSON config file applied before flags");
    sub->add_option("--set", staged.raw_sets, "override any config key (key=value)")
        ->take_all();
    bind(sub, staged, "--seed", "seed", "seed for every derived random stream");
    bind(sub, staged, "--out-dir", "out_dir", "directory for artifacts and the manifest");
    bind(sub, staged, "--threads", "threads", "worker threads for training");
}

void add_encoder_options(CLI::App* sub, Staged& staged) {
    auto* emb = sub->add_option_function<std::string>(
        "--embeddings",
        [&staged](const std::string& v) { staged.sets.emplace_back("embeddings", v); },
        "precomputed embeddings file (id TAB values); omit to hash-encode");
    auto* hash = sub->add_flag("--hash-encoder", "encode headlines with the built-in hasher");
    bind(sub, staged, "--hash-dims", "hash_dims", "hashed encoder width");
    bind(sub, staged, "--embedding-dim", "embedding_dim", "width of the embeddings file");
    emb->excludes(hash);
    hash->excludes(emb);
}

int run_stage(const Staged& staged, nr_status (*stage)(const nr_config*, char**)) {
    ConfigHandle config;
    if (config.c == nullptr) {
        std::cerr << "newsrank: out of memory\n";
        return 3;
    }
    if (int rc = staged.apply(config.c); rc != 0) return rc;
    char* summary = nullptr;
    if (nr_status rc = stage(config.c, &summary); rc != NR_OK) return fail(rc);
    std::cout << summary << "\n";
    nr_string_free(summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"market-movement prediction from daily news headlines, and a global\n"
                 "headline relevance ranking recovered from the trained attention weights"};
    app.require_subcommand(1);
    app.set_version_flag("--version", nr_version());
    int exit_code = 0;

    Staged ingest_staged;
    auto* ingest = app.add_subcommand(
        "ingest", "label trading days from prices and build the headline dataset");
    add_common(ingest, ingest_staged);
    bind(ingest, ingest_staged, "--prices", "prices", "delimited price file (date, open)");
    bind(ingest, ingest_staged, "--headlines", "headlines", "headline JSONL file");
    bind(ingest, ingest_staged, "--index-name", "index_name", "name recorded for the index");
    auto* thr = ingest->add_option_function<std::string>(
        "--threshold",
        [&ingest_staged](const std::string& v) {
            ingest_staged.sets.emplace_back("threshold", v);
        },
        "fixed movement threshold in percent");
    auto* grid = ingest->add_option_function<std::string>(
        "--search-grid",
        [&ingest_staged](const std::string& v) {
            ingest_staged.sets.emplace_back("grid", "[" + v + "]");
        },
        "comma-separated thresholds to search (default 0.1..1.0)");
    thr->excludes(grid);
    grid->excludes(thr);
    bind(ingest, ingest_staged, "--day-cap", "day_cap", "max headlines per day example");
    bind(ingest, ingest_staged, "--min-day-headlines", "min_day_headlines",
         "min top-category headlines for a day to survive");
    ingest->callback([&] { exit_code = run_stage(ingest_staged, nr_run_ingest); });

    Staged train_staged;
    auto* train = app.add_subcommand("train", "train the movement classifier on a dataset");
    add_common(train, train_staged);
    add_encoder_options(train, train_staged);
    bind(train, train_staged, "--dataset", "dataset_dir", "dataset directory from ingest");
    bind(train, train_staged, "--epochs", "epochs", "training epochs");
    bind(train, train_staged, "--batch-size", "batch_size", "day examples per optimizer step");
    train
        ->add_option_function<std::string>(
            "--select",
            [&train_staged](const std::string& v) {
                train_staged.sets.emplace_back("select", v);
            },
            "checkpoint selection rule")
        ->check(CLI::IsMember({"max-acc", "min-loss"}));
    train->callback([&] { exit_code = run_stage(train_staged, nr_run_train); });

    Staged score_staged;
    auto* score = app.add_subcommand(
        "score", "rank headlines globally by attention logit and report skew");
    add_common(score, score_staged);
    add_encoder_options(score, score_staged);
    bind(score, score_staged, "--checkpoint", "checkpoint", "trained model checkpoint");
    bind(score, score_staged, "--dataset", "dataset_dir", "dataset directory from ingest");
    bind(score, score_staged, "--split", "score_split",
         "which split to score: train, val, test, all");
    bind(score, score_staged, "--target-category", "target_category",
         "category whose concentration the skew report tracks");
    bind(score, score_staged, "--ks", "ks", "JSON list of ranking cutoffs");
    bind(score, score_staged, "--annotation-top", "annotation_top",
         "top-ranked rows in the blind annotation sample (0 disables)");
    bind(score, score_staged, "--annotation-uniform", "annotation_uniform",
         "uniformly drawn rows in the blind annotation sample");
    score->callback([&] { exit_code = run_stage(score_staged, nr_run_score); });

    Staged eval_staged;
    auto* eval = app.add_subcommand(
        "eval", "train one model per category plus all combined; report accuracy");
    add_common(eval, eval_staged);
    add_encoder_options(eval, eval_staged);
    bind(eval, eval_staged, "--dataset", "dataset_dir", "dataset directory from ingest");
    bind(eval, eval_staged, "--epochs", "epochs", "training epochs per model");
    eval->callback([&] { exit_code = run_stage(eval_staged, nr_run_eval); });

    auto* agreement = app.add_subcommand(
        "agreement", "Cohen's kappa between two blind annotation label files");
    std::string labels_a, labels_b;
    agreement->add_option("--labels-a", labels_a, "first rater's blind_id TAB label file")
        ->required();
    agreement->add_option("--labels-b", labels_b, "second rater's blind_id TAB label file")
        ->required();
    agreement->callback([&] {
        char* out = nullptr;
        if (nr_status rc = nr_run_agreement(labels_a.c_str(), labels_b.c_str(), &out);
            rc != NR_OK) {
            exit_code = fail(rc);
            return;
        }
        std::cout << out << "\n";
        nr_string_free(out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // help/version exit clean, bad usage is input error
    }
    return exit_code;
}
