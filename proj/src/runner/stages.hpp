#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "runner/config.hpp"

namespace newsrank::run {

// Each stage reads its inputs from the config, writes its artifacts plus a
// manifest.json under config.out_dir, and returns a small summary for
// callers that want the headline numbers without re-reading the files.

struct IngestSummary {
    double threshold = 0.0;
    std::array<std::size_t, 3> class_counts = {0, 0, 0};  // DOWN, STAY, UP over all returns
    std::size_t days_labeled = 0;
    std::size_t days_kept = 0;
    std::size_t days_dropped = 0;
    double day_dropped_fraction = 0.0;
    std::size_t headlines_kept = 0;
    std::size_t examples = 0;
};
IngestSummary run_ingest(const RunConfig& config);

struct TrainSummary {
    std::string criterion;
    std::size_t selected_epoch = 0;  // 1-based
    std::size_t epochs_considered = 0;
    double val_acc = 0.0;
    double val_loss = 0.0;
    std::string checkpoint_path;
};
TrainSummary run_train(const RunConfig& config);

struct ScoreSummary {
    std::size_t scored = 0;
    double base_fraction = 0.0;  // target-category share over everything scored
    std::string ranked_path;
    bool annotation_written = false;
};
ScoreSummary run_score(const RunConfig& config);

struct EvalRow {
    std::string category;
    std::size_t examples = 0;      // day examples containing the category
    bool absent = false;           // no trainable data for this category
    double max_val_acc = 0.0;
    std::size_t best_epoch = 0;
};
// One classifier per scored category plus one over all headlines combined
// (category "all"); each row reports the best validation accuracy reached.
std::vector<EvalRow> run_eval(const RunConfig& config);

struct AgreementResult {
    double kappa = 0.0;
    double observed_agreement = 0.0;
    std::size_t items = 0;
};
// Two annotation files of "blind_id TAB label" lines covering the same ids.
AgreementResult run_agreement(const std::string& path_a, const std::string& path_b);

}  // namespace newsrank::run
