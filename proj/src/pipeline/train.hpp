#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "encoder/embedding_store.hpp"
#include "ingest/dataset.hpp"
#include "nn/checkpoint.hpp"
#include "nn/optimizer.hpp"
#include "pipeline/model.hpp"

namespace newsrank::pipe {

struct TrainConfig {
    std::size_t epochs = 20;
    std::size_t batch_size = 15;  // day examples per optimizer step
    std::size_t threads = 1;      // parallel per-example tapes; reduction order is fixed
    double warmup_frac = 0.1;
    nn::OptimizerConfig opt;      // warmup/total steps derived from the schedule above
    std::uint64_t seed = 0;
};

struct EpochStats {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> log;
    std::vector<nn::Checkpoint> epoch_checkpoints;  // parallel to log
};

// Minibatch training over the dataset's train split with a per-epoch
// validation pass. Deterministic given the seed, including under threads>1.
// Non-finite loss aborts with a diagnostic.
TrainResult train(Model& model, const ingest::Dataset& ds, const enc::EmbeddingStore& store,
                  const TrainConfig& config);

// Validation metrics of `model` over one split.
struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0;
    std::size_t examples = 0;
};
EvalStats evaluate(const Model& model, const ingest::Dataset& ds,
                   const enc::EmbeddingStore& store, ingest::Split split);

struct Selection {
    std::size_t epoch = 0;          // 1-based chosen epoch
    std::size_t considered = 0;     // epochs examined before the rule stopped
    std::string criterion;
};

// Highest validation accuracy within the first max_epochs; ties go to the
// earliest epoch.
Selection select_max_accuracy(const std::vector<EpochStats>& log, std::size_t max_epochs = 20);

// Walk epochs in order, stop after `patience` consecutive epochs without a
// new best validation loss; return the best epoch seen up to the stop.
Selection select_min_loss_patience(const std::vector<EpochStats>& log, std::size_t patience = 2);

}  // namespace newsrank::pipe
