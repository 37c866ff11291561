#include "pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nn/graph.hpp"
#include "nn/ops.hpp"

namespace newsrank::pipe {

namespace {

std::vector<std::size_t> split_indices(const ingest::Dataset& ds, ingest::Split split) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        if (ds.examples[i].split == split) out.push_back(i);
    }
    return out;
}

}  // namespace

EvalStats evaluate(const Model& model, const ingest::Dataset& ds,
                   const enc::EmbeddingStore& store, ingest::Split split) {
    EvalStats stats;
    for (std::size_t idx : split_indices(ds, split)) {
        const auto& ex = ds.examples[idx];
        const DayInput day = make_day_input(ds, ex, store);
        const Model::DayOutput out = model.forward_day(day);
        stats.loss += nn::cross_entropy(out.probs, static_cast<std::size_t>(ex.label));
        std::size_t argmax = 0;
        for (std::size_t c = 1; c < out.probs.size(); ++c) {
            if (out.probs[c] > out.probs[argmax]) argmax = c;
        }
        if (argmax == static_cast<std::size_t>(ex.label)) stats.accuracy += 1.0;
        stats.examples++;
    }
    if (stats.examples > 0) {
        stats.loss /= static_cast<double>(stats.examples);
        stats.accuracy /= static_cast<double>(stats.examples);
    }
    return stats;
}

TrainResult train(Model& model, const ingest::Dataset& ds, const enc::EmbeddingStore& store,
                  const TrainConfig& config) {
    if (config.epochs == 0) throw InputError("training needs at least one epoch");
    if (config.batch_size == 0) throw InputError("batch size must be positive");

    std::vector<std::size_t> train_idx = split_indices(ds, ingest::Split::Train);
    if (train_idx.empty()) throw InputError("train split is empty");
    if (split_indices(ds, ingest::Split::Val).empty()) throw InputError("val split is empty");

    const std::size_t batches_per_epoch =
        (train_idx.size() + config.batch_size - 1) / config.batch_size;
    nn::OptimizerConfig oc = config.opt;
    oc.total_steps = std::max<std::size_t>(1, config.epochs * batches_per_epoch);
    oc.warmup_steps = static_cast<std::size_t>(config.warmup_frac *
                                               static_cast<double>(oc.total_steps));
    nn::Optimizer optimizer(oc);

    auto params = model.params();
    const std::size_t threads = std::max<std::size_t>(1, config.threads);

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng order_rng(derive_seed(config.seed, "epoch-order", epoch));
        order_rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, train_idx.size());
            const std::size_t batch_n = end - start;
            const double inv_batch = 1.0 / static_cast<double>(batch_n);

            // per-example tapes; workers fill fixed slots so the reduction
            // below runs in batch order regardless of thread count
            std::vector<nn::Tape> tapes(batch_n);
            std::vector<double> losses(batch_n, 0.0);
            auto run_range = [&](std::size_t lo, std::size_t hi) {
                for (std::size_t pos = lo; pos < hi; ++pos) {
                    const std::size_t dataset_idx = train_idx[start + pos];
                    const auto& ex = ds.examples[dataset_idx];
                    const DayInput day = make_day_input(ds, ex, store);
                    Rng dropout_rng(
                        derive_seed(derive_seed(config.seed, "dropout", epoch), dataset_idx));
                    nn::Var loss = model.record_loss(tapes[pos], day, true, &dropout_rng);
                    losses[pos] = tapes[pos].value(loss)[0];
                    tapes[pos].backward(tapes[pos].scale(loss, inv_batch));
                }
            };
            if (threads == 1 || batch_n == 1) {
                run_range(0, batch_n);
            } else {
                std::vector<std::thread> pool;
                const std::size_t chunk = (batch_n + threads - 1) / threads;
                for (std::size_t t = 0; t < threads && t * chunk < batch_n; ++t) {
                    pool.emplace_back(run_range, t * chunk,
                                      std::min((t + 1) * chunk, batch_n));
                }
                for (auto& th : pool) th.join();
            }

            for (std::size_t pos = 0; pos < batch_n; ++pos) {
                if (!std::isfinite(losses[pos])) {
                    throw TrainError("loss diverged at epoch " + std::to_string(epoch + 1) +
                                     ", example " + std::to_string(train_idx[start + pos]));
                }
                epoch_loss += losses[pos];
            }
            for (auto* p : params) p->zero_grad();
            for (std::size_t pos = 0; pos < batch_n; ++pos) tapes[pos].add_grads_to_params();
            optimizer.step(params);
        }

        EpochStats stats;
        stats.epoch = epoch + 1;
        stats.train_loss = epoch_loss / static_cast<double>(train_idx.size());
        const EvalStats val = evaluate(model, ds, store, ingest::Split::Val);
        stats.val_loss = val.loss;
        stats.val_acc = val.accuracy;
        result.log.push_back(stats);
        result.epoch_checkpoints.push_back(model.to_checkpoint());
    }
    return result;
}

Selection select_max_accuracy(const std::vector<EpochStats>& log, std::size_t max_epochs) {
    if (log.empty()) throw InputError("selection needs at least one epoch");
    const std::size_t considered = std::min(log.size(), max_epochs);
    std::size_t best = 0;
    for (std::size_t i = 1; i < considered; ++i) {
        if (log[i].val_acc > log[best].val_acc) best = i;  // strict: ties keep the earliest
    }
    return {log[best].epoch, considered, "max_accuracy"};
}

Selection select_min_loss_patience(const std::vector<EpochStats>& log, std::size_t patience) {
    if (log.empty()) throw InputError("selection needs at least one epoch");
    std::size_t best = 0;
    std::size_t since_best = 0;
    std::size_t considered = log.size();
    for (std::size_t i = 1; i < log.size(); ++i) {
        if (log[i].val_loss < log[best].val_loss) {
            best = i;
            since_best = 0;
        } else if (++since_best >= patience) {
            considered = i + 1;
            break;
        }
    }
    return {log[best].epoch, considered, "min_loss_patience"};
}

}  // namespace newsrank::pipe
