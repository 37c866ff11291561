#include "categorizer/categorizer.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "nn/graph.hpp"
#include "nn/ops.hpp"

namespace newsrank::cat {

nn::Tensor category_probs(const CategoryModel& model, const nn::Tensor& vec) {
    if (vec.size() != model.dim()) {
        throw InputError("categorizer expects " + std::to_string(model.dim()) +
                         "-dim vectors, got " + std::to_string(vec.size()));
    }
    return nn::softmax(nn::dense(vec, model.weight, model.bias));
}

std::size_t category_from_probs(const nn::Tensor& probs, double threshold) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.size(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return probs[best] >= threshold ? best : enc::kUnclassified;
}

std::size_t predict_category(const CategoryModel& model, const nn::Tensor& vec) {
    return category_from_probs(category_probs(model, vec), model.threshold);
}

namespace {

double macro_f1_over_present(const std::vector<std::size_t>& truth,
                             const std::vector<std::size_t>& pred,
                             std::vector<double>& per_class) {
    per_class.assign(enc::kNumScoredCategories, 0.0);
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < enc::kNumScoredCategories; ++c) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (pred[i] == c && truth[i] == c) ++tp;
            else if (pred[i] == c) ++fp;
            else if (truth[i] == c) ++fn;
        }
        if (tp + fn == 0) continue;  // class absent from holdout
        ++present;
        const double denom = 2.0 * tp + fp + fn;
        per_class[c] = denom == 0.0 ? 0.0 : 2.0 * tp / denom;
        sum += per_class[c];
    }
    return present == 0 ? 0.0 : sum / static_cast<double>(present);
}

}  // namespace

TrainedCategorizer train_categorizer(const std::vector<LabeledVector>& examples,
                                     const CategorizerConfig& config) {
    if (examples.empty()) throw InputError("categorizer training set is empty");
    std::set<std::size_t> classes;
    for (const auto& ex : examples) {
        if (ex.category >= enc::kNumScoredCategories) {
            throw InputError("categorizer label out of range: " + std::to_string(ex.category));
        }
        if (ex.vec.size() != config.dim) {
            throw InputError("categorizer expects " + std::to_string(config.dim) +
                             "-dim vectors, got " + std::to_string(ex.vec.size()));
        }
        classes.insert(ex.category);
    }
    if (classes.size() < 2) throw InputError("categorizer needs at least two distinct classes");

    // seeded shuffle, then hold out the leading slice
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(derive_seed(config.seed, "categorizer"));
    rng.shuffle(order);
    std::size_t n_holdout = static_cast<std::size_t>(config.holdout_frac *
                                                     static_cast<double>(examples.size()));
    n_holdout = std::min(n_holdout, examples.size() - 1);
    std::vector<std::size_t> holdout(order.begin(), order.begin() + n_holdout);
    std::vector<std::size_t> train(order.begin() + n_holdout, order.end());

    TrainedCategorizer out;
    out.model.weight = nn::he_init({config.dim, enc::kNumScoredCategories}, config.dim,
                                   derive_seed(config.seed, "categorizer/weight"));
    out.model.bias = nn::Tensor::zeros({enc::kNumScoredCategories});
    out.model.threshold = config.threshold;

    nn::ParamGroup w{"weight", out.model.weight};
    nn::ParamGroup b{"bias", out.model.bias};
    std::vector<nn::ParamGroup*> params = {&w, &b};

    const std::size_t batches_per_epoch =
        (train.size() + config.batch_size - 1) / config.batch_size;
    nn::OptimizerConfig oc = config.opt;
    oc.total_steps = std::max<std::size_t>(1, config.epochs * batches_per_epoch);
    oc.warmup_steps = oc.total_steps / 10;
    nn::Optimizer optimizer(oc);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng epoch_rng(derive_seed(config.seed, "categorizer/epoch", epoch));
        epoch_rng.shuffle(train);
        for (std::size_t start = 0; start < train.size(); start += config.batch_size) {
            const std::size_t end = std::min(start + config.batch_size, train.size());
            nn::Tape tape;
            nn::Var vw = tape.param(w);
            nn::Var vb = tape.param(b);
            std::vector<nn::Var> losses;
            for (std::size_t i = start; i < end; ++i) {
                const auto& ex = examples[train[i]];
                nn::Var x = tape.constant(ex.vec);
                nn::Var probs = tape.softmax(tape.dense(x, vw, vb));
                losses.push_back(tape.cross_entropy(probs, ex.category));
            }
            for (auto* p : params) p->zero_grad();
            tape.backward(tape.mean_of(losses));
            tape.add_grads_to_params();
            optimizer.step(params);
        }
    }

    // write trained values back into the model tensors
    out.model.weight = w.value;
    out.model.bias = b.value;

    std::vector<std::size_t> truth, pred;
    for (std::size_t idx : holdout) {
        truth.push_back(examples[idx].category);
        // argmax without the threshold: F1 measures the 7-way head itself
        const nn::Tensor probs = category_probs(out.model, examples[idx].vec);
        pred.push_back(category_from_probs(probs, 0.0));
    }
    out.holdout_size = n_holdout;
    out.macro_f1 = macro_f1_over_present(truth, pred, out.per_class_f1);
    return out;
}

std::vector<std::pair<std::size_t, std::string>> load_labeled_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open labeled category file: " + path);
    std::vector<std::pair<std::size_t, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected 'class<TAB>text'");
        }
        const std::string label = line.substr(0, tab);
        const auto idx = enc::try_category_index(label);
        if (!idx || *idx >= enc::kNumScoredCategories) {
            throw InputError(path + ":" + std::to_string(line_no) + ": unknown class '" + label +
                             "'");
        }
        out.emplace_back(*idx, line.substr(tab + 1));
    }
    return out;
}

}  // namespace newsrank::cat
