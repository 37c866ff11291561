// Release acceptance suite. Each numbered check prints exactly one PASS/FAIL
// line with its measured numbers; the process exits nonzero if any check
// fails. Check 9 drives the command-line binary end to end, so its path must
// arrive as argv[1].
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "encoder/categories.hpp"
#include "encoder/embedding_store.hpp"
#include "encoder/hash_encoder.hpp"
#include "gradcheck.hpp"
#include "ingest/dataset.hpp"
#include "ingest/labeling.hpp"
#include "json.hpp"
#include "nn/graph.hpp"
#include "nn/ops.hpp"
#include "nn/tensor.hpp"
#include "pipeline/model.hpp"
#include "pipeline/train.hpp"
#include "ranker/ranker.hpp"

using namespace newsrank;
using newsrank::testing::finite_diff_check;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    va_list args;
    va_start(args, pattern);
    char buf[512];
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return buf;
}

struct Check {
    int number = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

nn::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double scale = 1.0) {
    nn::Tensor t(std::move(shape));
    Rng rng(seed);
    for (auto& v : t.values()) v = scale * rng.gaussian();
    return t;
}

double sum_all_value(const nn::Tensor& t) {
    double s = 0.0;
    for (double v : t.values()) s += v;
    return s;
}

pipe::ModelConfig small_model_config(std::size_t headline_dim, std::size_t hidden,
                                     std::uint64_t seed) {
    pipe::ModelConfig config;
    config.headline_dim = headline_dim;
    config.category_dim = 4;
    config.hidden_dim = hidden;
    config.seed = seed;
    return config;
}

pipe::DayInput random_day(std::size_t n, std::size_t dim, std::uint64_t seed) {
    pipe::DayInput day;
    day.vectors = random_tensor({n, dim}, seed);
    day.categories.assign(n, 0);
    Rng rng(seed + 1);
    for (auto& c : day.categories) c = rng.below(enc::kNumCategories);
    day.mask.assign(n, true);
    day.label = ingest::Movement::Stay;
    return day;
}

// ---------------------------------------------------------------------------
// 1. Analytic gradients vs central finite differences, per layer and for the
//    whole network on a three-headline day.
// ---------------------------------------------------------------------------

Check check_gradient_oracle() {
    const auto start = Clock::now();
    double worst = 0.0;
    std::size_t checked = 0;
    auto absorb = [&](const testing::GradCheckResult& r) {
        worst = std::max(worst, r.max_rel_err);
        checked += r.checked;
    };

    {  // dense + elu
        nn::ParamGroup w("w", random_tensor({6, 4}, 41, 0.5));
        nn::ParamGroup b("b", random_tensor({4}, 42, 0.5));
        nn::Tensor x = random_tensor({3, 6}, 43);
        absorb(finite_diff_check(
            {&w, &b}, [&] { return sum_all_value(nn::elu(nn::dense(x, w.value, b.value))); },
            [&] {
                nn::Tape t;
                nn::Var l = t.sum_all(t.elu(t.dense(t.constant(x), t.param(w), t.param(b))));
                t.backward(l);
                t.add_grads_to_params();
            }));
    }
    {  // tanh
        nn::ParamGroup w("w", random_tensor({5}, 44, 0.7));
        absorb(finite_diff_check(
            {&w}, [&] { return sum_all_value(nn::tanh_op(w.value)); },
            [&] {
                nn::Tape t;
                nn::Var l = t.sum_all(t.tanh(t.param(w)));
                t.backward(l);
                t.add_grads_to_params();
            }));
    }
    {  // layer norm (through tanh so the grads are nontrivial)
        nn::ParamGroup gain("gain", random_tensor({7}, 45, 0.3));
        nn::ParamGroup bias("bias", random_tensor({7}, 46, 0.3));
        nn::ParamGroup x("x", random_tensor({4, 7}, 47));
        absorb(finite_diff_check(
            {&x, &gain, &bias},
            [&] {
                return sum_all_value(
                    nn::tanh_op(nn::layer_norm(x.value, gain.value, bias.value, 1e-5)));
            },
            [&] {
                nn::Tape t;
                nn::Var l = t.sum_all(
                    t.tanh(t.layer_norm(t.param(x), t.param(gain), t.param(bias), 1e-5)));
                t.backward(l);
                t.add_grads_to_params();
            }));
    }
    {  // softmax + cross entropy
        nn::ParamGroup logits("logits", random_tensor({5}, 48));
        absorb(finite_diff_check(
            {&logits}, [&] { return nn::cross_entropy(nn::softmax(logits.value), 2); },
            [&] {
                nn::Tape t;
                nn::Var l = t.cross_entropy(t.softmax(t.param(logits)), 2);
                t.backward(l);
                t.add_grads_to_params();
            }));
    }
    {  // embedding gather + column concat
        nn::ParamGroup table("table", random_tensor({4, 3}, 49));
        nn::Tensor left = random_tensor({2, 5}, 50);
        const std::vector<std::size_t> ids = {3, 1};
        absorb(finite_diff_check(
            {&table},
            [&] {
                double s = 0.0;
                for (std::size_t i = 0; i < 2; ++i) {
                    for (std::size_t j = 0; j < 5; ++j) s += std::tanh(left.at(i, j));
                    for (std::size_t j = 0; j < 3; ++j)
                        s += std::tanh(table.value.at(ids[i], j));
                }
                return s;
            },
            [&] {
                nn::Tape t;
                nn::Var cat = t.concat_cols(t.constant(left), t.gather_rows(t.param(table), ids));
                nn::Var l = t.sum_all(t.tanh(cat));
                t.backward(l);
                t.add_grads_to_params();
            }));
    }
    {  // whole network, three-headline day
        pipe::Model model(small_model_config(6, 5, 29));
        pipe::DayInput day = random_day(3, 6, 61);
        auto params = model.params();
        absorb(finite_diff_check(
            params,
            [&] {
                nn::Tape tape;
                return tape.value(model.record_loss(tape, day, false, nullptr))[0];
            },
            [&] {
                nn::Tape tape;
                nn::Var loss = model.record_loss(tape, day, false, nullptr);
                tape.backward(loss);
                tape.add_grads_to_params();
            }));
    }

    const double elapsed = seconds_since(start);
    Check c{1, "gradient-oracle", worst < 1e-4 && elapsed < 60.0,
            fmt("max rel err %.2e over %zu partials in %.1fs (need < 1e-4, < 60s)", worst,
                checked, elapsed)};
    return c;
}

// ---------------------------------------------------------------------------
// 2. Attention contract: alphas sum to one, masked rows get exactly zero
//    alpha and zero gradient, prediction ignores headline order.
// ---------------------------------------------------------------------------

Check check_attention_contract() {
    pipe::Model model(small_model_config(8, 6, 17));
    pipe::DayInput day = random_day(7, 8, 41);
    day.mask[2] = false;  // one masked slot participates in every sub-check

    const auto out = model.forward_day(day);
    double alpha_sum = 0.0;
    for (double a : out.alphas) alpha_sum += a;
    const double sum_dev = std::fabs(alpha_sum - 1.0);
    const bool masked_zero = out.alphas[2] == 0.0 &&
                             out.logits[2] == -std::numeric_limits<double>::infinity();

    // Garbage rows behind the mask must leave every parameter gradient
    // bit-for-bit unchanged.
    pipe::DayInput padded = day;
    padded.vectors = nn::Tensor::zeros({9, 8});
    for (std::size_t i = 0; i < 7 * 8; ++i) padded.vectors.values()[i] = day.vectors.values()[i];
    padded.vectors.values()[7 * 8 + 3] = 1e9;
    padded.vectors.values()[8 * 8 + 5] = -77.0;
    padded.categories.push_back(1);
    padded.categories.push_back(3);
    padded.mask.push_back(false);
    padded.mask.push_back(false);
    auto grads_for = [&](const pipe::DayInput& input) {
        for (auto* p : model.params()) p->zero_grad();
        nn::Tape tape;
        nn::Var loss = model.record_loss(tape, input, false, nullptr);
        tape.backward(loss);
        tape.add_grads_to_params();
        std::vector<double> flat;
        for (auto* p : model.params())
            flat.insert(flat.end(), p->grad.values().begin(), p->grad.values().end());
        return flat;
    };
    const bool masked_grad_free = grads_for(day) == grads_for(padded);

    // Rotate the rows; class probabilities must not move beyond 1e-9.
    pipe::DayInput rotated;
    rotated.vectors = nn::Tensor::zeros({7, 8});
    rotated.categories.resize(7);
    rotated.mask.assign(7, true);
    rotated.label = day.label;
    for (std::size_t i = 0; i < 7; ++i) {
        const std::size_t src = (i + 3) % 7;
        for (std::size_t c = 0; c < 8; ++c) rotated.vectors.at(i, c) = day.vectors.at(src, c);
        rotated.categories[i] = day.categories[src];
        rotated.mask[i] = day.mask[src];
    }
    const auto out_rot = model.forward_day(rotated);
    double perm_dev = 0.0;
    for (std::size_t i = 0; i < out.probs.size(); ++i)
        perm_dev = std::max(perm_dev, std::fabs(out_rot.probs[i] - out.probs[i]));
    for (std::size_t i = 0; i < 7; ++i)
        perm_dev = std::max(perm_dev, std::fabs(out_rot.alphas[i] - out.alphas[(i + 3) % 7]));

    const bool pass = sum_dev <= 1e-12 && masked_zero && masked_grad_free && perm_dev <= 1e-9;
    return {2, "attention-contract", pass,
            fmt("alpha sum dev %.1e (<= 1e-12), masked alpha %s, masked grads %s, "
                "permutation dev %.1e (<= 1e-9)",
                sum_dev, masked_zero ? "exact 0" : "NONZERO",
                masked_grad_free ? "bit-identical" : "DIFFER", perm_dev)};
}

// ---------------------------------------------------------------------------
// 3/4. Planted-signal corpus: 2000 days x 30 hashed headlines, 15% of them
//      carrying class-revealing tokens. Trained on true labels the ranking
//      must surface them; trained on shuffled labels it must not.
// ---------------------------------------------------------------------------

struct PlantedCorpus {
    ingest::Dataset ds;
    enc::EmbeddingStore store{512, enc::EmbeddingStore::Provenance::hashed};
    std::set<std::string> signal_ids;
};

PlantedCorpus build_planted_corpus(std::size_t n_days, std::size_t per_day, std::uint64_t seed,
                                   bool shuffle_labels) {
    PlantedCorpus c;
    Rng label_rng(derive_seed(seed, "labels"));
    Rng noise_rng(derive_seed(seed, "noise"));
    // 16 interchangeable signal tokens per class: any one of them pins the
    // label, but no single hash direction is shared by a whole class.
    const std::array<std::string, 3> sig_stem = {"dn", "st", "up"};

    std::vector<ingest::Movement> labels(n_days);
    for (std::size_t d = 0; d < n_days; ++d)
        labels[d] = static_cast<ingest::Movement>(d % 3);
    label_rng.shuffle(labels);
    std::vector<ingest::Movement> assigned = labels;
    if (shuffle_labels) Rng(derive_seed(seed, "null-shuffle")).shuffle(assigned);

    for (std::size_t d = 0; d < n_days; ++d) {
        ingest::DayExample ex;
        char day[32];
        std::snprintf(day, sizeof(day), "d%04zu", d);
        ex.day = day;
        ex.label = assigned[d];
        const std::size_t n_signal = 4 + (d % 2);  // alternating 4/5 = 15% overall
        for (std::size_t j = 0; j < per_day; ++j) {
            ingest::Headline h;
            const bool is_signal = j < n_signal;
            h.id = (is_signal ? "s" : "n") + std::to_string(d) + "_" + std::to_string(j);
            h.day = ex.day;
            // Same 7-token backbone for everyone; signal headlines replace
            // three random slots with class tokens. Noise vocabulary sized so
            // signal and noise tokens have comparable corpus frequency —
            // otherwise frequency alone separates them in the ranking.
            for (int t = 0; t < 7; ++t)
                h.tokens.push_back("nw" + std::to_string(noise_rng.below(700)));
            if (is_signal) {
                const auto& stem = sig_stem[static_cast<std::size_t>(labels[d])];
                std::vector<std::size_t> slots = {0, 1, 2, 3, 4, 5, 6};
                noise_rng.shuffle(slots);
                for (int t = 0; t < 3; ++t)
                    h.tokens[slots[t]] = "sig" + stem + std::to_string(noise_rng.below(16));
                c.signal_ids.insert(h.id);
            }
            // Uniform category: the trainable category embedding must not
            // leak the signal/noise dichotomy into the ranking.
            h.category = enc::kUnclassified;
            h.has_category = false;
            h.text = h.id;
            ex.headline_indices.push_back(c.ds.headlines.size());
            c.store.add(h.id, enc::hash_encode(h.tokens, 512, 0).values());
            c.ds.headlines.push_back(std::move(h));
        }
        c.ds.examples.push_back(std::move(ex));
    }
    ingest::split_dataset(c.ds.examples, 0.8, 0.1, 0.1, seed);
    return c;
}

struct PlantedOutcome {
    double best_acc = 0.0;
    std::size_t best_epoch = 0;
    std::size_t top100_signal = 0;
    double elapsed = 0.0;
};

PlantedOutcome run_planted_experiment(bool shuffle_labels) {
    const auto start = Clock::now();
    PlantedCorpus c = build_planted_corpus(2000, 30, 42, shuffle_labels);

    pipe::ModelConfig mc;
    mc.headline_dim = 512;
    mc.category_dim = 30;
    mc.hidden_dim = 100;
    mc.day_cap = 115;
    mc.dropout_rate = 0.25;
    mc.seed = 42;
    pipe::Model model(mc);

    pipe::TrainConfig tc;
    tc.epochs = 12;
    tc.batch_size = 15;
    tc.threads = 1;
    tc.seed = 42;
    const auto result = pipe::train(model, c.ds, c.store, tc);

    const auto sel = pipe::select_max_accuracy(result.log);
    const auto best = pipe::Model::from_checkpoint(result.epoch_checkpoints[sel.epoch - 1]);
    const auto ranked = rank::global_rank(rank::score_all(best, c.ds.headlines, c.store));

    PlantedOutcome out;
    out.best_epoch = sel.epoch;
    out.best_acc = result.log[sel.epoch - 1].val_acc;
    for (std::size_t i = 0; i < 100 && i < ranked.size(); ++i)
        if (c.signal_ids.count(ranked[i].headline_id) != 0) ++out.top100_signal;
    out.elapsed = seconds_since(start);
    return out;
}

Check check_planted_signal() {
    const PlantedOutcome out = run_planted_experiment(false);
    const double frac = static_cast<double>(out.top100_signal) / 100.0;
    const double skew_pct = (frac / 0.15 - 1.0) * 100.0;
    const bool pass = out.best_acc >= 0.90 && out.top100_signal >= 90 && skew_pct >= 500.0 &&
                      out.elapsed < 600.0;
    return {3, "planted-signal-ranking", pass,
            fmt("val acc %.4f @ epoch %zu (>= 0.90), top-100 signal %zu/100 (>= 90, skew "
                "%+.0f%% >= +500%%), %.0fs (< 600s)",
                out.best_acc, out.best_epoch, out.top100_signal, skew_pct, out.elapsed)};
}

Check check_shuffled_label_control() {
    const PlantedOutcome out = run_planted_experiment(true);
    const double frac = static_cast<double>(out.top100_signal) / 100.0;
    const bool acc_ok = out.best_acc >= 0.28 && out.best_acc <= 0.38;
    const bool frac_ok = std::fabs(frac - 0.15) <= 0.10;
    return {4, "shuffled-label-control", acc_ok && frac_ok,
            fmt("val acc %.4f (within 0.33 +/- 0.05), top-100 signal %.2f (within 0.15 +/- "
                "0.10), %.0fs",
                out.best_acc, frac, out.elapsed)};
}

// ---------------------------------------------------------------------------
// 5. Threshold search equals brute-force gap minimization on 1000 random
//    return series.
// ---------------------------------------------------------------------------

Check check_threshold_search_oracle() {
    const auto start = Clock::now();
    const std::vector<double> grid = ingest::default_threshold_grid();
    Rng rng(99);
    std::size_t mismatches = 0;
    for (std::size_t s = 0; s < 1000; ++s) {
        const double scale = 0.05 + 1.2 * rng.uniform();
        const double shift = 0.4 * (rng.uniform() - 0.5);
        std::vector<double> returns(500);
        for (auto& r : returns) r = shift + scale * rng.gaussian();

        // Brute force: walk the ascending grid, keep the first minimum gap.
        double best_t = 0.0;
        std::size_t best_gap = std::numeric_limits<std::size_t>::max();
        ingest::ClassDistribution best_dist;
        for (double t : grid) {
            const auto dist = ingest::class_distribution(returns, t);
            if (dist.gap() < best_gap) {
                best_gap = dist.gap();
                best_t = t;
                best_dist = dist;
            }
        }

        const auto got = ingest::threshold_search(returns, grid);
        if (got.best_threshold != best_t || got.distribution.counts != best_dist.counts)
            ++mismatches;
    }
    const double elapsed = seconds_since(start);
    return {5, "threshold-search-oracle", mismatches == 0 && elapsed < 10.0,
            fmt("%zu/1000 series mismatched brute force in %.1fs (need 0, < 10s)", mismatches,
                elapsed)};
}

// ---------------------------------------------------------------------------
// 6. On returns constructed to match the published S&P 500 class balance, the
//    search must settle on t=0.3 with the published percentages.
// ---------------------------------------------------------------------------

// Acklam's rational approximation to the standard normal inverse CDF,
// |relative error| < 1.15e-9 — far below the tolerances in play here.
double inverse_normal_cdf(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

Check check_balanced_threshold_calibration() {
    // Normal(mu, sigma) solved so that P(r < -0.3) = 0.3091 and
    // P(r <= 0.3) = 0.6452; quantile sampling realizes those shares exactly.
    const std::size_t n = 3776;
    const double mu = 0.0434;
    const double sigma = 0.6888;
    std::vector<double> returns(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        returns[i] = mu + sigma * inverse_normal_cdf(q);
    }

    const auto got = ingest::threshold_search(returns, ingest::default_threshold_grid());
    const double down = got.distribution.pct(ingest::Movement::Down);
    const double stay = got.distribution.pct(ingest::Movement::Stay);
    const double up = got.distribution.pct(ingest::Movement::Up);
    const bool t_ok = std::fabs(got.best_threshold - 0.3) < 1e-12;
    const bool pct_ok = std::fabs(down - 30.91) <= 0.5 && std::fabs(stay - 33.61) <= 0.5 &&
                        std::fabs(up - 35.48) <= 0.5;
    return {6, "balanced-threshold-calibration", t_ok && pct_ok,
            fmt("picked t=%.1f (need 0.3); DOWN %.2f / STAY %.2f / UP %.2f vs 30.91/33.61/35.48 "
                "(+/- 0.5)",
                got.best_threshold, down, stay, up)};
}

// ---------------------------------------------------------------------------
// 7. A headline's relevance logit is a global property: identical bits in
//    any day context and through every scoring path.
// ---------------------------------------------------------------------------

Check check_score_globality() {
    pipe::Model model(small_model_config(8, 6, 19));

    // Path one: each headline inside a crowded day vs alone in its own day.
    pipe::DayInput big = random_day(5, 8, 51);
    const auto out_big = model.forward_day(big);
    bool bitwise = true;
    for (std::size_t i = 0; i < 5; ++i) {
        pipe::DayInput solo;
        solo.vectors = nn::Tensor::zeros({1, 8});
        for (std::size_t cc = 0; cc < 8; ++cc) solo.vectors.at(0, cc) = big.vectors.at(i, cc);
        solo.categories = {big.categories[i]};
        solo.mask = {true};
        const auto out_solo = model.forward_day(solo);
        if (out_solo.logits[0] != out_big.logits[i]) bitwise = false;
        const double direct = model.score_headline(big.vectors.data() + i * 8, big.categories[i]);
        if (direct != out_big.logits[i]) bitwise = false;
    }

    // Path two: the same twelve headlines regrouped into different days and
    // orders still score to the same bits through the bulk scorer.
    enc::EmbeddingStore store(8);
    std::vector<ingest::Headline> grouping_a;
    Rng rng(77);
    for (int i = 0; i < 12; ++i) {
        ingest::Headline h;
        h.id = "g" + std::to_string(i);
        h.day = "day-a" + std::to_string(i / 4);  // days of four
        h.category = rng.below(enc::kNumCategories);
        h.has_category = true;
        h.text = h.id;
        std::vector<double> vec(8);
        for (auto& v : vec) v = rng.gaussian();
        store.add(h.id, vec);
        grouping_a.push_back(h);
    }
    std::vector<ingest::Headline> grouping_b(grouping_a.rbegin(), grouping_a.rend());
    for (std::size_t i = 0; i < grouping_b.size(); ++i)
        grouping_b[i].day = "day-b" + std::to_string(i / 3);  // days of three, reversed order

    std::map<std::string, double> score_a;
    for (const auto& r : rank::score_all(model, grouping_a, store)) score_a[r.headline_id] = r.score;
    for (const auto& r : rank::score_all(model, grouping_b, store))
        if (score_a.at(r.headline_id) != r.score) bitwise = false;

    return {7, "score-globality", bitwise,
            fmt("%s across solo/crowded days, direct scorer, and regrouped corpora",
                bitwise ? "bitwise-equal logits" : "LOGITS DIFFER")};
}

// ---------------------------------------------------------------------------
// 8. Concentration report arithmetic on a hand-built ranking: base 15.76%,
//    top-10 90% -> +471.07% within 0.1.
// ---------------------------------------------------------------------------

Check check_skew_arithmetic() {
    // 1250 records, 197 of them business: 9 in the top ten, the rest spread
    // through the tail.
    std::vector<rank::RelevanceRecord> records;
    std::size_t business_left = 197;
    for (std::size_t i = 0; i < 1250; ++i) {
        rank::RelevanceRecord r;
        r.headline_id = "r" + std::to_string(i);
        r.day = "2020-01-01";
        r.score = static_cast<double>(1250 - i);
        const bool business = (i < 9) || (i >= 10 && i % 6 == 3 && business_left > 0);
        if (business) {
            r.category = 0;
            --business_left;
        } else {
            r.category = 6;
        }
        r.headline_index = i;
        records.push_back(std::move(r));
    }

    const auto ranked = rank::global_rank(std::move(records));
    std::size_t business_total = 0;
    for (const auto& r : ranked) business_total += r.category == 0 ? 1 : 0;
    const auto report = rank::skew_report(ranked, 0, {10});
    const double increase = report.rows.at(0).increase_pct;
    const bool pass = business_total == 197 && report.total == 1250 &&
                      std::fabs(report.base_fraction - 0.1576) < 1e-12 &&
                      std::fabs(report.rows.at(0).fraction - 0.90) < 1e-12 &&
                      std::fabs(increase - 471.07) <= 0.1;
    return {8, "skew-arithmetic", pass,
            fmt("base %.4f, top-10 %.2f, increase %+.2f%% (need +471.07 +/- 0.1)",
                report.base_fraction, report.rows.at(0).fraction, increase)};
}

// ---------------------------------------------------------------------------
// 9. The command-line pipeline run twice with one seed writes byte-identical
//    artifacts, manifests included.
// ---------------------------------------------------------------------------

std::string cli_prices_csv() {
    const std::vector<double> moves = {0.05, -0.3, 0.4,  0.0, -0.5, 0.25,
                                       -0.15, 0.6, -0.45, 0.1, 0.35};
    const std::vector<std::string> dates = {"2021-01-04", "2021-01-05", "2021-01-06",
                                            "2021-01-07", "2021-01-08", "2021-01-11",
                                            "2021-01-12", "2021-01-13", "2021-01-14",
                                            "2021-01-15", "2021-01-18", "2021-01-19"};
    std::string out = "date,open\n";
    double open = 100.0;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s,%.6f\n", dates[i].c_str(), open);
        out += buf;
        if (i < moves.size()) open *= 1.0 + moves[i] / 100.0;
    }
    return out;
}

std::string cli_headlines_jsonl() {
    const std::vector<std::string> days = {"2021-01-04", "2021-01-05", "2021-01-06",
                                           "2021-01-07", "2021-01-08", "2021-01-11",
                                           "2021-01-12", "2021-01-13", "2021-01-14",
                                           "2021-01-15"};
    std::string out;
    int n = 0;
    auto row = [&](const std::string& day, const std::string& text, const char* category) {
        json j = {{"id", "h" + std::to_string(n++)}, {"date", day}, {"text", text}};
        if (category != nullptr) j["category"] = category;
        out += j.dump() + "\n";
    };
    for (const auto& day : days) {
        for (int k = 0; k < 5; ++k)
            row(day,
                "business outlook improves on quarterly earnings report number " +
                    std::to_string(n) + " draws investor attention",
                "business");
        for (int k = 0; k < 2; ++k)
            row(day, "world leaders meet to discuss trade policy round " + std::to_string(n),
                "world");
        row(day, "sport final ends in dramatic overtime victory match " + std::to_string(n),
            "sport");
    }
    return out;
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), root).string()] = ss.str();
    }
    return files;
}

Check check_cli_determinism(const std::string& cli) {
    if (cli.empty()) {
        return {9, "cli-determinism", false, "path to the command-line binary not supplied"};
    }
    const fs::path root = fs::temp_directory_path() / "newsrank_acceptance_cli";
    std::error_code ec;
    fs::remove_all(root, ec);
    fs::create_directories(root);

    auto write = [&](const char* name, const std::string& body) {
        std::ofstream out(root / name, std::ios::binary);
        out << body;
        return (root / name).string();
    };
    const std::string prices = write("prices.csv", cli_prices_csv());
    const std::string heads = write("headlines.jsonl", cli_headlines_jsonl());
    const json cfg = {{"annotation_top", 0}, {"batch_size", 5},  {"category_dim", 4},
                      {"day_cap", 6},        {"epochs", 2},      {"hash_dims", 32},
                      {"hidden_dim", 8},     {"index_name", "ACC"}, {"ks", {3, 5}},
                      {"min_day_headlines", 4}, {"score_split", "all"}, {"seed", 7},
                      {"threads", 1},        {"top_categories", 2}};
    const std::string cfg_path = write("config.json", cfg.dump(2) + "\n");
    const std::string log_path = (root / "cli_log.txt").string();

    const std::string dir_ingest = (root / "stage_ingest").string();
    const std::string dir_train = (root / "stage_train").string();
    const std::string dir_score = (root / "stage_score").string();
    const std::vector<std::string> commands = {
        cli + " ingest --config " + cfg_path + " --prices " + prices + " --headlines " + heads +
            " --out-dir " + dir_ingest,
        cli + " train --config " + cfg_path + " --dataset " + dir_ingest + " --out-dir " +
            dir_train,
        cli + " score --config " + cfg_path + " --checkpoint " + dir_train +
            "/model.nrck --dataset " + dir_ingest + " --out-dir " + dir_score,
    };

    auto run_pipeline = [&]() -> bool {
        for (const auto& cmd : commands) {
            const int status = std::system((cmd + " >> " + log_path + " 2>&1").c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return false;
        }
        return true;
    };

    auto snapshot_stages = [&]() {
        std::map<std::string, std::string> files;
        for (const auto& d : {dir_ingest, dir_train, dir_score}) {
            const std::string prefix = fs::path(d).filename().string() + "/";
            for (auto& [name, body] : snapshot_tree(d)) files[prefix + name] = std::move(body);
        }
        return files;
    };

    if (!run_pipeline())
        return {9, "cli-determinism", false, "first pipeline run failed; see " + log_path};
    const std::map<std::string, std::string> first = snapshot_stages();
    if (!run_pipeline())
        return {9, "cli-determinism", false, "second pipeline run failed; see " + log_path};
    const std::map<std::string, std::string> second = snapshot_stages();

    std::size_t differing = 0;
    for (const auto& [name, body] : first) {
        auto it = second.find(name);
        if (it == second.end() || it->second != body) ++differing;
    }
    const bool pass = differing == 0 && first.size() == second.size() && !first.empty();
    if (pass) fs::remove_all(root, ec);  // keep the artifacts around on failure
    return {9, "cli-determinism", pass,
            fmt("%zu artifacts, %zu differ between identical reruns (need 0)", first.size(),
                differing)};
}

// ---------------------------------------------------------------------------
// 10. Checkpoint selection rules reproduce their rule tables exactly.
// ---------------------------------------------------------------------------

Check check_selection_traces() {
    auto acc_log = [](std::initializer_list<double> accs) {
        std::vector<pipe::EpochStats> log;
        std::size_t e = 1;
        for (double a : accs) log.push_back({e++, 0.0, 0.0, a});
        return log;
    };
    auto loss_log = [](std::initializer_list<double> losses) {
        std::vector<pipe::EpochStats> log;
        std::size_t e = 1;
        for (double l : losses) log.push_back({e++, 0.0, l, 0.0});
        return log;
    };

    bool ok = true;
    ok &= pipe::select_max_accuracy(acc_log({0.4, 0.6, 0.5})).epoch == 2;
    ok &= pipe::select_max_accuracy(acc_log({0.6, 0.6})).epoch == 1;  // earliest tie
    {
        std::vector<pipe::EpochStats> rising;
        for (std::size_t e = 1; e <= 25; ++e)
            rising.push_back({e, 0.0, 0.0, 0.01 * static_cast<double>(e)});
        const auto sel = pipe::select_max_accuracy(rising);
        ok &= sel.epoch == 20 && sel.considered == 20;  // hard 20-epoch cap
    }
    {
        const auto sel = pipe::select_min_loss_patience(loss_log({1.0, 0.8, 0.9, 0.95}));
        ok &= sel.epoch == 2 && sel.considered == 4;  // stops after two stale epochs
    }
    ok &= pipe::select_min_loss_patience(loss_log({1.0, 0.9, 0.8, 0.7})).epoch == 4;
    {
        const auto sel = pipe::select_min_loss_patience(loss_log({1.0, 1.1, 1.2}));
        ok &= sel.epoch == 1 && sel.considered == 3;
    }
    return {10, "selection-traces", ok,
            ok ? "max-accuracy and min-loss-patience traces all exact"
               : "a selection trace deviated from its rule table"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    std::vector<Check> checks;
    auto guard = [&](Check (*fn)(), int number, const char* name) {
        try {
            checks.push_back(fn());
        } catch (const std::exception& e) {
            checks.push_back({number, name, false, std::string("threw: ") + e.what()});
        }
    };

    guard(check_gradient_oracle, 1, "gradient-oracle");
    guard(check_attention_contract, 2, "attention-contract");
    guard(check_planted_signal, 3, "planted-signal-ranking");
    guard(check_shuffled_label_control, 4, "shuffled-label-control");
    guard(check_threshold_search_oracle, 5, "threshold-search-oracle");
    guard(check_balanced_threshold_calibration, 6, "balanced-threshold-calibration");
    guard(check_score_globality, 7, "score-globality");
    guard(check_skew_arithmetic, 8, "skew-arithmetic");
    try {
        checks.push_back(check_cli_determinism(cli));
    } catch (const std::exception& e) {
        checks.push_back({9, "cli-determinism", false, std::string("threw: ") + e.what()});
    }
    guard(check_selection_traces, 10, "selection-traces");

    std::size_t passed = 0;
    for (const auto& c : checks) {
        std::printf("%s  %2d. %-30s %s\n", c.pass ? "PASS" : "FAIL", c.number, c.name.c_str(),
                    c.detail.c_str());
        if (c.pass) ++passed;
    }
    std::printf("acceptance: %zu/%zu passed\n", passed, checks.size());
    return passed == checks.size() ? 0 : 1;
}
