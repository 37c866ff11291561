#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ingest/headlines.hpp"
#include "ingest/labeling.hpp"

namespace newsrank::ingest {

inline constexpr std::size_t kDayCap = 115;
inline constexpr std::size_t kMinDayHeadlines = 25;

struct LabeledDay {
    std::string day;
    double return_pct = 0.0;
    Movement label = Movement::Stay;
    std::vector<std::size_t> headline_indices;  // into the headline corpus
};

enum class Split { Train = 0, Val = 1, Test = 2 };
const std::string& split_name(Split s);
Split split_from_name(const std::string& name);

struct DayExample {
    std::string day;
    std::size_t subset_index = 0;
    Movement label = Movement::Stay;
    Split split = Split::Train;
    std::vector<std::size_t> headline_indices;  // <= kDayCap entries
};

// The four most frequent categories over the whole corpus (by headline
// count; ties broken by category order).
std::vector<std::size_t> top_categories(const std::vector<Headline>& corpus, std::size_t k = 4);

struct DayFilterResult {
    std::vector<LabeledDay> kept;
    std::size_t dropped = 0;
    double dropped_fraction = 0.0;
};

// Keeps a day only if its headline count across `top` categories reaches
// min_count.
DayFilterResult filter_days(std::vector<LabeledDay> days, const std::vector<Headline>& corpus,
                            const std::vector<std::size_t>& top,
                            std::size_t min_count = kMinDayHeadlines);

// Partitions one day's headlines into ceil(k/cap) disjoint subsets, each
// preserving the day's category proportions within one headline per
// category. Deterministic given the seed; the union of subsets is exactly
// the day's headline set.
std::vector<DayExample> stratified_subsample(const LabeledDay& day,
                                             const std::vector<Headline>& corpus,
                                             std::size_t cap, std::uint64_t seed);

// Assigns splits by day so every subset of a day lands in the same split.
// Fractions must sum to 1.
void split_dataset(std::vector<DayExample>& examples, double train_frac, double val_frac,
                   double test_frac, std::uint64_t seed);

// On-disk dataset produced by ingest and consumed by train/eval.
struct Dataset {
    std::vector<Headline> headlines;
    std::vector<DayExample> examples;
    double threshold = 0.0;
    ClassDistribution distribution;
    std::string index_name;
};

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace newsrank::ingest
