#include "ingest/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "encoder/categories.hpp"

namespace newsrank::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string& split_name(Split s) {
    static const std::array<std::string, 3> names = {"train", "val", "test"};
    return names[static_cast<std::size_t>(s)];
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw InputError("unknown split '" + name + "'");
}

std::vector<std::size_t> top_categories(const std::vector<Headline>& corpus, std::size_t k) {
    std::array<std::size_t, enc::kNumCategories> counts = {};
    for (const auto& h : corpus) counts[h.category]++;
    std::vector<std::size_t> order(enc::kNumCategories);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
    order.resize(std::min(k, order.size()));
    return order;
}

DayFilterResult filter_days(std::vector<LabeledDay> days, const std::vector<Headline>& corpus,
                            const std::vector<std::size_t>& top, std::size_t min_count) {
    std::array<bool, enc::kNumCategories> is_top = {};
    for (std::size_t c : top) is_top[c] = true;

    DayFilterResult res;
    const std::size_t total = days.size();
    for (auto& day : days) {
        std::size_t in_top = 0;
        for (std::size_t idx : day.headline_indices) {
            if (is_top[corpus[idx].category]) ++in_top;
        }
        if (in_top >= min_count) {
            res.kept.push_back(std::move(day));
        } else {
            res.dropped++;
        }
    }
    res.dropped_fraction =
        total == 0 ? 0.0 : static_cast<double>(res.dropped) / static_cast<double>(total);
    return res;
}

std::vector<DayExample> stratified_subsample(const LabeledDay& day,
                                             const std::vector<Headline>& corpus,
                                             std::size_t cap, std::uint64_t seed) {
    if (cap == 0) throw InputError("stratified_subsample: cap must be positive");
    const std::size_t k = day.headline_indices.size();
    if (k == 0) return {};
    const std::size_t n_subsets = (k + cap - 1) / cap;

    // bucket by category, shuffle within each bucket
    std::array<std::vector<std::size_t>, enc::kNumCategories> buckets;
    for (std::size_t idx : day.headline_indices) buckets[corpus[idx].category].push_back(idx);
    Rng rng(derive_seed(seed, "stratify:" + day.day));
    for (auto& bucket : buckets) rng.shuffle(bucket);

    // deal round-robin with a pointer that carries across categories, so
    // subset totals stay within one of each other
    std::vector<DayExample> out(n_subsets);
    for (std::size_t s = 0; s < n_subsets; ++s) {
        out[s].day = day.day;
        out[s].subset_index = s;
        out[s].label = day.label;
    }
    std::size_t cursor = 0;
    for (const auto& bucket : buckets) {
        for (std::size_t idx : bucket) {
            out[cursor % n_subsets].headline_indices.push_back(idx);
            ++cursor;
        }
    }
    return out;
}

void split_dataset(std::vector<DayExample>& examples, double train_frac, double val_frac,
                   double test_frac, std::uint64_t seed) {
    if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
        throw InputError("split fractions must sum to 1");
    }
    if (train_frac < 0.0 || val_frac < 0.0 || test_frac < 0.0) {
        throw InputError("split fractions must be nonnegative");
    }

    std::vector<std::string> days;
    for (const auto& ex : examples) days.push_back(ex.day);
    std::sort(days.begin(), days.end());
    days.erase(std::unique(days.begin(), days.end()), days.end());

    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(days);

    const std::size_t n = days.size();
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(n));
    const auto n_val = static_cast<std::size_t>(val_frac * static_cast<double>(n));
    std::map<std::string, Split> assignment;
    for (std::size_t i = 0; i < n; ++i) {
        Split s = Split::Test;
        if (i < n_train) s = Split::Train;
        else if (i < n_train + n_val) s = Split::Val;
        assignment[days[i]] = s;
    }
    for (auto& ex : examples) ex.split = assignment.at(ex.day);
}

void save_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);

    {
        std::ofstream os(fs::path(dir) / "headlines.jsonl", std::ios::trunc);
        if (!os) throw InputError("cannot write headlines.jsonl under " + dir);
        for (const auto& h : ds.headlines) {
            json rec{{"id", h.id},
                     {"date", h.day},
                     {"text", h.text},
                     {"tokens", h.tokens},
                     {"category", enc::category_name(h.category)}};
            os << rec.dump() << '\n';
        }
    }
    {
        std::ofstream os(fs::path(dir) / "examples.jsonl", std::ios::trunc);
        if (!os) throw InputError("cannot write examples.jsonl under " + dir);
        for (const auto& ex : ds.examples) {
            std::vector<std::string> ids;
            ids.reserve(ex.headline_indices.size());
            for (std::size_t idx : ex.headline_indices) ids.push_back(ds.headlines[idx].id);
            json rec{{"day", ex.day},
                     {"subset", ex.subset_index},
                     {"label", movement_name(ex.label)},
                     {"split", split_name(ex.split)},
                     {"headline_ids", ids}};
            os << rec.dump() << '\n';
        }
    }
    {
        json t{{"threshold", ds.threshold},
               {"index_name", ds.index_name},
               {"distribution",
                {{"DOWN", ds.distribution.pct(Movement::Down)},
                 {"STAY", ds.distribution.pct(Movement::Stay)},
                 {"UP", ds.distribution.pct(Movement::Up)},
                 {"counts", ds.distribution.counts}}}};
        std::ofstream os(fs::path(dir) / "threshold.json", std::ios::trunc);
        os << t.dump(2) << '\n';
    }
}

Dataset load_dataset(const std::string& dir) {
    Dataset ds;

    {
        std::ifstream is(fs::path(dir) / "headlines.jsonl");
        if (!is) throw InputError("cannot open " + dir + "/headlines.jsonl (run ingest first)");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception& e) {
                throw InputError(dir + "/headlines.jsonl:" + std::to_string(line_no) + ": " +
                                 e.what());
            }
            Headline h;
            h.id = rec.at("id").get<std::string>();
            h.day = rec.at("date").get<std::string>();
            h.text = rec.at("text").get<std::string>();
            h.tokens = rec.at("tokens").get<std::vector<std::string>>();
            h.category = enc::category_index(rec.at("category").get<std::string>());
            h.has_category = true;
            ds.headlines.push_back(std::move(h));
        }
    }

    std::map<std::string, std::size_t> id_index;
    for (std::size_t i = 0; i < ds.headlines.size(); ++i) id_index[ds.headlines[i].id] = i;

    {
        std::ifstream is(fs::path(dir) / "examples.jsonl");
        if (!is) throw InputError("cannot open " + dir + "/examples.jsonl (run ingest first)");
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            if (line.empty()) continue;
            json rec;
            try {
                rec = json::parse(line);
            } catch (const json::exception& e) {
                throw InputError(dir + "/examples.jsonl:" + std::to_string(line_no) + ": " +
                                 e.what());
            }
            DayExample ex;
            ex.day = rec.at("day").get<std::string>();
            ex.subset_index = rec.at("subset").get<std::size_t>();
            ex.label = movement_from_name(rec.at("label").get<std::string>());
            ex.split = split_from_name(rec.at("split").get<std::string>());
            for (const auto& id : rec.at("headline_ids")) {
                auto it = id_index.find(id.get<std::string>());
                if (it == id_index.end()) {
                    throw InputError(dir + "/examples.jsonl:" + std::to_string(line_no) +
                                     ": unknown headline id '" + id.get<std::string>() + "'");
                }
                ex.headline_indices.push_back(it->second);
            }
            ds.examples.push_back(std::move(ex));
        }
    }

    {
        std::ifstream is(fs::path(dir) / "threshold.json");
        if (!is) throw InputError("cannot open " + dir + "/threshold.json (run ingest first)");
        json t = json::parse(is);
        ds.threshold = t.at("threshold").get<double>();
        ds.index_name = t.value("index_name", "");
        if (t.contains("distribution") && t["distribution"].contains("counts")) {
            ds.distribution.counts = t["distribution"]["counts"].get<std::array<std::size_t, 3>>();
        }
    }
    return ds;
}

}  // namespace newsrank::ingest
