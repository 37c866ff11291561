#include "ranker/ranker.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace newsrank::rank {

std::vector<RelevanceRecord> score_all(const pipe::Model& model,
                                       const std::vector<ingest::Headline>& headlines,
                                       const enc::EmbeddingStore& store) {
    std::vector<RelevanceRecord> out;
    out.reserve(headlines.size());
    for (std::size_t i = 0; i < headlines.size(); ++i) {
        const auto& h = headlines[i];
        RelevanceRecord rec;
        rec.headline_id = h.id;
        rec.day = h.day;
        rec.category = h.category;
        rec.score = model.score_headline(store.vector_of(h.id), h.category);
        rec.headline_index = i;
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<RelevanceRecord> global_rank(std::vector<RelevanceRecord> records) {
    std::sort(records.begin(), records.end(),
              [](const RelevanceRecord& a, const RelevanceRecord& b) {
                  if (a.score != b.score) return a.score > b.score;
                  if (a.day != b.day) return a.day < b.day;
                  return a.headline_id < b.headline_id;
              });
    for (std::size_t i = 0; i < records.size(); ++i) records[i].rank = i + 1;
    return records;
}

SkewReport skew_report(const std::vector<RelevanceRecord>& ranked, std::size_t target_category,
                       std::vector<std::size_t> ks) {
    if (ranked.empty()) throw InputError("skew report needs at least one record");
    std::size_t base_count = 0;
    for (const auto& r : ranked) {
        if (r.category == target_category) ++base_count;
    }
    if (base_count == 0) {
        throw InputError("target category never occurs in the scored set");
    }

    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

    SkewReport report;
    report.target_category = target_category;
    report.total = ranked.size();
    report.base_fraction = static_cast<double>(base_count) / static_cast<double>(ranked.size());

    std::size_t seen_target = 0;
    std::size_t pos = 0;
    for (std::size_t k : ks) {
        if (k == 0) throw InputError("skew cutoff must be positive");
        if (k > ranked.size()) {
            throw InputError("skew cutoff " + std::to_string(k) + " exceeds record count " +
                             std::to_string(ranked.size()));
        }
        for (; pos < k; ++pos) {
            if (ranked[pos].category == target_category) ++seen_target;
        }
        SkewRow row;
        row.k = k;
        row.fraction = static_cast<double>(seen_target) / static_cast<double>(k);
        row.increase_pct = 100.0 * (row.fraction / report.base_fraction - 1.0);
        report.rows.push_back(row);
    }
    return report;
}

std::vector<RelevanceRecord> day_rank(const std::vector<RelevanceRecord>& ranked,
                                      const std::string& day) {
    std::vector<RelevanceRecord> out;
    for (const auto& r : ranked) {
        if (r.day == day) out.push_back(r);
    }
    if (out.empty()) throw InputError("no scored headlines for day " + day);
    std::sort(out.begin(), out.end(),
              [](const RelevanceRecord& a, const RelevanceRecord& b) { return a.rank < b.rank; });
    return out;
}

AnnotationSample export_annotation_sample(const std::vector<RelevanceRecord>& ranked,
                                          const std::vector<ingest::Headline>& corpus,
                                          std::size_t top_n, std::size_t uniform_n,
                                          std::uint64_t seed) {
    if (ranked.size() < top_n) {
        throw InputError("annotation sample needs at least " + std::to_string(top_n) +
                         " records, have " + std::to_string(ranked.size()));
    }

    // records must be in rank order for the top slice
    std::vector<const RelevanceRecord*> by_rank(ranked.size());
    for (const auto& r : ranked) {
        if (r.rank == 0 || r.rank > ranked.size()) {
            throw InputError("annotation sample needs globally ranked records");
        }
        by_rank[r.rank - 1] = &r;
    }

    struct Chosen {
        const RelevanceRecord* rec;
        std::string provenance;
    };
    std::vector<Chosen> chosen;
    std::set<std::string> taken;
    for (std::size_t i = 0; i < top_n; ++i) {
        chosen.push_back({by_rank[i], "top"});
        taken.insert(by_rank[i]->headline_id);
    }

    // uniform draw without replacement over the whole scored set
    std::vector<std::size_t> pool(ranked.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    Rng rng(derive_seed(seed, "annotation-sample"));
    rng.shuffle(pool);
    const std::size_t want = std::min(uniform_n, ranked.size());
    for (std::size_t i = 0; i < want; ++i) {
        const RelevanceRecord* rec = by_rank[pool[i]];
        if (!taken.insert(rec->headline_id).second) continue;  // dedup against the top slice
        chosen.push_back({rec, "uniform"});
    }

    // blind order reveals nothing about rank or provenance
    std::vector<std::size_t> order(chosen.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng blind_rng(derive_seed(seed, "annotation-blind"));
    blind_rng.shuffle(order);

    AnnotationSample sample;
    char blind[16];
    for (std::size_t i = 0; i < order.size(); ++i) {
        const Chosen& c = chosen[order[i]];
        std::snprintf(blind, sizeof(blind), "b%05zu", i + 1);
        sample.rows.push_back({blind, corpus.at(c.rec->headline_index).text});
        sample.mapping.push_back({blind, c.rec->headline_id, c.provenance});
    }
    return sample;
}

double cohens_kappa(const std::vector<std::string>& rater_a,
                    const std::vector<std::string>& rater_b) {
    if (rater_a.size() != rater_b.size()) {
        throw InputError("kappa raters labeled different numbers of items: " +
                         std::to_string(rater_a.size()) + " vs " + std::to_string(rater_b.size()));
    }
    if (rater_a.empty()) throw InputError("kappa needs at least one labeled item");

    const double n = static_cast<double>(rater_a.size());
    std::map<std::string, std::size_t> count_a, count_b;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < rater_a.size(); ++i) {
        count_a[rater_a[i]]++;
        count_b[rater_b[i]]++;
        if (rater_a[i] == rater_b[i]) ++agree;
    }
    const double po = static_cast<double>(agree) / n;
    double pe = 0.0;
    for (const auto& [label, ca] : count_a) {
        auto it = count_b.find(label);
        if (it != count_b.end()) {
            pe += (static_cast<double>(ca) / n) * (static_cast<double>(it->second) / n);
        }
    }
    if (1.0 - pe < 1e-15) return po == 1.0 ? 1.0 : 0.0;
    return (po - pe) / (1.0 - pe);
}

}  // namespace newsrank::rank
