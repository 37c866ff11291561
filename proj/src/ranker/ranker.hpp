#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "encoder/embedding_store.hpp"
#include "ingest/headlines.hpp"
#include "pipeline/model.hpp"

namespace newsrank::rank {

// One scored headline. The score is the unnormalized attention logit, so it
// is comparable across days.
struct RelevanceRecord {
    std::string headline_id;
    std::string day;
    std::size_t category = 0;
    double score = 0.0;
    std::size_t rank = 0;            // 1 = highest score; 0 = not ranked yet
    std::size_t headline_index = 0;  // into the corpus it was scored from
};

// Scores every headline through the model's per-headline path (dropout
// off). Missing embeddings raise an error naming the id.
std::vector<RelevanceRecord> score_all(const pipe::Model& model,
                                       const std::vector<ingest::Headline>& headlines,
                                       const enc::EmbeddingStore& store);

// Descending by score; equal scores order by (day, headline_id) so reruns
// produce identical files. Returns records with ranks 1..n assigned.
std::vector<RelevanceRecord> global_rank(std::vector<RelevanceRecord> records);

struct SkewRow {
    std::size_t k = 0;
    double fraction = 0.0;      // target share among the top k
    double increase_pct = 0.0;  // 100 * (fraction/base - 1)
};

struct SkewReport {
    std::size_t target_category = 0;
    double base_fraction = 0.0;  // target share over all records
    std::size_t total = 0;
    std::vector<SkewRow> rows;  // ascending k
};

// Target-category concentration among top-ranked records, per cutoff.
// Errors when a cutoff exceeds the record count or the target category
// never occurs.
SkewReport skew_report(const std::vector<RelevanceRecord>& ranked, std::size_t target_category,
                       std::vector<std::size_t> ks);

// The day's records in global-rank order. Unknown day is an error.
std::vector<RelevanceRecord> day_rank(const std::vector<RelevanceRecord>& ranked,
                                      const std::string& day);

// Blind annotation export: the top_n highest-ranked records plus uniform_n
// drawn uniformly without replacement, deduplicated. Row order and blind
// ids are shuffled so they leak nothing about rank; the mapping ties them
// back for post-annotation analysis.
struct AnnotationSample {
    struct BlindRow {
        std::string blind_id;
        std::string text;
    };
    struct MappingRow {
        std::string blind_id;
        std::string headline_id;
        std::string provenance;  // "top" or "uniform"
    };
    std::vector<BlindRow> rows;
    std::vector<MappingRow> mapping;
};
AnnotationSample export_annotation_sample(const std::vector<RelevanceRecord>& ranked,
                                          const std::vector<ingest::Headline>& corpus,
                                          std::size_t top_n, std::size_t uniform_n,
                                          std::uint64_t seed);

// Cohen's kappa over two equal-length label sequences. When expected
// agreement is 1 (both raters constant), returns 1 for full agreement and
// 0 otherwise.
double cohens_kappa(const std::vector<std::string>& rater_a,
                    const std::vector<std::string>& rater_b);

}  // namespace newsrank::rank
