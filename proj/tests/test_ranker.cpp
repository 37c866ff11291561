#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "encoder/categories.hpp"
#include "ranker/ranker.hpp"

using namespace newsrank;
using namespace newsrank::rank;

namespace {

RelevanceRecord rec(std::string id, double score, std::string day = "2007-01-03",
                    std::size_t category = 0) {
    RelevanceRecord r;
    r.headline_id = std::move(id);
    r.day = std::move(day);
    r.category = category;
    r.score = score;
    return r;
}

std::vector<ingest::Headline> corpus_for(const std::vector<RelevanceRecord>& records) {
    std::vector<ingest::Headline> corpus(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        corpus[i].id = records[i].headline_id;
        corpus[i].day = records[i].day;
        corpus[i].text = "text of " + records[i].headline_id;
        corpus[i].category = records[i].category;
    }
    return corpus;
}

}  // namespace

TEST_CASE("global_rank orders by score") {
    auto ranked = global_rank({rec("a", 3.0), rec("b", 1.0), rec("c", 2.0)});
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].headline_id == "a");
    CHECK(ranked[0].rank == 1);
    CHECK(ranked[1].headline_id == "c");
    CHECK(ranked[1].rank == 2);
    CHECK(ranked[2].headline_id == "b");
    CHECK(ranked[2].rank == 3);
}

TEST_CASE("global_rank breaks ties by day then id") {
    auto ranked = global_rank({rec("z", 1.0, "2007-01-04"), rec("a", 1.0, "2007-01-04"),
                               rec("m", 1.0, "2007-01-03")});
    CHECK(ranked[0].headline_id == "m");  // earlier day first
    CHECK(ranked[1].headline_id == "a");  // same day: id order
    CHECK(ranked[2].headline_id == "z");
}

TEST_CASE("global_rank matches an independent sort oracle") {
    Rng rng(12);
    const std::size_t n = 100000;
    std::vector<RelevanceRecord> records;
    records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // coarse scores force plenty of ties through the tie rule
        double score = std::floor(rng.gaussian() * 50.0) / 10.0;
        records.push_back(rec("h" + std::to_string(i), score,
                              i % 2 ? "2007-01-04" : "2007-01-03", i % 8));
    }

    // oracle: sort (score desc, day, id) triples independently
    std::vector<std::size_t> oracle(n);
    for (std::size_t i = 0; i < n; ++i) oracle[i] = i;
    std::sort(oracle.begin(), oracle.end(), [&](std::size_t x, std::size_t y) {
        if (records[x].score != records[y].score) return records[x].score > records[y].score;
        if (records[x].day != records[y].day) return records[x].day < records[y].day;
        return records[x].headline_id < records[y].headline_id;
    });

    auto ranked = global_rank(records);
    bool all_match = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (ranked[i].headline_id != records[oracle[i]].headline_id) {
            all_match = false;
            break;
        }
    }
    CHECK(all_match);

    // rank order is invariant under a strictly increasing score transform
    auto transformed = records;
    for (auto& r : transformed) r.score = 2.0 * r.score + 7.0;
    auto ranked2 = global_rank(transformed);
    bool same_permutation = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (ranked2[i].headline_id != ranked[i].headline_id) {
            same_permutation = false;
            break;
        }
    }
    CHECK(same_permutation);
}

TEST_CASE("skew_report reproduces the reference arithmetic") {
    // base 197/1250 = 15.76%; 9 of the top 10 are the target category
    std::vector<RelevanceRecord> records;
    std::size_t target_left = 197;
    for (std::size_t i = 0; i < 1250; ++i) {
        std::size_t category;
        if (i < 10) {
            category = (i == 0) ? 1 : 0;  // 9 targets in the top 10
            if (category == 0) --target_left;
        } else {
            category = target_left > 0 ? 0 : 1;
            if (category == 0) --target_left;
        }
        records.push_back(
            rec("h" + std::to_string(1000 + i), 1000.0 - static_cast<double>(i), "2007-01-03",
                category));
    }
    auto ranked = global_rank(records);
    auto report = skew_report(ranked, 0, {10, 1250});
    CHECK(report.base_fraction == doctest::Approx(0.1576).epsilon(1e-12));
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].fraction == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(report.rows[0].increase_pct == doctest::Approx(471.0659898477).epsilon(1e-9));
    CHECK(std::fabs(report.rows[0].increase_pct - 471.07) < 0.1);
    // the full-set row always lands exactly on the base
    CHECK(report.rows[1].fraction == doctest::Approx(report.base_fraction).epsilon(1e-15));
    CHECK(report.rows[1].increase_pct == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("skew_report edge rules") {
    auto ranked = global_rank({rec("a", 3.0, "2007-01-03", 1), rec("b", 2.0, "2007-01-03", 0),
                               rec("c", 1.0, "2007-01-03", 1)});
    auto report = skew_report(ranked, 0, {1, 3});
    CHECK(report.rows[0].fraction == 0.0);  // target absent from top 1
    CHECK(report.rows[0].increase_pct == doctest::Approx(-100.0).epsilon(1e-12));

    CHECK_THROWS_AS(skew_report(ranked, 0, {5}), InputError);    // k > n
    CHECK_THROWS_AS(skew_report(ranked, 5, {1}), InputError);    // category never occurs
    CHECK_THROWS_AS(skew_report({}, 0, {1}), InputError);        // empty set
    CHECK_THROWS_AS(skew_report(ranked, 0, {0}), InputError);    // zero cutoff
}

TEST_CASE("day_rank restricts the global order") {
    auto ranked = global_rank({rec("a", 5.0, "2007-01-03"), rec("b", 4.0, "2007-01-04"),
                               rec("c", 3.0, "2007-01-03"), rec("d", 2.0, "2007-01-04"),
                               rec("e", 1.0, "2007-01-03")});
    auto day = day_rank(ranked, "2007-01-03");
    REQUIRE(day.size() == 3);
    CHECK(day[0].headline_id == "a");
    CHECK(day[1].headline_id == "c");
    CHECK(day[2].headline_id == "e");
    CHECK(day[0].rank == 1);  // global ranks preserved
    CHECK(day[1].rank == 3);

    CHECK_THROWS_AS(day_rank(ranked, "1999-01-01"), InputError);
}

TEST_CASE("annotation sample blind export") {
    std::vector<RelevanceRecord> records;
    for (std::size_t i = 0; i < 1000; ++i) {
        records.push_back(rec("h" + std::to_string(10000 + i), 1000.0 - double(i)));
        records.back().headline_index = i;
    }
    auto corpus = corpus_for(records);
    auto ranked = global_rank(records);

    auto sample = export_annotation_sample(ranked, corpus, 200, 200, 77);
    CHECK(sample.rows.size() <= 400);
    CHECK(sample.rows.size() >= 200);
    CHECK(sample.rows.size() == sample.mapping.size());

    // blind ids are unique; every mapping row pairs a blind row
    std::set<std::string> blind_ids;
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        CHECK(blind_ids.insert(sample.rows[i].blind_id).second);
        CHECK(sample.rows[i].blind_id == sample.mapping[i].blind_id);
        CHECK(sample.rows[i].text == "text of " + sample.mapping[i].headline_id);
        CHECK((sample.mapping[i].provenance == "top" ||
               sample.mapping[i].provenance == "uniform"));
    }

    // top slice fully present, deduplicated
    std::set<std::string> sampled_ids;
    std::size_t top_count = 0;
    for (const auto& m : sample.mapping) {
        CHECK(sampled_ids.insert(m.headline_id).second);
        if (m.provenance == "top") ++top_count;
    }
    CHECK(top_count == 200);
    for (std::size_t i = 0; i < 200; ++i) {
        CHECK(sampled_ids.count(ranked[i].headline_id) == 1);
    }

    // deterministic for a fixed seed, different otherwise
    auto again = export_annotation_sample(ranked, corpus, 200, 200, 77);
    REQUIRE(again.rows.size() == sample.rows.size());
    bool identical = true;
    for (std::size_t i = 0; i < sample.rows.size(); ++i) {
        if (again.mapping[i].headline_id != sample.mapping[i].headline_id) identical = false;
    }
    CHECK(identical);

    auto other = export_annotation_sample(ranked, corpus, 200, 200, 78);
    bool all_same = other.mapping.size() == sample.mapping.size();
    if (all_same) {
        for (std::size_t i = 0; i < sample.mapping.size(); ++i) {
            if (other.mapping[i].headline_id != sample.mapping[i].headline_id) all_same = false;
        }
    }
    CHECK(!all_same);

    CHECK_THROWS_AS(export_annotation_sample(ranked, corpus, 2000, 200, 1), InputError);
}

TEST_CASE("cohens kappa hand-computed") {
    std::vector<std::string> a = {"rel", "rel", "rel", "unrel", "unrel"};
    std::vector<std::string> b = {"rel", "rel", "unrel", "unrel", "unrel"};
    // po = 0.8, pe = 0.6*0.4 + 0.4*0.6 = 0.48, kappa = 0.32/0.52
    CHECK(cohens_kappa(a, b) == doctest::Approx(8.0 / 13.0).epsilon(1e-12));

    CHECK(cohens_kappa(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::string> constant(5, "x");
    CHECK(cohens_kappa(constant, constant) == 1.0);  // degenerate: pe = 1

    CHECK_THROWS_AS(cohens_kappa({"a"}, {"a", "b"}), InputError);
    CHECK_THROWS_AS(cohens_kappa({}, {}), InputError);
}
