#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace newsrank::ingest {

inline constexpr std::size_t kMaxTokens = 15;
inline constexpr std::size_t kMinTextChars = 20;

struct Headline {
    std::string id;
    std::string day;                  // ISO date
    std::string text;
    std::vector<std::string> tokens;  // 1..kMaxTokens after filtering
    std::size_t category = 7;         // index into enc::category_names(); 7 = unclassified
    bool has_category = false;        // category present in the input file
};

// Counts per drop rule, serialized into the drop report. Truncation keeps
// the record, so it is tracked apart from the drops.
struct DropCounts {
    std::map<std::string, std::size_t> by_rule;
    std::size_t truncated = 0;
    void bump(const std::string& rule, std::size_t n = 1) { by_rule[rule] += n; }
    std::size_t total() const;
};

// Number of UTF-8 code points; malformed bytes count as one each.
std::size_t utf8_length(const std::string& s);

// Lowercases ASCII and splits on anything that is not a letter or digit.
std::vector<std::string> tokenize(const std::string& text);

// One JSON object per line with fields id, date, text, optional category.
// Unknown category labels are an error; missing ids/dates/text are errors
// naming the line.
std::vector<Headline> load_headlines(const std::string& path);

// Drops headlines shorter than kMinTextChars characters or with no tokens,
// truncates token sequences to kMaxTokens. Updates counts per rule.
std::vector<Headline> filter_headlines(std::vector<Headline> headlines, DropCounts& drops);

}  // namespace newsrank::ingest
