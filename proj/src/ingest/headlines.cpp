#include "ingest/headlines.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "common/error.hpp"
#include "encoder/categories.hpp"
#include "ingest/prices.hpp"

namespace newsrank::ingest {

std::size_t DropCounts::total() const {
    std::size_t n = 0;
    for (const auto& [rule, count] : by_rule) n += count;
    return n;
}

std::size_t utf8_length(const std::string& s) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.size();) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t advance = 1;
        if ((c & 0x80) == 0x00) advance = 1;
        else if ((c & 0xe0) == 0xc0) advance = 2;
        else if ((c & 0xf0) == 0xe0) advance = 3;
        else if ((c & 0xf8) == 0xf0) advance = 4;
        // continuation or invalid lead bytes advance by 1 and count as one
        i += advance;
        if (i > s.size()) i = s.size();
        ++count;
    }
    return count;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            if (std::isalnum(c)) {
                current.push_back(static_cast<char>(std::tolower(c)));
            } else {
                flush();
            }
        } else {
            // keep non-ASCII bytes as part of the token
            current.push_back(ch);
        }
    }
    flush();
    return tokens;
}

std::vector<Headline> load_headlines(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open headline file: " + path);

    std::vector<Headline> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError(path + ":" + std::to_string(line_no) + ": bad JSON record: " +
                             e.what());
        }
        auto field = [&](const char* name) -> std::string {
            if (!rec.contains(name) || !rec[name].is_string()) {
                throw InputError(path + ":" + std::to_string(line_no) + ": missing string field '" +
                                 std::string(name) + "'");
            }
            return rec[name].get<std::string>();
        };
        Headline h;
        h.id = field("id");
        h.day = field("date");
        h.text = field("text");
        if (!is_valid_date(h.day)) {
            throw InputError(path + ":" + std::to_string(line_no) + ": bad date '" + h.day + "'");
        }
        if (!seen_ids.insert(h.id).second) {
            throw InputError(path + ":" + std::to_string(line_no) + ": duplicate headline id '" +
                             h.id + "'");
        }
        if (rec.contains("category") && !rec["category"].is_null()) {
            if (!rec["category"].is_string()) {
                throw InputError(path + ":" + std::to_string(line_no) +
                                 ": category must be a string");
            }
            h.category = enc::category_index(rec["category"].get<std::string>());
            h.has_category = true;
        }
        h.tokens = tokenize(h.text);
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<Headline> filter_headlines(std::vector<Headline> headlines, DropCounts& drops) {
    std::vector<Headline> kept;
    kept.reserve(headlines.size());
    for (auto& h : headlines) {
        if (utf8_length(h.text) < kMinTextChars) {
            drops.bump("text_under_20_chars");
            continue;
        }
        if (h.tokens.empty()) {
            drops.bump("no_tokens");
            continue;
        }
        if (h.tokens.size() > kMaxTokens) {
            h.tokens.resize(kMaxTokens);
            drops.truncated++;
        }
        kept.push_back(std::move(h));
    }
    return kept;
}

}  // namespace newsrank::ingest
