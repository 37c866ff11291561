#include "ingest/prices.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <fstream>

#include "common/error.hpp"

namespace newsrank::ingest {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

bool is_valid_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    const int year = std::stoi(s.substr(0, 4));
    const unsigned month = static_cast<unsigned>((s[5] - '0') * 10 + (s[6] - '0'));
    const unsigned day = static_cast<unsigned>((s[8] - '0') * 10 + (s[9] - '0'));
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                       std::chrono::day{day}}
        .ok();
}

PriceSeries load_prices(const std::string& path, const std::string& index_name) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open price file: " + path);

    std::string header;
    if (!std::getline(is, header)) throw InputError("empty price file: " + path);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';

    const auto cols = split(header, delim);
    std::ptrdiff_t date_col = -1, open_col = -1;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        const std::string name = lower(trim(cols[i]));
        if (name == "date") date_col = static_cast<std::ptrdiff_t>(i);
        if (name == "open") open_col = static_cast<std::ptrdiff_t>(i);
    }
    if (date_col < 0 || open_col < 0) {
        throw InputError(path + ":1: header row must name 'date' and 'open' columns");
    }

    PriceSeries series;
    series.index_name = index_name;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split(line, delim);
        if (fields.size() <= static_cast<std::size_t>(std::max(date_col, open_col))) {
            throw InputError(path + ":" + std::to_string(line_no) + ": too few columns");
        }
        Session s;
        s.date = trim(fields[static_cast<std::size_t>(date_col)]);
        if (!is_valid_date(s.date)) {
            throw InputError(path + ":" + std::to_string(line_no) + ": bad date '" + s.date +
                             "' (expected YYYY-MM-DD)");
        }
        const std::string open_str = trim(fields[static_cast<std::size_t>(open_col)]);
        auto [next, ec] = std::from_chars(open_str.data(), open_str.data() + open_str.size(),
                                          s.open);
        if (ec != std::errc() || next != open_str.data() + open_str.size()) {
            throw InputError(path + ":" + std::to_string(line_no) + ": bad open price '" +
                             open_str + "'");
        }
        if (s.open <= 0.0) {
            throw InputError(path + ":" + std::to_string(line_no) + ": open price must be > 0");
        }
        if (!series.sessions.empty() && series.sessions.back().date >= s.date) {
            throw InputError(path + ":" + std::to_string(line_no) +
                             ": dates must be strictly increasing ('" +
                             series.sessions.back().date + "' then '" + s.date + "')");
        }
        series.sessions.push_back(std::move(s));
    }
    return series;
}

std::vector<DayReturn> compute_returns(const PriceSeries& prices) {
    if (prices.sessions.size() < 2) {
        throw InputError("need at least two sessions to compute returns, got " +
                         std::to_string(prices.sessions.size()));
    }
    std::vector<DayReturn> out;
    out.reserve(prices.sessions.size() - 1);
    for (std::size_t i = 0; i + 1 < prices.sessions.size(); ++i) {
        const double open = prices.sessions[i].open;
        const double next_open = prices.sessions[i + 1].open;
        if (open == 0.0) throw InputError("zero open price on " + prices.sessions[i].date);
        out.push_back({prices.sessions[i].date, 100.0 * (next_open - open) / open});
    }
    return out;
}

}  // namespace newsrank::ingest
