#pragma once

#include <string>
#include <vector>

namespace newsrank::ingest {

// Calendar dates are ISO-8601 strings ("YYYY-MM-DD"); validated on entry,
// after which lexicographic order is chronological order.
bool is_valid_date(const std::string& s);

struct Session {
    std::string date;
    double open = 0.0;
};

struct PriceSeries {
    std::string index_name;
    std::vector<Session> sessions;  // strictly increasing dates, positive opens
};

// Delimited text with a header row naming at least "date" and "open"
// columns; extra columns are ignored. Delimiter is ',' unless the header
// contains a tab. Errors name the offending line.
PriceSeries load_prices(const std::string& path, const std::string& index_name);

struct DayReturn {
    std::string date;
    double return_pct = 0.0;  // to the next session's open
};

// return_pct(d) = 100 * (open(d+1) - open(d)) / open(d); the last session
// emits no return. Requires at least two sessions.
std::vector<DayReturn> compute_returns(const PriceSeries& prices);

}  // namespace newsrank::ingest
