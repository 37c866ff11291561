#include "ingest/labeling.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace newsrank::ingest {

const std::string& movement_name(Movement m) {
    static const std::array<std::string, 3> names = {"DOWN", "STAY", "UP"};
    return names[static_cast<std::size_t>(m)];
}

Movement movement_from_name(const std::string& name) {
    if (name == "DOWN") return Movement::Down;
    if (name == "STAY") return Movement::Stay;
    if (name == "UP") return Movement::Up;
    throw InputError("unknown movement label '" + name + "'");
}

Movement label_from_threshold(double return_pct, double threshold) {
    if (threshold <= 0.0) throw InputError("movement threshold must be positive");
    if (return_pct > threshold) return Movement::Up;
    if (return_pct < -threshold) return Movement::Down;
    return Movement::Stay;
}

double ClassDistribution::pct(Movement m) const {
    const std::size_t n = total();
    if (n == 0) return 0.0;
    return 100.0 * static_cast<double>(counts[static_cast<std::size_t>(m)]) /
           static_cast<double>(n);
}

std::size_t ClassDistribution::gap() const {
    const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
    return *mx - *mn;
}

ClassDistribution class_distribution(const std::vector<double>& returns, double threshold) {
    ClassDistribution dist;
    for (double r : returns) {
        dist.counts[static_cast<std::size_t>(label_from_threshold(r, threshold))]++;
    }
    return dist;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

ThresholdSearchResult threshold_search(const std::vector<double>& returns,
                                       const std::vector<double>& grid) {
    if (returns.empty()) throw InputError("threshold_search: no returns");
    if (grid.empty()) throw InputError("threshold_search: empty grid");

    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());

    ThresholdSearchResult best;
    bool have_best = false;
    for (double t : sorted_grid) {
        const ClassDistribution dist = class_distribution(returns, t);
        // strict < keeps the smallest threshold on ties
        if (!have_best || dist.gap() < best.distribution.gap()) {
            best.best_threshold = t;
            best.distribution = dist;
            have_best = true;
        }
    }
    return best;
}

}  // namespace newsrank::ingest
