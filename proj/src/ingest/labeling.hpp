#pragma once

#include <array>
#include <string>
#include <vector>

namespace newsrank::ingest {

enum class Movement { Down = 0, Stay = 1, Up = 2 };

const std::string& movement_name(Movement m);
Movement movement_from_name(const std::string& name);

// UP if return > t, DOWN if return < -t, STAY otherwise (boundary
// inclusive to STAY). t must be positive.
Movement label_from_threshold(double return_pct, double threshold);

struct ClassDistribution {
    std::array<std::size_t, 3> counts = {0, 0, 0};  // indexed by Movement
    std::size_t total() const { return counts[0] + counts[1] + counts[2]; }
    double pct(Movement m) const;
    std::size_t gap() const;  // majority count minus minority count
};

ClassDistribution class_distribution(const std::vector<double>& returns, double threshold);

struct ThresholdSearchResult {
    double best_threshold = 0.0;
    ClassDistribution distribution;
};

// Default grid 0.1, 0.2, ..., 1.0.
std::vector<double> default_threshold_grid();

// Picks the grid value minimizing the majority-minority count gap; ties go
// to the smaller threshold. Errors on empty returns or empty grid.
ThresholdSearchResult threshold_search(const std::vector<double>& returns,
                                       const std::vector<double>& grid);

}  // namespace newsrank::ingest
