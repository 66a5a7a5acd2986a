#pragma once

#include <cstddef>
#include <vector>

namespace qs {

// Minimum-cost one-to-one assignment on a square cost matrix (row-major).
// Returns for each row the assigned column.
std::vector<std::size_t> hungarian_min_cost(const std::vector<double>& cost,
                                            std::size_t n);

// Best agreement (count of matched samples) between two label vectors under
// an optimal one-to-one relabeling.
std::size_t best_match_agreement(const std::vector<int>& a,
                                 const std::vector<int>& b);

}  // namespace qs
