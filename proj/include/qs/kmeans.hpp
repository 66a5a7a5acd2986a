#pragma once

#include <cstdint>
#include <vector>

#include "qs/data.hpp"

namespace qs {

struct KMeansResult {
    std::vector<int> labels;
    std::vector<double> centroids;  // row-major, n_clusters x n_features
    double inertia = 0.0;
    std::size_t iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Converges when assignments
// stabilize or max_iters is reached. An emptied cluster is re-seeded from
// the point farthest from its centroid.
KMeansResult kmeans(const Dataset& data, std::size_t n_clusters,
                    std::uint64_t rng_seed, std::size_t max_iters = 300);

}  // namespace qs
