#include "qs/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace qs {

namespace {

double sq_dist(std::span<const double> a, const double* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

KMeansResult kmeans(const Dataset& data, std::size_t n_clusters,
                    std::uint64_t rng_seed, std::size_t max_iters) {
    const std::size_t n = data.n_samples();
    const std::size_t d = data.n_features();
    if (n_clusters == 0 || n_clusters > n) {
        throw std::invalid_argument("kmeans: n_clusters must be in [1, n_samples]");
    }

    std::mt19937_64 rng(rng_seed);
    KMeansResult result;
    result.centroids.assign(n_clusters * d, 0.0);

    // k-means++ seeding
    {
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        const std::size_t first = pick(rng);
        std::copy(data.row(first).begin(), data.row(first).end(),
                  result.centroids.begin());
        std::vector<double> min_dist(n, std::numeric_limits<double>::max());
        for (std::size_t c = 1; c < n_clusters; ++c) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double dist =
                    sq_dist(data.row(i), &result.centroids[(c - 1) * d], d);
                min_dist[i] = std::min(min_dist[i], dist);
                total += min_dist[i];
            }
            std::size_t chosen = 0;
            if (total > 0.0) {
                std::uniform_real_distribution<double> unif(0.0, total);
                double target = unif(rng);
                for (std::size_t i = 0; i < n; ++i) {
                    target -= min_dist[i];
                    if (target <= 0.0) { chosen = i; break; }
                }
            } else {
                chosen = pick(rng);
            }
            std::copy(data.row(chosen).begin(), data.row(chosen).end(),
                      result.centroids.begin() + c * d);
        }
    }

    result.labels.assign(n, -1);
    std::vector<std::size_t> counts(n_clusters, 0);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            int best_c = 0;
            for (std::size_t c = 0; c < n_clusters; ++c) {
                const double dist = sq_dist(data.row(i), &result.centroids[c * d], d);
                if (dist < best) { best = dist; best_c = static_cast<int>(c); }
            }
            if (result.labels[i] != best_c) {
                result.labels[i] = best_c;
                changed = true;
            }
        }
        result.iterations = iter + 1;
        if (!changed && iter > 0) break;

        std::fill(result.centroids.begin(), result.centroids.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = static_cast<std::size_t>(result.labels[i]);
            counts[c]++;
            auto row = data.row(i);
            for (std::size_t j = 0; j < d; ++j) result.centroids[c * d + j] += row[j];
        }
        for (std::size_t c = 0; c < n_clusters; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < d; ++j) {
                result.centroids[c * d + j] /= static_cast<double>(counts[c]);
            }
        }
        for (std::size_t c = 0; c < n_clusters; ++c) {
            if (counts[c] != 0) continue;
            // Re-seed from the point farthest from its own centroid.
            double worst = -1.0;
            std::size_t far_idx = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t ci = static_cast<std::size_t>(result.labels[i]);
                if (counts[ci] <= 1) continue;
                const double dist =
                    sq_dist(data.row(i), &result.centroids[ci * d], d);
                if (dist > worst) { worst = dist; far_idx = i; }
            }
            std::copy(data.row(far_idx).begin(), data.row(far_idx).end(),
                      result.centroids.begin() + c * d);
            counts[c] = 1;
        }
        if (!changed) break;
    }

    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = static_cast<std::size_t>(result.labels[i]);
        result.inertia += sq_dist(data.row(i), &result.centroids[c * d], d);
    }
    return result;
}

}  // namespace qs
