#include "qs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qs/hungarian.hpp"
#include "qs/kmeans.hpp"

namespace qs {

double clustering_accuracy(const std::vector<int>& cluster_labels,
                           const std::vector<int>& true_labels) {
    if (cluster_labels.size() != true_labels.size()) {
        throw std::invalid_argument("clustering_accuracy: length mismatch");
    }
    if (cluster_labels.empty()) {
        throw std::invalid_argument("clustering_accuracy: empty label vectors");
    }
    const std::size_t agreement = best_match_agreement(cluster_labels, true_labels);
    return 100.0 * static_cast<double>(agreement) /
           static_cast<double>(cluster_labels.size());
}

ClusteringAccuracy clustering_accuracy_repeated(const Dataset& data,
                                                std::size_t n_clusters,
                                                std::size_t repeats,
                                                std::uint64_t rng_seed) {
    if (!data.has_labels()) {
        throw std::invalid_argument("clustering_accuracy_repeated: no labels");
    }
    if (repeats == 0) {
        throw std::invalid_argument("clustering_accuracy_repeated: repeats == 0");
    }
    const std::vector<int> truth(data.labels().begin(), data.labels().end());
    std::vector<double> runs;
    runs.reserve(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        const std::uint64_t seed = rng_seed * 0x9e3779b97f4a7c15ull + r + 1;
        const auto result = kmeans(data, n_clusters, seed);
        runs.push_back(clustering_accuracy(result.labels, truth));
    }
    ClusteringAccuracy acc;
    acc.repeats = repeats;
    for (double v : runs) acc.mean += v;
    acc.mean /= static_cast<double>(repeats);
    for (double v : runs) acc.std_dev += (v - acc.mean) * (v - acc.mean);
    acc.std_dev = std::sqrt(acc.std_dev / static_cast<double>(repeats));
    return acc;
}

double estimate_energy_kwh(double wall_time_seconds, double device_power_watts) {
    if (wall_time_seconds < 0.0 || device_power_watts < 0.0) {
        throw std::invalid_argument("estimate_energy_kwh: negative input");
    }
    return wall_time_seconds * device_power_watts / 3.6e6;
}

void MethodScoreTable::add(const std::string& dataset, std::size_t k,
                           const std::string& method, const MetricCell& metrics) {
    cells[{dataset, k}][method] = metrics;
}

namespace {

// Metric accessors with orientation: value transformed so higher is better.
struct MetricView {
    double (*get)(const MetricCell&);
    bool higher_better;
};

constexpr MetricView kMetrics[] = {
    {[](const MetricCell& c) { return c.clustering_accuracy; }, true},
    {[](const MetricCell& c) { return c.classification_accuracy; }, true},
    {[](const MetricCell& c) { return c.wall_time_seconds; }, false},
    {[](const MetricCell& c) { return c.peak_memory_bytes; }, false},
};

}  // namespace

std::map<std::string, double> score1(const MethodScoreTable& table) {
    std::map<std::string, double> totals;
    for (const auto& [key, methods] : table.cells) {
        if (methods.size() < 2) {
            throw std::invalid_argument("score1: need >= 2 methods per cell");
        }
        for (const auto& [name, cell] : methods) totals.emplace(name, 0.0);
        for (const MetricView& metric : kMetrics) {
            std::vector<std::pair<double, std::string>> ranked;
            for (const auto& [name, cell] : methods) {
                double v = metric.get(cell);
                ranked.emplace_back(metric.higher_better ? -v : v, name);
            }
            std::sort(ranked.begin(), ranked.end());
            totals[ranked[0].second] += 1.0;
            totals[ranked[1].second] += 1.0;
        }
    }
    return totals;
}

std::map<std::string, double> score2(const MethodScoreTable& table) {
    std::map<std::string, double> totals;
    for (const auto& [key, methods] : table.cells) {
        if (methods.size() < 2) {
            throw std::invalid_argument("score2: need >= 2 methods per cell");
        }
        for (const auto& [name, cell] : methods) totals.emplace(name, 0.0);
        for (const MetricView& metric : kMetrics) {
            double lo = std::numeric_limits<double>::max();
            double hi = std::numeric_limits<double>::lowest();
            for (const auto& [name, cell] : methods) {
                const double v = metric.get(cell);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            for (const auto& [name, cell] : methods) {
                double normalized;
                if (hi == lo) {
                    normalized = 1.0;  // degenerate cell: everyone gets credit
                } else {
                    normalized = (metric.get(cell) - lo) / (hi - lo);
                    if (!metric.higher_better) normalized = 1.0 - normalized;
                }
                totals[name] += normalized;
            }
        }
    }
    return totals;
}

}  // namespace qs
