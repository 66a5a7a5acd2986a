#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qs/data.hpp"

namespace qs {

// Percent agreement between cluster and class labels under the optimal
// one-to-one matching (Hungarian assignment).
double clustering_accuracy(const std::vector<int>& cluster_labels,
                           const std::vector<int>& true_labels);

struct ClusteringAccuracy {
    double mean = 0.0;
    double std_dev = 0.0;
    std::size_t repeats = 0;
};

// K-means repeated `repeats` times with seeds derived from rng_seed; the
// per-run accuracies are aggregated as mean +- std.
ClusteringAccuracy clustering_accuracy_repeated(const Dataset& data,
                                                std::size_t n_clusters,
                                                std::size_t repeats,
                                                std::uint64_t rng_seed);

// energy[kWh] = seconds * watts / 3.6e6
double estimate_energy_kwh(double wall_time_seconds, double device_power_watts);

struct EvalReport {
    std::size_t k_selected = 0;
    ClusteringAccuracy clustering;
    std::optional<double> classification_accuracy;  // absent without labels
    double wall_time_seconds = 0.0;
    std::size_t peak_memory_bytes = 0;
    std::size_t parameter_count = 0;
    std::optional<double> estimated_energy_kwh;
    std::uint64_t rng_seed = 0;
};

// Four metrics of one (dataset, k, method) cell. Higher is better for the
// accuracies, lower for time and memory.
struct MetricCell {
    double clustering_accuracy = 0.0;
    double classification_accuracy = 0.0;
    double wall_time_seconds = 0.0;
    double peak_memory_bytes = 0.0;
};

struct MethodScoreTable {
    // (dataset, k) -> method -> metrics
    std::map<std::pair<std::string, std::size_t>, std::map<std::string, MetricCell>>
        cells;

    void add(const std::string& dataset, std::size_t k, const std::string& method,
             const MetricCell& metrics);
};

// Per (dataset, k, metric): 1 point to the best and second-best method.
std::map<std::string, double> score1(const MethodScoreTable& table);

// Per (dataset, k): min-max normalize each metric to [0,1] with 1 = best;
// zero-range metrics contribute 1 to every method.
std::map<std::string, double> score2(const MethodScoreTable& table);

}  // namespace qs
