#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qs {

enum class Scaling : std::uint8_t { ZScore = 0, MinMax = 1 };

const char* to_string(Scaling s);
Scaling scaling_from_string(const std::string& name);

// Per-column fitted statistics: (mean, std) for z-score, (min, max) for
// min-max. Zero-variance columns pass through unscaled.
struct ScalerState {
    Scaling mode = Scaling::ZScore;
    std::vector<double> a;  // mean or min
    std::vector<double> b;  // std or max
};

class Dataset {
public:
    Dataset() = default;
    Dataset(std::size_t n_samples, std::size_t n_features);

    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_features() const { return n_features_; }

    std::span<const double> row(std::size_t i) const;
    std::span<double> row_mut(std::size_t i);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t i, std::size_t j);
    std::span<const double> values() const { return x_; }

    bool has_labels() const { return !y_.empty(); }
    std::span<const int> labels() const { return y_; }
    void set_labels(std::vector<int> y);
    std::size_t n_classes() const;

    std::vector<double> column(std::size_t j) const;

    // Copy of the listed columns, labels carried over.
    Dataset select_features(std::span<const std::size_t> indices) const;

private:
    std::size_t n_samples_ = 0;
    std::size_t n_features_ = 0;
    std::vector<double> x_;  // row-major
    std::vector<int> y_;
};

struct CsvOptions {
    bool has_header = false;
    bool has_labels = false;
    // Column holding the label; defaults to the last column.
    std::optional<std::size_t> label_column;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});
void save_csv(const std::filesystem::path& path, const Dataset& data,
              bool write_labels = true);

ScalerState fit_scaler(const Dataset& data, Scaling mode);
void apply_scaler(Dataset& data, const ScalerState& state);
ScalerState fit_transform(Dataset& data, Scaling mode);

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t rng_seed);

struct SyntheticSpec {
    std::size_t n_samples = 2600;
    std::size_t n_informative = 5;
    std::size_t n_redundant = 15;
    std::size_t n_noise = 480;
    std::size_t n_classes = 2;
    // Madelon composition: each class is a mixture of Gaussian clusters on
    // distinct hypercube corners (the real Madelon uses 16 per class), which
    // is what makes the distractor features genuinely harmful to wide
    // classifiers. Capped at the 2^n_informative available corners.
    std::size_t n_clusters_per_class = 16;
    double class_separation = 3.0;
    std::uint64_t rng_seed = 0;

    std::size_t n_features() const {
        return n_informative + n_redundant + n_noise;
    }
};

// Which shuffled column ended up holding which kind of feature.
struct SyntheticGroundTruth {
    std::vector<std::size_t> informative;
    std::vector<std::size_t> redundant;
    std::vector<std::size_t> noise;
};

// Labeled clustered dataset in the style of Madelon: informative features
// are mixtures of Gaussian clusters on distinct per-class hypercube corners
// (n_clusters_per_class each, XOR-style class structure), redundant features
// are random unit-norm linear combinations of the informative ones, noise
// features are i.i.d. standard normal. Columns are shuffled; the returned
// ground truth maps the shuffled positions.
Dataset generate_madelon_like(const SyntheticSpec& spec,
                              SyntheticGroundTruth* ground_truth = nullptr);

// Unlabeled i.i.d. N(0,1) matrix for timing benchmarks.
Dataset generate_gaussian_matrix(std::size_t n_samples, std::size_t n_features,
                                 std::uint64_t rng_seed);

}  // namespace qs
