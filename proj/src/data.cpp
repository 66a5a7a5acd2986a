#include "qs/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qs {

const char* to_string(Scaling s) {
    return s == Scaling::ZScore ? "zscore" : "minmax";
}

Scaling scaling_from_string(const std::string& name) {
    if (name == "zscore") return Scaling::ZScore;
    if (name == "minmax") return Scaling::MinMax;
    throw std::invalid_argument("unknown scaling mode: " + name);
}

Dataset::Dataset(std::size_t n_samples, std::size_t n_features)
    : n_samples_(n_samples),
      n_features_(n_features),
      x_(n_samples * n_features, 0.0) {}

std::span<const double> Dataset::row(std::size_t i) const {
    return std::span<const double>(x_).subspan(i * n_features_, n_features_);
}

std::span<double> Dataset::row_mut(std::size_t i) {
    return std::span<double>(x_).subspan(i * n_features_, n_features_);
}

double Dataset::at(std::size_t i, std::size_t j) const {
    return x_[i * n_features_ + j];
}

double& Dataset::at(std::size_t i, std::size_t j) {
    return x_[i * n_features_ + j];
}

void Dataset::set_labels(std::vector<int> y) {
    if (!y.empty() && y.size() != n_samples_) {
        throw std::invalid_argument("set_labels: label count mismatch");
    }
    y_ = std::move(y);
}

std::size_t Dataset::n_classes() const {
    return std::set<int>(y_.begin(), y_.end()).size();
}

std::vector<double> Dataset::column(std::size_t j) const {
    std::vector<double> out(n_samples_);
    for (std::size_t i = 0; i < n_samples_; ++i) out[i] = at(i, j);
    return out;
}

Dataset Dataset::select_features(std::span<const std::size_t> indices) const {
    for (std::size_t j : indices) {
        if (j >= n_features_) {
            throw std::out_of_range("select_features: index out of range");
        }
    }
    Dataset out(n_samples_, indices.size());
    for (std::size_t i = 0; i < n_samples_; ++i) {
        for (std::size_t jj = 0; jj < indices.size(); ++jj) {
            out.at(i, jj) = at(i, indices[jj]);
        }
    }
    out.y_ = y_;
    return out;
}

namespace {

double parse_cell(const std::string& cell, std::size_t line_no, std::size_t col) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    while (last != first && (*(last - 1) == ' ' || *(last - 1) == '\t' ||
                             *(last - 1) == '\r')) --last;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw std::runtime_error("csv: non-numeric cell at row " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(col + 1) + ": '" + cell + "'");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error("csv: non-finite value at row " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(col + 1));
    }
    return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("csv: cannot open " + path.string());
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool header_skipped = !opts.has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_skipped) {
            header_skipped = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (width == 0) {
            width = cells.size();
        } else if (cells.size() != width) {
            throw std::runtime_error(
                "csv: ragged row " + std::to_string(line_no) + " has " +
                std::to_string(cells.size()) + " cells, expected " +
                std::to_string(width));
        }
        std::vector<double> values;
        values.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            values.push_back(parse_cell(cells[c], line_no, c));
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty()) {
        throw std::runtime_error("csv: empty file " + path.string());
    }

    std::size_t label_col = width;  // sentinel: no label
    if (opts.has_labels) {
        if (width < 2) {
            throw std::runtime_error("csv: labeled file needs >= 2 columns");
        }
        label_col = opts.label_column.value_or(width - 1);
        if (label_col >= width) {
            throw std::runtime_error("csv: label column out of range");
        }
    }

    const std::size_t n_features = opts.has_labels ? width - 1 : width;
    Dataset data(rows.size(), n_features);
    std::vector<int> labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t jj = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_col) {
                labels.push_back(static_cast<int>(std::llround(rows[i][c])));
            } else {
                data.at(i, jj++) = rows[i][c];
            }
        }
    }
    if (opts.has_labels) data.set_labels(std::move(labels));
    return data;
}

void save_csv(const std::filesystem::path& path, const Dataset& data,
              bool write_labels) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("csv: cannot write " + path.string());
    }
    out.precision(17);
    const bool labels = write_labels && data.has_labels();
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        auto row = data.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j > 0) out << ',';
            out << row[j];
        }
        if (labels) out << ',' << data.labels()[i];
        out << '\n';
    }
}

ScalerState fit_scaler(const Dataset& data, Scaling mode) {
    if (mode == Scaling::ZScore && data.n_samples() < 2) {
        throw std::invalid_argument("fit_scaler: zscore needs >= 2 samples");
    }
    ScalerState state;
    state.mode = mode;
    state.a.resize(data.n_features());
    state.b.resize(data.n_features());
    const double n = static_cast<double>(data.n_samples());
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        if (mode == Scaling::ZScore) {
            double mean = 0.0;
            for (std::size_t i = 0; i < data.n_samples(); ++i) mean += data.at(i, j);
            mean /= n;
            double var = 0.0;
            for (std::size_t i = 0; i < data.n_samples(); ++i) {
                const double d = data.at(i, j) - mean;
                var += d * d;
            }
            state.a[j] = mean;
            state.b[j] = std::sqrt(var / n);
        } else {
            double lo = data.at(0, j), hi = data.at(0, j);
            for (std::size_t i = 1; i < data.n_samples(); ++i) {
                lo = std::min(lo, data.at(i, j));
                hi = std::max(hi, data.at(i, j));
            }
            state.a[j] = lo;
            state.b[j] = hi;
        }
    }
    return state;
}

void apply_scaler(Dataset& data, const ScalerState& state) {
    if (state.a.size() != data.n_features()) {
        throw std::invalid_argument("apply_scaler: feature count mismatch");
    }
    for (std::size_t j = 0; j < data.n_features(); ++j) {
        if (state.mode == Scaling::ZScore) {
            const double std_dev = state.b[j];
            if (std_dev == 0.0) continue;  // zero-variance column passes through
            for (std::size_t i = 0; i < data.n_samples(); ++i) {
                data.at(i, j) = (data.at(i, j) - state.a[j]) / std_dev;
            }
        } else {
            const double range = state.b[j] - state.a[j];
            if (range == 0.0) continue;
            for (std::size_t i = 0; i < data.n_samples(); ++i) {
                data.at(i, j) = (data.at(i, j) - state.a[j]) / range;
            }
        }
    }
}

ScalerState fit_transform(Dataset& data, Scaling mode) {
    ScalerState state = fit_scaler(data, mode);
    apply_scaler(data, state);
    return state;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double test_fraction,
                                             std::uint64_t rng_seed) {
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
        throw std::invalid_argument("train_test_split: fraction out of range");
    }
    std::vector<std::size_t> order(data.n_samples());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(rng_seed);
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(data.n_samples())));
    const std::size_t n_train = data.n_samples() - n_test;

    Dataset train(n_train, data.n_features());
    Dataset test(n_test, data.n_features());
    std::vector<int> y_train, y_test;
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        const std::size_t src = order[i];
        if (i < n_train) {
            std::copy(data.row(src).begin(), data.row(src).end(),
                      train.row_mut(i).begin());
            if (data.has_labels()) y_train.push_back(data.labels()[src]);
        } else {
            std::copy(data.row(src).begin(), data.row(src).end(),
                      test.row_mut(i - n_train).begin());
            if (data.has_labels()) y_test.push_back(data.labels()[src]);
        }
    }
    train.set_labels(std::move(y_train));
    test.set_labels(std::move(y_test));
    return {std::move(train), std::move(test)};
}

Dataset generate_madelon_like(const SyntheticSpec& spec,
                              SyntheticGroundTruth* ground_truth) {
    if (spec.n_samples == 0 || spec.n_informative == 0 || spec.n_classes < 2 ||
        spec.n_clusters_per_class == 0) {
        throw std::invalid_argument("generate_madelon_like: invalid spec");
    }
    const std::size_t n_features = spec.n_features();
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 1);

    // Each class is a mixture of n_clusters_per_class Gaussian clusters on
    // distinct random hypercube corners, capped at the number of available
    // corners; classes take clusters round-robin so the mixture sizes stay
    // balanced.
    const std::size_t max_corners =
        spec.n_informative >= 62
            ? std::numeric_limits<std::size_t>::max()
            : (std::size_t{1} << spec.n_informative);
    const std::size_t n_clusters =
        std::max(spec.n_classes,
                 std::min(spec.n_classes * spec.n_clusters_per_class,
                          max_corners));
    std::vector<std::vector<double>> centroids;
    std::vector<std::size_t> cluster_class;
    std::set<std::vector<int>> used;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        std::vector<int> corner(spec.n_informative);
        do {
            for (auto& v : corner) v = coin(rng) * 2 - 1;
        } while (!used.insert(corner).second && used.size() < max_corners);
        std::vector<double> centroid(spec.n_informative);
        for (std::size_t d = 0; d < spec.n_informative; ++d) {
            centroid[d] = spec.class_separation * corner[d];
        }
        centroids.push_back(std::move(centroid));
        cluster_class.push_back(c % spec.n_classes);
    }

    // Unit-norm mixing coefficients for the redundant features.
    std::vector<std::vector<double>> mix(spec.n_redundant);
    for (auto& coeffs : mix) {
        coeffs.resize(spec.n_informative);
        double norm = 0.0;
        for (auto& v : coeffs) {
            v = unif(rng);
            norm += v * v;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) { coeffs[0] = 1.0; norm = 1.0; }
        for (auto& v : coeffs) v /= norm;
    }

    Dataset data(spec.n_samples, n_features);
    std::vector<int> labels(spec.n_samples);
    std::uniform_int_distribution<std::size_t> cluster_dist(0, n_clusters - 1);

    std::vector<double> informative(spec.n_informative);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        const std::size_t cluster = cluster_dist(rng);
        labels[i] = static_cast<int>(cluster_class[cluster]);
        for (std::size_t d = 0; d < spec.n_informative; ++d) {
            informative[d] = centroids[cluster][d] + normal(rng);
            data.at(i, d) = informative[d];
        }
        for (std::size_t r = 0; r < spec.n_redundant; ++r) {
            double v = 0.0;
            for (std::size_t d = 0; d < spec.n_informative; ++d) {
                v += mix[r][d] * informative[d];
            }
            data.at(i, spec.n_informative + r) = v;
        }
        for (std::size_t k = 0; k < spec.n_noise; ++k) {
            data.at(i, spec.n_informative + spec.n_redundant + k) = normal(rng);
        }
    }
    data.set_labels(std::move(labels));

    // Column shuffle; position[j] = where original column j landed.
    std::vector<std::size_t> position(n_features);
    std::iota(position.begin(), position.end(), std::size_t{0});
    std::shuffle(position.begin(), position.end(), rng);

    Dataset shuffled(spec.n_samples, n_features);
    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        for (std::size_t j = 0; j < n_features; ++j) {
            shuffled.at(i, position[j]) = data.at(i, j);
        }
    }
    shuffled.set_labels(std::vector<int>(data.labels().begin(), data.labels().end()));

    if (ground_truth) {
        ground_truth->informative.assign(position.begin(),
                                         position.begin() + spec.n_informative);
        ground_truth->redundant.assign(
            position.begin() + spec.n_informative,
            position.begin() + spec.n_informative + spec.n_redundant);
        ground_truth->noise.assign(
            position.begin() + spec.n_informative + spec.n_redundant,
            position.end());
    }
    return shuffled;
}

Dataset generate_gaussian_matrix(std::size_t n_samples, std::size_t n_features,
                                 std::uint64_t rng_seed) {
    if (n_samples == 0 || n_features == 0) {
        throw std::invalid_argument("generate_gaussian_matrix: invalid dimensions");
    }
    Dataset data(n_samples, n_features);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < n_samples; ++i) {
        for (double& v : data.row_mut(i)) v = normal(rng);
    }
    return data;
}

}  // namespace qs
