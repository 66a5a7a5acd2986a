#include "qs/sparse_weights.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace qs {

SparseWeights::SparseWeights(std::size_t n_in, std::size_t n_out)
    : n_in_(n_in), n_out_(n_out), row_ptr_(n_in + 1, 0) {
    if (n_in == 0 || n_out == 0) {
        throw std::invalid_argument("SparseWeights: dimensions must be positive");
    }
}

double SparseWeights::connection_probability(std::size_t n_in, std::size_t n_out,
                                             double epsilon) {
    if (n_in == 0 || n_out == 0) {
        throw std::invalid_argument("connection_probability: dimensions must be positive");
    }
    if (epsilon <= 0.0) {
        throw std::invalid_argument("connection_probability: epsilon must be positive");
    }
    double p = epsilon * (static_cast<double>(n_in) + static_cast<double>(n_out)) /
               (static_cast<double>(n_in) * static_cast<double>(n_out));
    return std::min(1.0, p);
}

SparseWeights SparseWeights::erdos_renyi(std::size_t n_in, std::size_t n_out,
                                         double epsilon, std::uint64_t seed,
                                         double init_scale) {
    const double p = connection_probability(n_in, n_out, epsilon);
    SparseWeights w(n_in, n_out);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> weight_dist(0.0, init_scale);

    const std::uint64_t total = static_cast<std::uint64_t>(n_in) * n_out;
    std::vector<std::uint32_t> rows;
    if (p >= 1.0) {
        rows.reserve(total);
        w.cols_.reserve(total);
        w.weights_.reserve(total);
        for (std::uint64_t k = 0; k < total; ++k) {
            rows.push_back(static_cast<std::uint32_t>(k / n_out));
            w.cols_.push_back(static_cast<std::uint32_t>(k % n_out));
            w.weights_.push_back(weight_dist(rng));
        }
    } else {
        // Geometric skips over the flattened cell index; equivalent to a
        // Bernoulli(p) scan over all cells.
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double log1mp = std::log1p(-p);
        const std::size_t expect =
            static_cast<std::size_t>(static_cast<double>(total) * p * 1.1) + 16;
        rows.reserve(expect);
        w.cols_.reserve(expect);
        w.weights_.reserve(expect);
        std::uint64_t k = 0;
        while (true) {
            double u = unif(rng);
            if (u <= 0.0) u = std::numeric_limits<double>::min();
            std::uint64_t skip = static_cast<std::uint64_t>(std::log(u) / log1mp);
            if (skip > total || k + skip >= total) break;
            k += skip;
            rows.push_back(static_cast<std::uint32_t>(k / n_out));
            w.cols_.push_back(static_cast<std::uint32_t>(k % n_out));
            w.weights_.push_back(weight_dist(rng));
            ++k;
        }
    }
    w.rebuild_row_ptr(rows);
    return w;
}

SparseWeights SparseWeights::from_triplets(std::size_t n_in, std::size_t n_out,
                                           std::vector<Triplet> entries) {
    SparseWeights w(n_in, n_out);
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::uint32_t> rows;
    rows.reserve(entries.size());
    w.cols_.reserve(entries.size());
    w.weights_.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const Triplet& t = entries[k];
        if (t.row >= n_in || t.col >= n_out) {
            throw std::invalid_argument("from_triplets: index out of range");
        }
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            throw std::invalid_argument("from_triplets: duplicate (row, col) entry");
        }
        rows.push_back(t.row);
        w.cols_.push_back(t.col);
        w.weights_.push_back(t.weight);
    }
    w.rebuild_row_ptr(rows);
    return w;
}

void SparseWeights::rebuild_row_ptr(const std::vector<std::uint32_t>& rows) {
    row_ptr_.assign(n_in_ + 1, 0);
    for (std::uint32_t r : rows) row_ptr_[r + 1]++;
    for (std::size_t i = 0; i < n_in_; ++i) row_ptr_[i + 1] += row_ptr_[i];
}

double SparseWeights::density() const {
    return static_cast<double>(nnz()) /
           (static_cast<double>(n_in_) * static_cast<double>(n_out_));
}

std::uint32_t SparseWeights::entry_row(std::size_t k) const {
    auto it = std::upper_bound(row_ptr_.begin(), row_ptr_.end(), k);
    return static_cast<std::uint32_t>(std::distance(row_ptr_.begin(), it) - 1);
}

Triplet SparseWeights::entry(std::size_t k) const {
    return Triplet{entry_row(k), cols_[k], weights_[k]};
}

std::vector<Triplet> SparseWeights::triplets() const {
    std::vector<Triplet> out;
    out.reserve(nnz());
    for (std::size_t i = 0; i < n_in_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            out.push_back(Triplet{static_cast<std::uint32_t>(i), cols_[k], weights_[k]});
        }
    }
    return out;
}

void SparseWeights::forward_into(std::span<const double> x,
                                 std::span<double> out) const {
    if (x.size() != n_in_ || out.size() != n_out_) {
        throw std::invalid_argument("forward_into: dimension mismatch");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < n_in_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            out[cols_[k]] += weights_[k] * xi;
        }
    }
}

std::vector<double> SparseWeights::forward(std::span<const double> x) const {
    std::vector<double> out(n_out_);
    forward_into(x, out);
    return out;
}

void SparseWeights::backward_into(std::span<const double> upstream,
                                  std::span<double> out) const {
    if (upstream.size() != n_out_ || out.size() != n_in_) {
        throw std::invalid_argument("backward_into: dimension mismatch");
    }
    for (std::size_t i = 0; i < n_in_; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            acc += weights_[k] * upstream[cols_[k]];
        }
        out[i] = acc;
    }
}

void SparseWeights::accumulate_gradients(std::span<const double> upstream,
                                         std::span<const double> x,
                                         std::span<double> grad) const {
    if (upstream.size() != n_out_ || x.size() != n_in_) {
        throw std::invalid_argument("accumulate_gradients: dimension mismatch");
    }
    if (grad.size() != nnz()) {
        throw std::invalid_argument("accumulate_gradients: misaligned gradient buffer");
    }
    for (std::size_t i = 0; i < n_in_; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            grad[k] += upstream[cols_[k]] * xi;
        }
    }
}

void SparseWeights::backward_accumulate(std::span<const double> upstream,
                                        std::span<const double> x,
                                        std::span<double> downstream,
                                        std::span<double> grad) const {
    if (upstream.size() != n_out_ || x.size() != n_in_ ||
        downstream.size() != n_in_) {
        throw std::invalid_argument("backward_accumulate: dimension mismatch");
    }
    if (grad.size() != nnz()) {
        throw std::invalid_argument("backward_accumulate: misaligned gradient buffer");
    }
    for (std::size_t i = 0; i < n_in_; ++i) {
        const double xi = x[i];
        double acc = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const double up = upstream[cols_[k]];
            acc += weights_[k] * up;
            grad[k] += up * xi;
        }
        downstream[i] = acc;
    }
}

void SparseWeights::apply_update(std::span<const double> grad,
                                 double learning_rate) {
    if (grad.size() != nnz()) {
        throw std::invalid_argument("apply_update: misaligned gradient buffer");
    }
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        weights_[k] -= learning_rate * grad[k];
    }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
SparseWeights::magnitude_partition(double zeta) const {
    if (zeta < 0.0 || zeta >= 1.0) {
        throw std::invalid_argument("magnitude_partition: zeta must be in [0, 1)");
    }
    std::vector<std::size_t> positives;
    std::vector<std::size_t> negatives;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (weights_[k] > 0.0) positives.push_back(k);
        else if (weights_[k] < 0.0) negatives.push_back(k);
    }
    const std::size_t n_pos = static_cast<std::size_t>(zeta * static_cast<double>(positives.size()));
    const std::size_t n_neg = static_cast<std::size_t>(zeta * static_cast<double>(negatives.size()));

    // Smallest positives; ties by entry index.
    std::partial_sort(positives.begin(), positives.begin() + n_pos, positives.end(),
                      [this](std::size_t a, std::size_t b) {
                          return weights_[a] != weights_[b] ? weights_[a] < weights_[b] : a < b;
                      });
    // Largest (closest to zero) negatives; ties by entry index.
    std::partial_sort(negatives.begin(), negatives.begin() + n_neg, negatives.end(),
                      [this](std::size_t a, std::size_t b) {
                          return weights_[a] != weights_[b] ? weights_[a] > weights_[b] : a < b;
                      });

    std::vector<std::size_t> removal(positives.begin(), positives.begin() + n_pos);
    removal.insert(removal.end(), negatives.begin(), negatives.begin() + n_neg);
    std::sort(removal.begin(), removal.end());

    std::vector<std::size_t> survivors;
    survivors.reserve(nnz() - removal.size());
    std::size_t r = 0;
    for (std::size_t k = 0; k < nnz(); ++k) {
        if (r < removal.size() && removal[r] == k) { ++r; continue; }
        survivors.push_back(k);
    }
    return {std::move(removal), std::move(survivors)};
}

void SparseWeights::remove_entries(const std::vector<std::size_t>& removal) {
    if (removal.empty()) return;
    std::vector<std::uint32_t> rows;
    rows.reserve(nnz() - removal.size());
    std::vector<std::uint32_t> new_cols;
    std::vector<double> new_weights;
    new_cols.reserve(nnz() - removal.size());
    new_weights.reserve(nnz() - removal.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < n_in_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (r < removal.size() && removal[r] == k) { ++r; continue; }
            rows.push_back(static_cast<std::uint32_t>(i));
            new_cols.push_back(cols_[k]);
            new_weights.push_back(weights_[k]);
        }
    }
    cols_ = std::move(new_cols);
    weights_ = std::move(new_weights);
    rebuild_row_ptr(rows);
}

std::vector<std::uint64_t> SparseWeights::position_keys() const {
    std::vector<std::uint64_t> keys;
    keys.reserve(nnz());
    for (std::size_t i = 0; i < n_in_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            keys.push_back(static_cast<std::uint64_t>(i) * n_out_ + cols_[k]);
        }
    }
    return keys;
}

void SparseWeights::random_regrow(std::size_t n_new, std::mt19937_64& rng,
                                  double weight_scale) {
    random_regrow(n_new, rng, {}, weight_scale);
}

std::size_t SparseWeights::random_regrow(
    std::size_t n_new, std::mt19937_64& rng,
    const std::vector<std::uint64_t>& watched_positions, double weight_scale) {
    const std::uint64_t total = static_cast<std::uint64_t>(n_in_) * n_out_;
    if (nnz() + n_new > total) {
        throw std::invalid_argument("random_regrow: matrix cannot hold that many entries");
    }
    if (n_new == 0) return 0;

    std::unordered_set<std::uint64_t> occupied;
    occupied.reserve(nnz() + n_new);
    for (std::uint64_t key : position_keys()) occupied.insert(key);
    std::unordered_set<std::uint64_t> watched(watched_positions.begin(),
                                              watched_positions.end());

    std::uniform_int_distribution<std::uint64_t> cell(0, total - 1);
    std::normal_distribution<double> weight_dist(0.0, weight_scale);

    std::vector<Triplet> added;
    added.reserve(n_new);
    std::size_t collisions = 0;
    while (added.size() < n_new) {
        const std::uint64_t key = cell(rng);
        if (!occupied.insert(key).second) continue;
        if (watched.count(key)) ++collisions;
        added.push_back(Triplet{static_cast<std::uint32_t>(key / n_out_),
                                static_cast<std::uint32_t>(key % n_out_),
                                weight_dist(rng)});
    }

    std::vector<Triplet> merged = triplets();
    merged.insert(merged.end(), added.begin(), added.end());
    *this = from_triplets(n_in_, n_out_, std::move(merged));
    return collisions;
}

bool SparseWeights::operator==(const SparseWeights& other) const {
    return n_in_ == other.n_in_ && n_out_ == other.n_out_ &&
           row_ptr_ == other.row_ptr_ && cols_ == other.cols_ &&
           weights_ == other.weights_;
}

}  // namespace qs
