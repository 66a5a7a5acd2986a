#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace qs {

struct Triplet {
    std::uint32_t row;
    std::uint32_t col;
    double weight;
};

// One sparsely connected weight matrix (n_in x n_out), stored compressed by
// row. Entry order is the canonical (row, col)-sorted order; every per-entry
// buffer (gradients, removal indices) is aligned with it.
class SparseWeights {
public:
    SparseWeights() = default;
    SparseWeights(std::size_t n_in, std::size_t n_out);

    // Each of the n_in*n_out possible connections exists independently with
    // probability min(1, epsilon*(n_in+n_out)/(n_in*n_out)). Existing weights
    // are drawn from N(0, init_scale^2).
    static SparseWeights erdos_renyi(std::size_t n_in, std::size_t n_out,
                                     double epsilon, std::uint64_t seed,
                                     double init_scale = 0.1);

    static double connection_probability(std::size_t n_in, std::size_t n_out,
                                         double epsilon);

    static SparseWeights from_triplets(std::size_t n_in, std::size_t n_out,
                                       std::vector<Triplet> entries);

    std::size_t n_in() const { return n_in_; }
    std::size_t n_out() const { return n_out_; }
    std::size_t nnz() const { return cols_.size(); }
    double density() const;

    std::uint32_t entry_row(std::size_t k) const;
    std::uint32_t entry_col(std::size_t k) const { return cols_[k]; }
    double entry_weight(std::size_t k) const { return weights_[k]; }
    Triplet entry(std::size_t k) const;
    std::vector<Triplet> triplets() const;

    std::span<const double> weights() const { return weights_; }
    std::span<double> weights_mut() { return weights_; }

    // out[j] = sum_i W[i,j] * x[i]
    void forward_into(std::span<const double> x, std::span<double> out) const;
    std::vector<double> forward(std::span<const double> x) const;

    // out[i] = sum_j W[i,j] * upstream[j]  (transpose product)
    void backward_into(std::span<const double> upstream,
                       std::span<double> out) const;

    // grad[k] += upstream[col(k)] * x[row(k)], entries only
    void accumulate_gradients(std::span<const double> upstream,
                              std::span<const double> x,
                              std::span<double> grad) const;

    // Fused backward + gradient accumulation (one CSR pass).
    void backward_accumulate(std::span<const double> upstream,
                             std::span<const double> x,
                             std::span<double> downstream,
                             std::span<double> grad) const;

    void apply_update(std::span<const double> grad, double learning_rate);

    // Removal set: the floor(zeta*P) smallest positive weights plus the
    // floor(zeta*N) largest (closest to zero) negative weights. Both returned
    // index lists are ascending in entry order.
    std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
    magnitude_partition(double zeta) const;

    // Drops the given entries (ascending entry indices).
    void remove_entries(const std::vector<std::size_t>& removal);

    // Adds n_new connections uniformly over absent positions, weights drawn
    // from N(0, weight_scale^2). Returns the number of additions that landed
    // on positions occupied before the preceding removal (informational only;
    // the caller passes the pre-removal occupancy if it wants that count).
    void random_regrow(std::size_t n_new, std::mt19937_64& rng,
                       double weight_scale = 1.0);
    std::size_t random_regrow(std::size_t n_new, std::mt19937_64& rng,
                              const std::vector<std::uint64_t>& watched_positions,
                              double weight_scale = 1.0);

    std::vector<std::uint64_t> position_keys() const;

    bool operator==(const SparseWeights& other) const;

private:
    std::size_t n_in_ = 0;
    std::size_t n_out_ = 0;
    std::vector<std::size_t> row_ptr_;  // size n_in_+1
    std::vector<std::uint32_t> cols_;
    std::vector<double> weights_;

    void rebuild_row_ptr(const std::vector<std::uint32_t>& rows);
};

}  // namespace qs
