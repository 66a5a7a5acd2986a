#pragma once

#include <filesystem>
#include <vector>

#include "qs/sparse_dae.hpp"

namespace qs {

// s_i = sum_j |W1[i,j]| over existing connections; isolated inputs score 0.
std::vector<double> neuron_strength(const SparseWeights& first_layer);

struct FeatureRanking {
    std::vector<double> strengths;
    // Feature indices sorted by descending strength; ties broken by
    // ascending feature index.
    std::vector<std::size_t> order;
    std::size_t epoch_tag = 0;
};

FeatureRanking rank_features(const std::vector<double>& strengths,
                             std::size_t epoch_tag = 0);
FeatureRanking rank_all(const SparseDae& model, std::size_t epoch_tag = 0);

std::vector<std::size_t> select_top_k(const FeatureRanking& ranking,
                                      std::size_t k);

void snapshot_strength(const SparseDae& model, std::size_t epoch,
                       StrengthHistory& history);

void write_ranking_csv(const std::filesystem::path& path,
                       const FeatureRanking& ranking);
FeatureRanking read_ranking_csv(const std::filesystem::path& path);

}  // namespace qs
