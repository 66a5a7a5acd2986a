#include "qs/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qs {

std::vector<double> neuron_strength(const SparseWeights& first_layer) {
    std::vector<double> strengths(first_layer.n_in(), 0.0);
    for (const Triplet& t : first_layer.triplets()) {
        strengths[t.row] += std::abs(t.weight);
    }
    return strengths;
}

FeatureRanking rank_features(const std::vector<double>& strengths,
                             std::size_t epoch_tag) {
    FeatureRanking ranking;
    ranking.strengths = strengths;
    ranking.epoch_tag = epoch_tag;
    ranking.order.resize(strengths.size());
    std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
    std::sort(ranking.order.begin(), ranking.order.end(),
              [&](std::size_t a, std::size_t b) {
                  return strengths[a] != strengths[b] ? strengths[a] > strengths[b]
                                                      : a < b;
              });
    return ranking;
}

FeatureRanking rank_all(const SparseDae& model, std::size_t epoch_tag) {
    if (model.n_layers() == 0) {
        throw std::invalid_argument("rank_all: empty model");
    }
    return rank_features(neuron_strength(model.layer(0).weights), epoch_tag);
}

std::vector<std::size_t> select_top_k(const FeatureRanking& ranking,
                                      std::size_t k) {
    if (k == 0 || k > ranking.order.size()) {
        throw std::out_of_range("select_top_k: k out of range");
    }
    return {ranking.order.begin(), ranking.order.begin() + k};
}

void snapshot_strength(const SparseDae& model, std::size_t epoch,
                       StrengthHistory& history) {
    if (!history.snapshots.empty() && history.snapshots.back().first >= epoch) {
        throw std::invalid_argument("snapshot_strength: epochs must increase");
    }
    history.snapshots.emplace_back(epoch,
                                   neuron_strength(model.layer(0).weights));
}

void write_ranking_csv(const std::filesystem::path& path,
                       const FeatureRanking& ranking) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << "rank,feature_index,strength\n";
    out.precision(17);
    for (std::size_t r = 0; r < ranking.order.size(); ++r) {
        const std::size_t f = ranking.order[r];
        out << r << ',' << f << ',' << ranking.strengths[f] << '\n';
    }
}

FeatureRanking read_ranking_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::string line;
    std::getline(in, line);  // header
    std::vector<std::pair<std::size_t, double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::size_t rank, feature;
        double strength;
        char comma;
        ss >> rank >> comma >> feature >> comma >> strength;
        rows.emplace_back(feature, strength);
    }
    FeatureRanking ranking;
    ranking.strengths.assign(rows.size(), 0.0);
    for (const auto& [feature, strength] : rows) {
        if (feature >= ranking.strengths.size()) {
            ranking.strengths.resize(feature + 1, 0.0);
        }
        ranking.strengths[feature] = strength;
        ranking.order.push_back(feature);
    }
    return ranking;
}

}  // namespace qs
