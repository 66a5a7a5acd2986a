#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "qs/data.hpp"

namespace qs {

// Extremely randomized trees: at each node, one uniform random cut-point per
// randomly chosen candidate feature, best split by Gini; trees are fully
// grown (min_samples_split = 2); prediction by majority vote.
class ExtraTreesClassifier {
public:
    struct Params {
        std::size_t n_trees = 50;
        std::size_t min_samples_split = 2;
        // 0 means ceil(sqrt(n_features)).
        std::size_t max_candidate_features = 0;
        std::uint64_t rng_seed = 0;
    };

    ExtraTreesClassifier();
    explicit ExtraTreesClassifier(Params params);

    void fit(const Dataset& train);
    std::vector<int> predict(const Dataset& data) const;
    double accuracy(const Dataset& test) const;

    // Flagged when the training data held a single class; the model then
    // predicts that class unconditionally.
    bool constant_classifier() const { return constant_; }

private:
    struct Node {
        int feature = -1;           // -1: leaf
        double threshold = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        int label = 0;              // leaf majority class
    };
    struct Tree {
        std::vector<Node> nodes;
        int predict(std::span<const double> x) const;
    };

    Params params_;
    std::vector<Tree> trees_;
    std::vector<int> classes_;
    bool constant_ = false;

    Tree build_tree(const Dataset& train, std::uint64_t seed) const;
};

double extra_trees_fit_predict(const Dataset& train, const Dataset& test,
                               std::size_t n_trees, std::uint64_t rng_seed);

}  // namespace qs
