#include "qs/extra_trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace qs {

namespace {

int majority_label(const std::vector<int>& y,
                   const std::vector<std::size_t>& idx) {
    std::map<int, std::size_t> counts;
    for (std::size_t i : idx) counts[y[i]]++;
    int best = y[idx.front()];
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) {
        if (count > best_count) { best = label; best_count = count; }
    }
    return best;
}

double gini(const std::map<int, std::size_t>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double acc = 1.0;
    for (const auto& [label, count] : counts) {
        const double p = static_cast<double>(count) / static_cast<double>(total);
        acc -= p * p;
    }
    return acc;
}

}  // namespace

ExtraTreesClassifier::ExtraTreesClassifier() : ExtraTreesClassifier(Params{}) {}

ExtraTreesClassifier::ExtraTreesClassifier(Params params)
    : params_(std::move(params)) {
    if (params_.n_trees == 0) {
        throw std::invalid_argument("ExtraTrees: n_trees must be positive");
    }
}

int ExtraTreesClassifier::Tree::predict(std::span<const double> x) const {
    std::int32_t cur = 0;
    while (nodes[cur].feature >= 0) {
        cur = x[nodes[cur].feature] < nodes[cur].threshold ? nodes[cur].left
                                                           : nodes[cur].right;
    }
    return nodes[cur].label;
}

ExtraTreesClassifier::Tree ExtraTreesClassifier::build_tree(
    const Dataset& train, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    const std::vector<int> y(train.labels().begin(), train.labels().end());
    const std::size_t n_features = train.n_features();
    const std::size_t k_candidates =
        params_.max_candidate_features > 0
            ? params_.max_candidate_features
            : static_cast<std::size_t>(
                  std::ceil(std::sqrt(static_cast<double>(n_features))));

    Tree tree;

    struct Frame {
        std::vector<std::size_t> idx;
        std::int32_t node;
    };
    std::vector<std::size_t> all(train.n_samples());
    std::iota(all.begin(), all.end(), std::size_t{0});
    tree.nodes.emplace_back();
    std::vector<Frame> stack;
    stack.push_back({std::move(all), 0});

    std::vector<std::size_t> features(n_features);
    std::iota(features.begin(), features.end(), std::size_t{0});

    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        const auto& idx = frame.idx;
        Node& node = tree.nodes[frame.node];

        bool pure = true;
        for (std::size_t i : idx) {
            if (y[i] != y[idx.front()]) { pure = false; break; }
        }
        if (pure || idx.size() < params_.min_samples_split) {
            node.label = majority_label(y, idx);
            continue;
        }

        // Candidate features: a random draw of k among the non-constant ones.
        for (std::size_t j = n_features; j-- > 1;) {
            std::uniform_int_distribution<std::size_t> pick(0, j);
            std::swap(features[j], features[pick(rng)]);
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = std::numeric_limits<double>::max();
        std::size_t tried = 0;
        for (std::size_t f : features) {
            if (tried >= k_candidates) break;
            double lo = std::numeric_limits<double>::max();
            double hi = std::numeric_limits<double>::lowest();
            for (std::size_t i : idx) {
                lo = std::min(lo, train.at(i, f));
                hi = std::max(hi, train.at(i, f));
            }
            if (lo == hi) continue;  // constant in this node
            ++tried;
            std::uniform_real_distribution<double> cut(lo, hi);
            double threshold = cut(rng);
            if (threshold == lo) threshold = std::nextafter(lo, hi);

            std::map<int, std::size_t> left_counts, right_counts;
            std::size_t n_left = 0;
            for (std::size_t i : idx) {
                if (train.at(i, f) < threshold) { left_counts[y[i]]++; ++n_left; }
                else right_counts[y[i]]++;
            }
            const std::size_t n_right = idx.size() - n_left;
            const double score =
                (static_cast<double>(n_left) * gini(left_counts, n_left) +
                 static_cast<double>(n_right) * gini(right_counts, n_right)) /
                static_cast<double>(idx.size());
            if (score < best_score) {
                best_score = score;
                best_feature = static_cast<int>(f);
                best_threshold = threshold;
            }
        }

        if (best_feature < 0) {
            // All candidate features constant within the node.
            node.label = majority_label(y, idx);
            continue;
        }

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (train.at(i, best_feature) < best_threshold) left_idx.push_back(i);
            else right_idx.push_back(i);
        }

        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = static_cast<std::int32_t>(tree.nodes.size());
        node.right = node.left + 1;
        const std::int32_t left_node = node.left;
        const std::int32_t right_node = node.right;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        stack.push_back({std::move(right_idx), right_node});
        stack.push_back({std::move(left_idx), left_node});
    }
    return tree;
}

void ExtraTreesClassifier::fit(const Dataset& train) {
    if (!train.has_labels()) {
        throw std::invalid_argument("ExtraTrees: training data has no labels");
    }
    if (train.n_samples() == 0) {
        throw std::invalid_argument("ExtraTrees: empty training data");
    }
    std::set<int> classes(train.labels().begin(), train.labels().end());
    classes_.assign(classes.begin(), classes.end());
    constant_ = classes_.size() < 2;

    trees_.clear();
    trees_.reserve(params_.n_trees);
    for (std::size_t t = 0; t < params_.n_trees; ++t) {
        // Per-tree seed derived from the master seed; independent of build order.
        const std::uint64_t seed = params_.rng_seed * 0x9e3779b97f4a7c15ull + t + 1;
        trees_.push_back(build_tree(train, seed));
    }
}

std::vector<int> ExtraTreesClassifier::predict(const Dataset& data) const {
    if (trees_.empty()) {
        throw std::logic_error("ExtraTrees: predict before fit");
    }
    std::vector<int> out(data.n_samples());
    for (std::size_t i = 0; i < data.n_samples(); ++i) {
        std::map<int, std::size_t> votes;
        for (const Tree& tree : trees_) votes[tree.predict(data.row(i))]++;
        int best = classes_.front();
        std::size_t best_count = 0;
        for (const auto& [label, count] : votes) {
            if (count > best_count) { best = label; best_count = count; }
        }
        out[i] = best;
    }
    return out;
}

double ExtraTreesClassifier::accuracy(const Dataset& test) const {
    if (!test.has_labels()) {
        throw std::invalid_argument("ExtraTrees: test data has no labels");
    }
    const auto predictions = predict(test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == test.labels()[i]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) /
           static_cast<double>(predictions.size());
}

double extra_trees_fit_predict(const Dataset& train, const Dataset& test,
                               std::size_t n_trees, std::uint64_t rng_seed) {
    if (train.n_features() != test.n_features()) {
        throw std::invalid_argument("extra_trees_fit_predict: feature mismatch");
    }
    ExtraTreesClassifier::Params params;
    params.n_trees = n_trees;
    params.rng_seed = rng_seed;
    ExtraTreesClassifier model(params);
    model.fit(train);
    return model.accuracy(test);
}

}  // namespace qs
