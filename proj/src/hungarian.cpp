#include "qs/hungarian.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace qs {

// Jonker-Volgenant style shortest augmenting path, O(n^3).
std::vector<std::size_t> hungarian_min_cost(const std::vector<double>& cost,
                                            std::size_t n) {
    if (cost.size() != n * n) {
        throw std::invalid_argument("hungarian: cost matrix must be n x n");
    }
    const double inf = std::numeric_limits<double>::max();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, n), way(n + 1, n);

    for (std::size_t i = 0; i < n; ++i) {
        p[n] = i;
        std::size_t j0 = n;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 * n + j] - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != n);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != n);
    }

    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 0; j < n; ++j) assignment[p[j]] = j;
    return assignment;
}

std::size_t best_match_agreement(const std::vector<int>& a,
                                 const std::vector<int>& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("best_match_agreement: length mismatch");
    }
    std::map<int, std::size_t> ids_a, ids_b;
    for (int label : a) ids_a.emplace(label, ids_a.size());
    for (int label : b) ids_b.emplace(label, ids_b.size());
    const std::size_t n = std::max(ids_a.size(), ids_b.size());
    if (n > a.size()) {
        throw std::invalid_argument(
            "best_match_agreement: label cardinality exceeds sample count");
    }
    if (n == 0) return 0;

    // Contingency counts; maximize agreement == minimize (max - count).
    std::vector<double> agree(n * n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        agree[ids_a[a[i]] * n + ids_b[b[i]]] += 1.0;
    }
    std::vector<double> cost(n * n);
    const double top = static_cast<double>(a.size());
    for (std::size_t k = 0; k < n * n; ++k) cost[k] = top - agree[k];

    const auto assignment = hungarian_min_cost(cost, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += agree[i * n + assignment[i]];
    return static_cast<std::size_t>(total);
}

}  // namespace qs
