#include "qs/set_evolution.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace qs {

EvolutionEpochEntry evolve(SparseDae& model, double zeta, std::mt19937_64& rng,
                           std::size_t epoch) {
    if (zeta < 0.0 || zeta >= 1.0) {
        throw std::invalid_argument("evolve: zeta must be in [0, 1)");
    }
    EvolutionEpochEntry entry;
    entry.epoch = epoch;
    entry.layers.reserve(model.n_layers());

    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        SparseWeights& w = model.layer_mut(l).weights;
        const std::size_t nnz_before = w.nnz();
        auto before = w.position_keys();

        auto [removal, survivors] = w.magnitude_partition(zeta);
        std::vector<std::uint64_t> removed_positions;
        removed_positions.reserve(removal.size());
        for (std::size_t k : removal) {
            removed_positions.push_back(
                static_cast<std::uint64_t>(w.entry_row(k)) * w.n_out() +
                w.entry_col(k));
        }
        w.remove_entries(removal);
        const std::size_t collisions =
            w.random_regrow(removal.size(), rng, removed_positions,
                            model.hyperparams().init_scale);

        if (w.nnz() != nnz_before) {
            throw std::logic_error("evolve: nnz not conserved");
        }

        std::unordered_set<std::uint64_t> prev(before.begin(), before.end());
        std::size_t shared = 0;
        for (std::uint64_t key : w.position_keys()) {
            if (prev.count(key)) ++shared;
        }

        EvolutionLayerEntry le;
        le.removed = removal.size();
        le.added = removal.size();
        le.density = w.density();
        le.overlap_with_previous =
            nnz_before == 0 ? 1.0
                            : static_cast<double>(shared) /
                                  static_cast<double>(nnz_before);
        le.collisions = collisions;
        entry.layers.push_back(le);
    }
    return entry;
}

}  // namespace qs
