#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qs/sparse_weights.hpp"

namespace qs {

enum class Activation : std::uint8_t { Sigmoid = 0, Tanh = 1, Linear = 2 };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

double apply_activation(Activation a, double pre);
// Derivative expressed through the post-activation value.
double activation_derivative(Activation a, double post);

struct SparseLayer {
    SparseWeights weights;
    std::vector<double> bias;  // length n_out
    Activation activation = Activation::Sigmoid;
};

struct DaeHyperparams {
    double learning_rate = 0.01;
    double zeta = 0.2;
    double epsilon = 13.0;
    double noise_factor = 0.2;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t rng_seed = 42;
    double init_scale = 0.1;
};

struct EvolutionLayerEntry {
    std::size_t removed = 0;
    std::size_t added = 0;
    double density = 0.0;
    // Fraction of this epoch's positions shared with the previous epoch.
    double overlap_with_previous = 0.0;
    // Regrown positions that re-occupied a slot removed in the same step.
    std::size_t collisions = 0;
};

struct EvolutionEpochEntry {
    std::size_t epoch = 0;
    std::vector<EvolutionLayerEntry> layers;
};

struct StrengthHistory {
    // (epoch, per-input-feature strength), epochs strictly increasing.
    std::vector<std::pair<std::size_t, std::vector<double>>> snapshots;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    std::vector<double> epoch_seconds;
    StrengthHistory strength_history;
    std::vector<EvolutionEpochEntry> evolution_log;
    std::size_t parameter_count = 0;
    std::size_t peak_memory_bytes = 0;
    double total_seconds = 0.0;
};

class Dataset;

class SparseDae {
public:
    SparseDae() = default;

    // Autoencoder over n_features inputs with the given hidden layer widths.
    // All hidden layers use hidden_act; the reconstruction layer uses
    // output_act. Layer topologies are Erdos-Renyi at the model's epsilon.
    static SparseDae build(std::size_t n_features,
                           const std::vector<std::size_t>& hidden_sizes,
                           Activation hidden_act, Activation output_act,
                           const DaeHyperparams& hp);

    // Assembles a model from explicit layers, checking the autoencoder
    // shape invariants (dimension chaining, first in == last out).
    static SparseDae from_parts(std::vector<SparseLayer> layers,
                                const DaeHyperparams& hp);

    std::size_t n_features() const;
    std::size_t n_layers() const { return layers_.size(); }
    const SparseLayer& layer(std::size_t i) const { return layers_[i]; }
    SparseLayer& layer_mut(std::size_t i) { return layers_[i]; }
    const DaeHyperparams& hyperparams() const { return hp_; }
    DaeHyperparams& hyperparams_mut() { return hp_; }

    // Weight entries plus bias terms.
    std::size_t parameter_count() const;

    struct ForwardPass {
        // activations[0] is the (possibly corrupted) input; activations[l]
        // is the post-activation output of layer l-1.
        std::vector<std::vector<double>> activations;
        std::span<const double> output() const { return activations.back(); }
    };

    ForwardPass forward(std::span<const double> x) const;

    // x_tilde = x + nf * g, g ~ N(0,1) element-wise.
    static std::vector<double> corrupt(std::span<const double> x, double nf,
                                       std::mt19937_64& rng);

    static double mse_loss(std::span<const double> z, std::span<const double> x);

    // One SGD update over the given sample rows: corrupt, forward, backprop
    // through existing connections only, update weights and biases by the
    // batch-averaged gradient. Loss is measured against the clean input.
    double sgd_step(const Dataset& data,
                    std::span<const std::size_t> sample_rows,
                    std::mt19937_64& noise_rng);

    // Algorithm: per epoch, shuffle rows, run minibatch SGD, then one
    // topology evolution step. Strength snapshots are taken at epoch 0
    // (initialization) and after every epoch.
    TrainReport train(const Dataset& data);

    // Post-activation vector of the given layer (1-based over layers; 1 is
    // the first hidden layer).
    std::vector<double> extract_features(std::span<const double> x,
                                         std::size_t layer_index) const;

    bool operator==(const SparseDae& other) const;

private:
    std::vector<SparseLayer> layers_;
    DaeHyperparams hp_;
};

}  // namespace qs
