#include "qs/sparse_dae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qs/data.hpp"
#include "qs/resource_probe.hpp"
#include "qs/selection.hpp"
#include "qs/set_evolution.hpp"

namespace qs {

const char* to_string(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Linear: return "linear";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "linear") return Activation::Linear;
    throw std::invalid_argument("unknown activation: " + name);
}

namespace {
constexpr double kPreActivationClamp = 30.0;
}

double apply_activation(Activation a, double pre) {
    switch (a) {
        case Activation::Sigmoid: {
            const double t = std::clamp(pre, -kPreActivationClamp, kPreActivationClamp);
            return 1.0 / (1.0 + std::exp(-t));
        }
        case Activation::Tanh: {
            const double t = std::clamp(pre, -kPreActivationClamp, kPreActivationClamp);
            return std::tanh(t);
        }
        case Activation::Linear:
            return pre;
    }
    return pre;
}

double activation_derivative(Activation a, double post) {
    switch (a) {
        case Activation::Sigmoid: return post * (1.0 - post);
        case Activation::Tanh: return 1.0 - post * post;
        case Activation::Linear: return 1.0;
    }
    return 1.0;
}

SparseDae SparseDae::build(std::size_t n_features,
                           const std::vector<std::size_t>& hidden_sizes,
                           Activation hidden_act, Activation output_act,
                           const DaeHyperparams& hp) {
    if (n_features == 0) {
        throw std::invalid_argument("build: n_features must be positive");
    }
    if (hidden_sizes.empty()) {
        throw std::invalid_argument("build: at least one hidden layer required");
    }
    SparseDae model;
    model.hp_ = hp;

    std::vector<std::size_t> sizes;
    sizes.push_back(n_features);
    sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
    sizes.push_back(n_features);

    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        SparseLayer layer;
        // Layer seeds are derived from the master seed so that a rebuilt
        // model is reproducible layer by layer.
        const std::uint64_t layer_seed = hp.rng_seed * 0x9e3779b97f4a7c15ull + l;
        layer.weights = SparseWeights::erdos_renyi(sizes[l], sizes[l + 1],
                                                   hp.epsilon, layer_seed,
                                                   hp.init_scale);
        layer.bias.assign(sizes[l + 1], 0.0);
        layer.activation =
            (l + 2 == sizes.size()) ? output_act : hidden_act;
        model.layers_.push_back(std::move(layer));
    }
    return model;
}

SparseDae SparseDae::from_parts(std::vector<SparseLayer> layers,
                                const DaeHyperparams& hp) {
    if (layers.empty()) {
        throw std::invalid_argument("from_parts: no layers");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].bias.size() != layers[l].weights.n_out()) {
            throw std::invalid_argument("from_parts: bias length mismatch");
        }
        if (l + 1 < layers.size() &&
            layers[l].weights.n_out() != layers[l + 1].weights.n_in()) {
            throw std::invalid_argument("from_parts: layer dimensions do not chain");
        }
    }
    if (layers.front().weights.n_in() != layers.back().weights.n_out()) {
        throw std::invalid_argument("from_parts: not an autoencoder shape");
    }
    SparseDae model;
    model.layers_ = std::move(layers);
    model.hp_ = hp;
    return model;
}

std::size_t SparseDae::n_features() const {
    return layers_.empty() ? 0 : layers_.front().weights.n_in();
}

std::size_t SparseDae::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) {
        count += layer.weights.nnz() + layer.bias.size();
    }
    return count;
}

std::vector<double> SparseDae::corrupt(std::span<const double> x, double nf,
                                       std::mt19937_64& rng) {
    if (nf < 0.0) {
        throw std::invalid_argument("corrupt: noise factor must be non-negative");
    }
    std::vector<double> out(x.begin(), x.end());
    if (nf == 0.0) return out;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (double& v : out) v += nf * noise(rng);
    return out;
}

SparseDae::ForwardPass SparseDae::forward(std::span<const double> x) const {
    if (x.size() != n_features()) {
        throw std::invalid_argument("forward: dimension mismatch");
    }
    ForwardPass pass;
    pass.activations.reserve(layers_.size() + 1);
    pass.activations.emplace_back(x.begin(), x.end());
    for (const auto& layer : layers_) {
        std::vector<double> pre(layer.weights.n_out());
        layer.weights.forward_into(pass.activations.back(), pre);
        for (std::size_t j = 0; j < pre.size(); ++j) {
            pre[j] = apply_activation(layer.activation, pre[j] + layer.bias[j]);
        }
        pass.activations.push_back(std::move(pre));
    }
    return pass;
}

double SparseDae::mse_loss(std::span<const double> z, std::span<const double> x) {
    if (z.size() != x.size()) {
        throw std::invalid_argument("mse_loss: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - x[i];
        acc += d * d;
    }
    return acc;
}

double SparseDae::sgd_step(const Dataset& data,
                           std::span<const std::size_t> sample_rows,
                           std::mt19937_64& noise_rng) {
    if (sample_rows.empty()) {
        throw std::invalid_argument("sgd_step: empty batch");
    }
    const std::size_t n_layers = layers_.size();
    const double batch_scale = 1.0 / static_cast<double>(sample_rows.size());

    std::vector<std::vector<double>> weight_grads(n_layers);
    std::vector<std::vector<double>> bias_grads(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        weight_grads[l].assign(layers_[l].weights.nnz(), 0.0);
        bias_grads[l].assign(layers_[l].bias.size(), 0.0);
    }

    double loss = 0.0;
    for (std::size_t row : sample_rows) {
        std::span<const double> x = data.row(row);
        std::vector<double> corrupted = corrupt(x, hp_.noise_factor, noise_rng);
        ForwardPass pass = forward(corrupted);
        loss += mse_loss(pass.output(), x);

        // delta at the output: d(SSE)/dz, averaged over the batch.
        std::vector<double> delta(pass.output().size());
        for (std::size_t j = 0; j < delta.size(); ++j) {
            delta[j] = 2.0 * (pass.output()[j] - x[j]) * batch_scale *
                       activation_derivative(layers_.back().activation,
                                             pass.output()[j]);
        }

        for (std::size_t l = n_layers; l-- > 0;) {
            const auto& input = pass.activations[l];
            std::vector<double> downstream(input.size());
            layers_[l].weights.backward_accumulate(delta, input, downstream,
                                                   weight_grads[l]);
            for (std::size_t j = 0; j < delta.size(); ++j) {
                bias_grads[l][j] += delta[j];
            }
            if (l > 0) {
                for (std::size_t i = 0; i < downstream.size(); ++i) {
                    downstream[i] *= activation_derivative(
                        layers_[l - 1].activation, pass.activations[l][i]);
                }
                delta = std::move(downstream);
            }
        }
    }

    for (std::size_t l = 0; l < n_layers; ++l) {
        layers_[l].weights.apply_update(weight_grads[l], hp_.learning_rate);
        for (std::size_t j = 0; j < layers_[l].bias.size(); ++j) {
            layers_[l].bias[j] -= hp_.learning_rate * bias_grads[l][j];
        }
    }
    return loss * batch_scale;
}

TrainReport SparseDae::train(const Dataset& data) {
    if (hp_.epochs == 0) {
        throw std::invalid_argument("train: epochs must be >= 1");
    }
    if (data.n_samples() == 0) {
        throw std::invalid_argument("train: empty dataset");
    }
    if (data.n_features() != n_features()) {
        throw std::invalid_argument("train: dataset/model feature mismatch");
    }

    TrainReport report;
    report.parameter_count = parameter_count();
    snapshot_strength(*this, 0, report.strength_history);

    std::mt19937_64 shuffle_rng(hp_.rng_seed ^ 0x5851f42d4c957f2dull);
    std::mt19937_64 noise_rng(hp_.rng_seed ^ 0x14057b7ef767814full);
    std::mt19937_64 evolve_rng(hp_.rng_seed ^ 0x2545f4914f6cdd1dull);

    std::vector<std::size_t> rows(data.n_samples());
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= hp_.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(rows.begin(), rows.end(), shuffle_rng);

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < rows.size(); start += hp_.batch_size) {
            const std::size_t end = std::min(start + hp_.batch_size, rows.size());
            epoch_loss += sgd_step(
                data, std::span<const std::size_t>(rows).subspan(start, end - start),
                noise_rng);
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);
        if (!std::isfinite(epoch_loss)) {
            throw std::runtime_error("train: non-finite loss at epoch " +
                                     std::to_string(epoch));
        }

        report.evolution_log.push_back(evolve(*this, hp_.zeta, evolve_rng, epoch));

        if (parameter_count() != report.parameter_count) {
            throw std::logic_error("train: parameter count changed");
        }

        report.epoch_loss.push_back(epoch_loss);
        snapshot_strength(*this, epoch, report.strength_history);
        const auto t1 = std::chrono::steady_clock::now();
        report.epoch_seconds.push_back(
            std::chrono::duration<double>(t1 - t0).count());
    }

    report.total_seconds = std::accumulate(report.epoch_seconds.begin(),
                                           report.epoch_seconds.end(), 0.0);
    report.peak_memory_bytes = peak_resident_bytes();
    return report;
}

std::vector<double> SparseDae::extract_features(std::span<const double> x,
                                                std::size_t layer_index) const {
    if (layer_index == 0 || layer_index > layers_.size()) {
        throw std::out_of_range("extract_features: layer index out of range");
    }
    ForwardPass pass = forward(x);
    return pass.activations[layer_index];
}

bool SparseDae::operator==(const SparseDae& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (!(layers_[l].weights == other.layers_[l].weights)) return false;
        if (layers_[l].bias != other.layers_[l].bias) return false;
        if (layers_[l].activation != other.layers_[l].activation) return false;
    }
    return true;
}

}  // namespace qs
