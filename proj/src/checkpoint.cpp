#include "qs/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace qs {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint formats assume a little-endian host");

template <typename T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("checkpoint: truncated stream");
    return value;
}

constexpr std::uint16_t kSpwtVersion = 1;
constexpr std::uint16_t kSdaeVersion = 1;

}  // namespace

void write_spwt_chunk(std::ostream& out, const SparseWeights& w) {
    out.write("SPWT", 4);
    write_pod<std::uint16_t>(out, kSpwtVersion);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(w.n_in()));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(w.n_out()));
    write_pod<std::uint64_t>(out, w.nnz());
    for (const Triplet& t : w.triplets()) {
        write_pod<std::uint32_t>(out, t.row);
        write_pod<std::uint32_t>(out, t.col);
        write_pod<float>(out, static_cast<float>(t.weight));
    }
}

SparseWeights read_spwt_chunk(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SPWT", 4) != 0) {
        throw std::runtime_error("checkpoint: bad SPWT magic");
    }
    const auto version = read_pod<std::uint16_t>(in);
    if (version != kSpwtVersion) {
        throw std::runtime_error("checkpoint: unsupported SPWT version");
    }
    const auto n_in = read_pod<std::uint32_t>(in);
    const auto n_out = read_pod<std::uint32_t>(in);
    const auto nnz = read_pod<std::uint64_t>(in);
    std::vector<Triplet> entries;
    entries.reserve(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
        const auto row = read_pod<std::uint32_t>(in);
        const auto col = read_pod<std::uint32_t>(in);
        const auto weight = read_pod<float>(in);
        entries.push_back(Triplet{row, col, static_cast<double>(weight)});
    }
    return SparseWeights::from_triplets(n_in, n_out, std::move(entries));
}

void save_checkpoint(const std::filesystem::path& path, const SparseDae& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("checkpoint: cannot write " + path.string());
    }
    out.write("SDAE", 4);
    write_pod<std::uint16_t>(out, kSdaeVersion);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_layers()));
    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        write_pod<std::uint8_t>(out,
                                static_cast<std::uint8_t>(model.layer(l).activation));
    }
    const DaeHyperparams& hp = model.hyperparams();
    write_pod<double>(out, hp.learning_rate);
    write_pod<double>(out, hp.zeta);
    write_pod<double>(out, hp.epsilon);
    write_pod<double>(out, hp.noise_factor);
    write_pod<double>(out, hp.init_scale);
    write_pod<std::uint64_t>(out, hp.epochs);
    write_pod<std::uint64_t>(out, hp.batch_size);
    write_pod<std::uint64_t>(out, hp.rng_seed);

    for (std::size_t l = 0; l < model.n_layers(); ++l) {
        const SparseLayer& layer = model.layer(l);
        write_spwt_chunk(out, layer.weights);
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(layer.bias.size()));
        for (double b : layer.bias) write_pod<float>(out, static_cast<float>(b));
    }
}

SparseDae load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("checkpoint: cannot read " + path.string());
    }
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SDAE", 4) != 0) {
        throw std::runtime_error("checkpoint: bad SDAE magic");
    }
    const auto version = read_pod<std::uint16_t>(in);
    if (version != kSdaeVersion) {
        throw std::runtime_error("checkpoint: unsupported SDAE version");
    }
    const auto n_layers = read_pod<std::uint32_t>(in);
    std::vector<Activation> activations;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        activations.push_back(static_cast<Activation>(read_pod<std::uint8_t>(in)));
    }
    DaeHyperparams hp;
    hp.learning_rate = read_pod<double>(in);
    hp.zeta = read_pod<double>(in);
    hp.epsilon = read_pod<double>(in);
    hp.noise_factor = read_pod<double>(in);
    hp.init_scale = read_pod<double>(in);
    hp.epochs = read_pod<std::uint64_t>(in);
    hp.batch_size = read_pod<std::uint64_t>(in);
    hp.rng_seed = read_pod<std::uint64_t>(in);

    std::vector<SparseLayer> layers;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        SparseLayer layer;
        layer.weights = read_spwt_chunk(in);
        const auto bias_len = read_pod<std::uint32_t>(in);
        layer.bias.resize(bias_len);
        for (std::uint32_t j = 0; j < bias_len; ++j) {
            layer.bias[j] = static_cast<double>(read_pod<float>(in));
        }
        layer.activation = activations[l];
        layers.push_back(std::move(layer));
    }
    return SparseDae::from_parts(std::move(layers), hp);
}

}  // namespace qs
