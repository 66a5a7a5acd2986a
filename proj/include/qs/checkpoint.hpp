#pragma once

#include <filesystem>
#include <iosfwd>

#include "qs/sparse_dae.hpp"

namespace qs {

// Binary layer chunk: magic "SPWT", version u16, n_in u32, n_out u32,
// nnz u64, then nnz triplets (u32 row, u32 col, f32 weight). Little-endian.
void write_spwt_chunk(std::ostream& out, const SparseWeights& w);
SparseWeights read_spwt_chunk(std::istream& in);

// Model checkpoint: header "SDAE", version u16, layer count u32, per-layer
// activation tag u8, hyperparameters (f64 fields + u64 seed/epochs/batch),
// then per-layer SPWT chunk and f32 bias array.
void save_checkpoint(const std::filesystem::path& path, const SparseDae& model);
SparseDae load_checkpoint(const std::filesystem::path& path);

}  // namespace qs
