#pragma once

#include <filesystem>

#include "pine/gat.hpp"

namespace pine {

/// Model file layout (little-endian):
///   "PINEM1" | u64 layers | f32 leaky_slope | u8 activation (0 = ELU, 1 = identity)
///   | layers x (u64 in_dim, u64 out_dim)
///   | per layer: U (out_dim x in_dim, row-major f32), s (out_dim f32), t (out_dim f32)
/// The attention cache is not stored; run a forward pass after loading.
void save_model(const gat::GatModel<float>& model, const std::filesystem::path& path);
gat::GatModel<float> load_model(const std::filesystem::path& path);

}  // namespace pine
