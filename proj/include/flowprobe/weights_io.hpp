#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flowprobe/mlp.hpp"

namespace flowprobe {

/// Binary weight document, all integers u32 and all reals IEEE-754 f64,
/// little-endian, no padding:
///
///   magic        8 bytes  "FPMLP\0\0\0"
///   version      u32      1
///   activation   u32      0 = tanh
///   state_dim    u32
///   cond_dim     u32
///   layer_count  u32      L
///   widths       u32 x (L + 1), widths[0] = state_dim + 1 + cond_dim,
///                                widths[L] = state_dim
///   per layer l: rows u32, cols u32 (must equal widths[l+1], widths[l]),
///                rows*cols f64 weights row-major, rows f64 bias
///
/// Nothing may follow the last layer.
inline constexpr std::uint32_t kWeightsVersion = 1;

std::vector<std::uint8_t> save_weights(const Mlp& net);

/// Throws ParseError (with byte offset) on a truncated or malformed document and
/// SchemaError when declared sizes disagree. Never returns a partial network.
Mlp load_weights(std::span<const std::uint8_t> bytes);

void save_weights_file(const Mlp& net, const std::filesystem::path& path);
Mlp load_weights_file(const std::filesystem::path& path);

}  // namespace flowprobe
