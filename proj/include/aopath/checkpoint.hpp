#pragma once

#include <filesystem>

#include "aopath/pathway.hpp"

namespace aopath {

// Flat ordered list of named tensors with a config-hash header.
// Layout: "aopath-ckpt 1 <hash> <count>" then per tensor a text line
// "<name> <ndim> <d0> <d1>..." followed by raw little-endian doubles.
void save_checkpoint(const ModelParams& params, const PathwayConfig& cfg,
                     const std::filesystem::path& path);

// Rebuilds ModelParams for cfg and fills values; the stored config hash
// must match.
ModelParams load_checkpoint(const PathwayConfig& cfg, const std::filesystem::path& path);

}  // namespace aopath
