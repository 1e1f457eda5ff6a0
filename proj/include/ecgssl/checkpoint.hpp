#pragma once

#include <filesystem>
#include <vector>

#include "ecgssl/tensor.hpp"

namespace ecgssl::numcore {

// Versioned binary checkpoint: magic, format version, tensor count, per-tensor
// shapes, then raw little-endian 64-bit values in declaration order. Written
// atomically (write-then-rename) so an interrupted run cannot leave a corrupt
// file behind.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_params(const std::vector<Tensor>& params);
std::vector<Tensor> deserialize_params(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& params);
std::vector<Tensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace ecgssl::numcore
