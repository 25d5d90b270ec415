#pragma once

// DTF1 binary tensor files:
//   "DTF1" | u32 LE order N | N x u64 LE extents | prod(extents) x f64 LE values
// Values follow the library's first-index-fastest layout.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tdcif/tensor.hpp"

namespace tdcif::dtf1 {

std::vector<std::uint8_t> encode(const DenseTensor& t);
/// Throws IoError on a wrong magic, bad header, truncated or oversized payload.
DenseTensor decode(std::span<const std::uint8_t> bytes);

void write(const std::filesystem::path& path, const DenseTensor& t);
DenseTensor read(const std::filesystem::path& path);

}  // namespace tdcif::dtf1
