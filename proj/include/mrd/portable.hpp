#pragma once

#include <filesystem>

#include "mrd/core.hpp"

namespace mrd::io {

/// Portable volume format: a `key = value` text header next to a raw
/// little-endian payload. Header fields: dims, spacing_mm, orientation,
/// dtype ("f32" for volumes, "u8" for masks), data_file (relative to the
/// header). Round trips are bitwise-exact.
void save_portable_volume(const Volume3D& v, const std::filesystem::path& header_path);
Volume3D load_portable_volume(const std::filesystem::path& header_path);

void save_mask(const BinaryMask3D& m, const std::filesystem::path& header_path);
BinaryMask3D load_mask(const std::filesystem::path& header_path);

}  // namespace mrd::io
