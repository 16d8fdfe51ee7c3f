#pragma once

#include <filesystem>
#include <utility>

#include "mrd/core.hpp"

namespace mrd::io {

/// Geometry and provenance extracted from a DICOM series' headers.
/// slice_positions/source_ids follow the final (ascending patient z)
/// slice order of the returned volume.
struct SeriesMeta {
    std::vector<double> slice_positions;
    std::array<double, 6> orientation_cosines{};
    std::array<double, 2> pixel_spacing{};  // (row, col) mm
    std::array<double, 2> rescale{1.0, 0.0};  // (slope, intercept)
    std::vector<std::string> source_ids;
};

/// Loads an uncompressed little-endian single-frame DICOM series into a
/// canonically oriented LPS volume. Slices are sorted along the slice
/// normal and reversed when the normal points in negative patient z, so
/// slice z coordinates always ascend. In-plane axes are flipped to +x
/// (left) and +y (posterior) when the orientation cosines point the
/// other way. Rescale slope/intercept are applied to pixel values.
std::pair<Volume3D, SeriesMeta> load_dicom_series(const std::filesystem::path& dir);

}  // namespace mrd::io
