#include "mrd/core.hpp"

namespace mrd {

void validate_volume(const Volume3D& v, const std::string& context) {
    if (v.dims[0] < 1 || v.dims[1] < 1 || v.dims[2] < 1)
        fail(ErrorKind::InvalidInput, context + ": dims must be >= 1, got " + dims_to_string(v.dims));
    if (static_cast<std::int64_t>(v.voxels.size()) != voxel_count(v.dims))
        fail(ErrorKind::InvalidInput,
             context + ": voxel count " + std::to_string(v.voxels.size()) +
                 " does not match dims " + dims_to_string(v.dims));
    for (int k = 0; k < 3; ++k)
        if (!(v.spacing[k] > 0.0))
            fail(ErrorKind::InvalidInput, context + ": spacing must be > 0 on every axis");
}

void validate_mask(const BinaryMask3D& m, const std::string& context) {
    if (m.dims[0] < 1 || m.dims[1] < 1 || m.dims[2] < 1)
        fail(ErrorKind::InvalidInput, context + ": dims must be >= 1, got " + dims_to_string(m.dims));
    if (static_cast<std::int64_t>(m.voxels.size()) != voxel_count(m.dims))
        fail(ErrorKind::InvalidInput,
             context + ": voxel count " + std::to_string(m.voxels.size()) +
                 " does not match dims " + dims_to_string(m.dims));
    for (std::uint8_t v : m.voxels)
        if (v > 1)
            fail(ErrorKind::InvalidInput,
                 context + ": non-binary voxel value " + std::to_string(int(v)));
}

}  // namespace mrd
