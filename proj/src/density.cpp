#include "mrd/density.hpp"

namespace mrd::quant {

std::string side_name(Side s) {
    switch (s) {
        case Side::Whole: return "whole";
        case Side::Left: return "left";
        case Side::Right: return "right";
    }
    return "whole";
}

std::string axis_name(Axis a) {
    switch (a) {
        case Axis::X: return "x";
        case Axis::Y: return "y";
        case Axis::Z: return "z";
    }
    return "z";
}

namespace {

void check_pair(const BinaryMask3D& dense, const BinaryMask3D& breast, const char* op) {
    validate_mask(dense, std::string(op) + ": dense mask");
    validate_mask(breast, std::string(op) + ": breast mask");
    if (dense.dims != breast.dims)
        fail(ErrorKind::InvalidInput, std::string(op) + ": dense dims " +
                                          dims_to_string(dense.dims) + " != breast dims " +
                                          dims_to_string(breast.dims));
}

}  // namespace

DensityRecord compute_density(const BinaryMask3D& dense, const BinaryMask3D& breast) {
    check_pair(dense, breast, "compute_density");
    DensityRecord r;
    for (std::size_t i = 0; i < dense.voxels.size(); ++i) {
        if (dense.voxels[i] && !breast.voxels[i])
            fail(ErrorKind::InvalidInput,
                 "compute_density: dense voxel outside the breast mask (pipeline violation)");
        r.dense_voxels += dense.voxels[i];
        r.breast_voxels += breast.voxels[i];
    }
    if (r.breast_voxels == 0)
        fail(ErrorKind::InvalidInput, "compute_density: empty breast mask");
    r.density = static_cast<double>(r.dense_voxels) / static_cast<double>(r.breast_voxels);
    return r;
}

SliceProfile slice_density_profile(const BinaryMask3D& dense, const BinaryMask3D& breast,
                                   Axis axis) {
    check_pair(dense, breast, "slice_density_profile");
    const int ax = static_cast<int>(axis);
    const int n_slices = breast.dims[ax];

    SliceProfile profile;
    profile.axis = axis;
    profile.per_slice.assign(static_cast<std::size_t>(n_slices), SliceDensity{});

    std::int64_t total_dense = 0;
    std::int64_t total_breast = 0;
    std::size_t i = 0;
    int coord[3];
    for (coord[2] = 0; coord[2] < breast.dims[2]; ++coord[2])
        for (coord[1] = 0; coord[1] < breast.dims[1]; ++coord[1])
            for (coord[0] = 0; coord[0] < breast.dims[0]; ++coord[0], ++i) {
                if (dense.voxels[i] && !breast.voxels[i])
                    fail(ErrorKind::InvalidInput,
                         "slice_density_profile: dense voxel outside the breast mask");
                auto& s = profile.per_slice[static_cast<std::size_t>(coord[ax])];
                s.dense_voxels += dense.voxels[i];
                s.breast_voxels += breast.voxels[i];
                total_dense += dense.voxels[i];
                total_breast += breast.voxels[i];
            }
    if (total_breast == 0)
        fail(ErrorKind::InvalidInput, "slice_density_profile: empty breast mask");

    for (int k = 0; k < n_slices; ++k) {
        auto& s = profile.per_slice[static_cast<std::size_t>(k)];
        s.index = k;
        s.empty = s.breast_voxels == 0;
        if (!s.empty)
            s.density = static_cast<double>(s.dense_voxels) / static_cast<double>(s.breast_voxels);
    }
    profile.volumetric_density =
        static_cast<double>(total_dense) / static_cast<double>(total_breast);
    return profile;
}

}  // namespace mrd::quant
