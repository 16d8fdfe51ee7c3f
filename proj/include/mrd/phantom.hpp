#pragma once

#include <cstdint>

#include "mrd/core.hpp"

namespace mrd::io {

/// Synthetic breast phantom: a half-ellipsoid "breast" clipped at the
/// chest-wall plane (its minimum-y face) containing a full-ellipsoid
/// "dense" core. Ground-truth masks are the voxelized shapes, so density
/// and segmentation results can be checked analytically.
struct PhantomSpec {
    Dims dims{64, 64, 64};
    std::array<double, 3> breast_center{32.0, 16.0, 32.0};
    std::array<double, 3> breast_semiaxes{26.0, 40.0, 26.0};
    std::array<double, 3> dense_center{32.0, 32.0, 32.0};
    std::array<double, 3> dense_semiaxes{11.0, 12.0, 11.0};
    double intensity_fat = 120.0;
    double intensity_dense = 60.0;
    double intensity_background = 0.0;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct Phantom {
    Volume3D volume;
    BinaryMask3D breast_truth;
    BinaryMask3D dense_truth;
};

/// Deterministic for a fixed spec + seed. Throws InvalidInput when the
/// dense shape is not contained in the breast shape or the breast does
/// not fit in the grid.
Phantom generate_phantom(const PhantomSpec& spec);

/// Dense-to-breast volume ratio of the ideal (continuous) shapes:
/// ellipsoid volume over half-ellipsoid volume.
double analytic_dense_fraction(const PhantomSpec& spec);

}  // namespace mrd::io
