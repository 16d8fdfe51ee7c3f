#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mrd/core.hpp"

namespace mrd::quant {

enum class Side { Whole, Left, Right };

std::string side_name(Side s);

/// Voxel-count density ratio for one mask pair.
struct DensityRecord {
    std::string subject_id;
    Side side = Side::Whole;
    std::int64_t dense_voxels = 0;
    std::int64_t breast_voxels = 0;
    double density = 0.0;  // dense_voxels / breast_voxels
};

/// density = sum(dense) / sum(breast), integer counts divided in float64.
/// Errors: dims mismatch, empty breast mask, or any dense voxel outside the
/// breast mask (the pipeline guarantees containment, so a violation here
/// means an upstream bug, not a data property).
DensityRecord compute_density(const BinaryMask3D& dense, const BinaryMask3D& breast);

enum class Axis { X = 0, Y = 1, Z = 2 };

std::string axis_name(Axis a);

struct SliceDensity {
    int index = 0;
    std::int64_t dense_voxels = 0;
    std::int64_t breast_voxels = 0;
    bool empty = true;      // no breast voxels in this slice
    double density = 0.0;   // meaningful only when !empty
};

struct SliceProfile {
    Axis axis = Axis::Z;
    std::vector<SliceDensity> per_slice;
    double volumetric_density = 0.0;
};

/// Per-slice density ratios along `axis`. Slices without breast voxels are
/// flagged empty rather than reported as 0. The count-weighted aggregate of
/// the per-slice entries reproduces volumetric_density exactly.
SliceProfile slice_density_profile(const BinaryMask3D& dense, const BinaryMask3D& breast,
                                   Axis axis = Axis::Z);

}  // namespace mrd::quant
