#pragma once

#include "mrd/core.hpp"

namespace mrd::quant {

struct SegMetrics {
    double dsc = 0.0;  // Dice similarity coefficient in [0,1]
    double hd = 0.0;   // Hausdorff distance (voxel units unless spacing given)
};

/// 2|A∩B| / (|A| + |B|). Both masks empty is an error: the ratio is
/// undefined and a silent 1.0 or 0.0 would hide pipeline failures.
double dice(const BinaryMask3D& a, const BinaryMask3D& b);

/// Symmetric Hausdorff distance over full foreground voxel sets:
/// max over both directions of max-min Euclidean distance between voxel
/// centers. Distances are in voxel units by default; pass a spacing to
/// weight each axis. Either mask empty is an error.
///
/// Computed with an exact Euclidean distance transform; agrees with the
/// brute-force pairwise definition.
double hausdorff(const BinaryMask3D& a, const BinaryMask3D& b,
                 const Spacing& spacing = {1.0, 1.0, 1.0});

SegMetrics compare_masks(const BinaryMask3D& a, const BinaryMask3D& b,
                         const Spacing& spacing = {1.0, 1.0, 1.0});

}  // namespace mrd::quant
