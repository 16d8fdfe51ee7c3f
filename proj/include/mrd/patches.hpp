#pragma once

#include "mrd/core.hpp"

namespace mrd::seg {

/// Sliding-window inference grid. Per-axis origins are
/// round(i * (D - P) / (S - 1)) for i = 0..S-1, clamped to [0, D - P];
/// axes where D <= P get the sole origin 0 (with zero-padding up to P
/// when D < P). The Cartesian product across axes is deduplicated and
/// kept in raster order.
struct PatchPlan {
    int patch_size = 96;
    std::array<int, 3> steps{8, 8, 3};
    Dims dims{};         // dims the plan was built for
    Dims padded_dims{};  // per-axis max(dims, patch_size)
    std::vector<std::array<int, 3>> origins;

    bool needs_padding() const { return padded_dims != dims; }
};

PatchPlan plan_patches(const Dims& dims, int patch_size = 96,
                       const std::array<int, 3>& steps = {8, 8, 3});

/// Per-axis origin list, deduplicated and ascending.
std::vector<int> axis_origins(int dim, int patch_size, int steps);

}  // namespace mrd::seg
