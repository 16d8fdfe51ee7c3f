#include "mrd/patches.hpp"

#include <algorithm>
#include <cmath>

namespace mrd::seg {

std::vector<int> axis_origins(int dim, int patch_size, int steps) {
    if (patch_size < 1) fail(ErrorKind::InvalidInput, "plan_patches: patch_size must be >= 1");
    if (steps < 1) fail(ErrorKind::InvalidInput, "plan_patches: steps must be >= 1");
    if (dim <= patch_size || steps == 1) return {0};

    const int span = dim - patch_size;
    std::vector<int> origins;
    origins.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        long o = std::lround(static_cast<double>(i) * span / (steps - 1));
        origins.push_back(static_cast<int>(std::clamp(o, 0L, static_cast<long>(span))));
    }
    origins.erase(std::unique(origins.begin(), origins.end()), origins.end());
    return origins;
}

PatchPlan plan_patches(const Dims& dims, int patch_size, const std::array<int, 3>& steps) {
    for (int k = 0; k < 3; ++k)
        if (dims[k] < 1)
            fail(ErrorKind::InvalidInput, "plan_patches: dims must be >= 1");

    PatchPlan plan;
    plan.patch_size = patch_size;
    plan.steps = steps;
    plan.dims = dims;
    for (int k = 0; k < 3; ++k) plan.padded_dims[k] = std::max(dims[k], patch_size);

    std::array<std::vector<int>, 3> axes;
    for (int k = 0; k < 3; ++k) axes[k] = axis_origins(plan.padded_dims[k], patch_size, steps[k]);

    plan.origins.reserve(axes[0].size() * axes[1].size() * axes[2].size());
    for (int oz : axes[2])
        for (int oy : axes[1])
            for (int ox : axes[0]) plan.origins.push_back({ox, oy, oz});
    return plan;
}

}  // namespace mrd::seg
