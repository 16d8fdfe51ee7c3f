#pragma once

#include <span>
#include <string>

#include "mrd/core.hpp"
#include "mrd/patches.hpp"

namespace mrd::seg {

/// Fused per-voxel probabilities from sliding-window inference, plus the
/// number of patches that contributed to each voxel.
struct ProbabilityVolume {
    Dims dims{};
    std::vector<double> probs;
    std::vector<std::int32_t> coverage;
};

/// One cube handed to a backend: normalized intensities (x-fastest) and
/// where the cube sits in the padded volume, for backends that predict
/// from position (oracle, import) rather than intensity.
struct PatchInput {
    std::span<const double> intensities;
    std::array<int, 3> origin{};
    int patch_size = 0;
};

/// A backend maps any patch to a probability patch of identical dims with
/// values in [0,1]. Implementations must be safe to call concurrently.
class PatchBackend {
public:
    virtual ~PatchBackend() = default;
    virtual std::string name() const = 0;
    virtual void predict(const PatchInput& in, std::span<double> out) const = 0;
};

/// Runs every planned patch through the backend and fuses overlaps by
/// equal-weight averaging. Accumulation is float64 in a fixed raster
/// order, so results are identical across runs and thread counts.
/// max_threads 0 defers to MRDENSITY_THREADS (then hardware concurrency).
ProbabilityVolume run_sliding_window(const Volume3D& v, const PatchBackend& backend,
                                     const PatchPlan& plan, int max_threads = 0);

/// Voxel = 1 iff probability >= threshold. Threshold must lie in (0,1).
BinaryMask3D binarize(const ProbabilityVolume& p, double threshold = 0.5);

/// Worker cap: MRDENSITY_THREADS when set (>= 1), else hardware
/// concurrency, else 1.
int resolve_thread_cap(int requested = 0);

}  // namespace mrd::seg
