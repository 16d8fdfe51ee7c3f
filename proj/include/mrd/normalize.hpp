#pragma once

#include "mrd/core.hpp"

namespace mrd::seg {

struct NormStats {
    double mean = 0.0;
    double stddev = 1.0;  // population std
};

/// Per-volume z-score normalization with float64 accumulation. Output
/// satisfies |mean| < 1e-9 and |population std - 1| < 1e-9; dims/spacing
/// are unchanged. Throws Computation on a constant (zero-variance)
/// volume.
Volume3D zscore_normalize(const Volume3D& v, NormStats* stats = nullptr);

}  // namespace mrd::seg
