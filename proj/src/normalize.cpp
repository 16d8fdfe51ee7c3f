#include "mrd/normalize.hpp"

#include <cmath>

namespace mrd::seg {

Volume3D zscore_normalize(const Volume3D& v, NormStats* stats) {
    validate_volume(v, "zscore_normalize");
    const std::int64_t n = v.size();
    if (n < 2)
        fail(ErrorKind::InvalidInput, "zscore_normalize: volume needs >= 2 voxels");

    double sum = 0.0;
    for (double x : v.voxels) sum += x;
    const double mean = sum / static_cast<double>(n);

    double ss = 0.0;
    for (double x : v.voxels) {
        double d = x - mean;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(n));
    if (sigma <= 1e-12)
        fail(ErrorKind::Computation, "zscore_normalize: zero-variance (constant) volume");

    Volume3D out;
    out.dims = v.dims;
    out.spacing = v.spacing;
    out.orientation = v.orientation;
    out.voxels.resize(v.voxels.size());
    for (std::size_t i = 0; i < v.voxels.size(); ++i)
        out.voxels[i] = (v.voxels[i] - mean) / sigma;

    if (stats) *stats = {mean, sigma};
    return out;
}

}  // namespace mrd::seg
