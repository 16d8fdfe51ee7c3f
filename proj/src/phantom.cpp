#include "mrd/phantom.hpp"

#include <cmath>
#include <random>

namespace mrd::io {

namespace {

bool inside_ellipsoid(double x, double y, double z, const std::array<double, 3>& c,
                      const std::array<double, 3>& a) {
    double dx = (x - c[0]) / a[0];
    double dy = (y - c[1]) / a[1];
    double dz = (z - c[2]) / a[2];
    return dx * dx + dy * dy + dz * dz <= 1.0;
}

void check_spec(const PhantomSpec& s) {
    if (s.dims[0] < 1 || s.dims[1] < 1 || s.dims[2] < 1)
        fail(ErrorKind::InvalidInput, "phantom: dims must be >= 1");
    for (int k = 0; k < 3; ++k) {
        if (!(s.breast_semiaxes[k] > 0.0) || !(s.dense_semiaxes[k] > 0.0))
            fail(ErrorKind::InvalidInput, "phantom: semi-axes must be > 0");
    }
    if (!(s.noise_sigma >= 0.0))
        fail(ErrorKind::InvalidInput, "phantom: noise_sigma must be >= 0");
    if (s.intensity_dense == s.intensity_fat)
        fail(ErrorKind::InvalidInput, "phantom: intensity_dense must differ from intensity_fat");

    // Breast extent must fit in the grid. The clipped half keeps y >= center_y.
    double lo[3] = {s.breast_center[0] - s.breast_semiaxes[0], s.breast_center[1],
                    s.breast_center[2] - s.breast_semiaxes[2]};
    double hi[3] = {s.breast_center[0] + s.breast_semiaxes[0],
                    s.breast_center[1] + s.breast_semiaxes[1],
                    s.breast_center[2] + s.breast_semiaxes[2]};
    for (int k = 0; k < 3; ++k) {
        if (lo[k] < -0.5 || hi[k] > s.dims[k] - 0.5)
            fail(ErrorKind::InvalidInput,
                 "phantom: dims " + dims_to_string(s.dims) + " too small to contain breast shape");
    }
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec) {
    check_spec(spec);

    Phantom p;
    const Dims d = spec.dims;
    const std::int64_t n = voxel_count(d);
    p.breast_truth.dims = d;
    p.breast_truth.voxels.assign(static_cast<std::size_t>(n), 0);
    p.dense_truth.dims = d;
    p.dense_truth.voxels.assign(static_cast<std::size_t>(n), 0);
    p.volume.dims = d;
    p.volume.spacing = {1.0, 1.0, 1.0};
    p.volume.orientation = "LPS";
    p.volume.voxels.assign(static_cast<std::size_t>(n), 0.0);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);

    std::int64_t i = 0;
    for (int z = 0; z < d[2]; ++z) {
        for (int y = 0; y < d[1]; ++y) {
            for (int x = 0; x < d[0]; ++x, ++i) {
                bool in_breast = y >= spec.breast_center[1] &&
                                 inside_ellipsoid(x, y, z, spec.breast_center, spec.breast_semiaxes);
                bool in_dense = inside_ellipsoid(x, y, z, spec.dense_center, spec.dense_semiaxes);
                if (in_dense && !in_breast)
                    fail(ErrorKind::InvalidInput,
                         "phantom: dense shape not contained in breast shape (voxel " +
                             std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(z) +
                             ")");
                double mean = spec.intensity_background;
                if (in_dense)
                    mean = spec.intensity_dense;
                else if (in_breast)
                    mean = spec.intensity_fat;
                auto idx = static_cast<std::size_t>(i);
                p.breast_truth.voxels[idx] = in_breast ? 1 : 0;
                p.dense_truth.voxels[idx] = in_dense ? 1 : 0;
                p.volume.voxels[idx] = spec.noise_sigma > 0.0 ? mean + noise(rng) : mean;
            }
        }
    }
    return p;
}

double analytic_dense_fraction(const PhantomSpec& spec) {
    double dense = 4.0 / 3.0 * M_PI * spec.dense_semiaxes[0] * spec.dense_semiaxes[1] *
                   spec.dense_semiaxes[2];
    double breast = 2.0 / 3.0 * M_PI * spec.breast_semiaxes[0] * spec.breast_semiaxes[1] *
                    spec.breast_semiaxes[2];
    return dense / breast;
}

}  // namespace mrd::io
