#include "mrd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace mrd::quant {

namespace {

void check_pair(const BinaryMask3D& a, const BinaryMask3D& b, const char* op) {
    validate_mask(a, std::string(op) + ": first mask");
    validate_mask(b, std::string(op) + ": second mask");
    if (a.dims != b.dims)
        fail(ErrorKind::InvalidInput, std::string(op) + ": dims " + dims_to_string(a.dims) +
                                          " != " + dims_to_string(b.dims));
}

// Sentinel for "no foreground seen yet". Large enough to dominate every real
// squared distance, small enough that adding coordinate terms (< 2^31) is
// absorbed without producing inf/NaN in the envelope arithmetic.
constexpr double kFar = 1e30;

/// 1-D squared-distance transform (lower envelope of parabolas) over grid
/// positions q*h: d[q] = min_p ((q-p)*h)^2 + f[p].
void dt1d(const double* f, double* d, int* v, double* z, int n, double h) {
    const double h2 = h * h;
    // The envelope boundaries are only ever compared against, never used in
    // arithmetic, so true infinities are safe here. They must not be finite:
    // with h < 1 an intersection of a kFar parabola with a real one can land
    // below any finite sentinel, which would walk k past the first entry.
    const double inf = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -inf;
    z[1] = inf;
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            const int p = v[k];
            s = ((f[q] + h2 * q * q) - (f[p] + h2 * p * p)) / (2.0 * h2 * (q - p));
            if (s <= z[k]) {
                --k;
                continue;
            }
            break;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = inf;
    }
    // z holds intersections divided by h (grid units, matching the insert
    // loop above), so queries compare against the grid index q itself.
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < static_cast<double>(q)) ++k;
        const double dq = static_cast<double>(q - v[k]);
        d[q] = dq * dq * h2 + f[v[k]];
    }
}

/// Exact squared Euclidean distance from every voxel to the nearest
/// foreground voxel of `m`, with per-axis spacing weights.
std::vector<double> squared_edt(const BinaryMask3D& m, const Spacing& sp) {
    const int nx = m.dims[0], ny = m.dims[1], nz = m.dims[2];
    std::vector<double> d(m.voxels.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = m.voxels[i] ? 0.0 : kFar;

    const int maxd = std::max({nx, ny, nz});
    std::vector<double> f(static_cast<std::size_t>(maxd));
    std::vector<double> out(static_cast<std::size_t>(maxd));
    std::vector<double> z(static_cast<std::size_t>(maxd) + 1);
    std::vector<int> v(static_cast<std::size_t>(maxd));

    auto sweep = [&](int n, std::int64_t stride, std::int64_t base, double h) {
        for (int q = 0; q < n; ++q) f[static_cast<std::size_t>(q)] = d[base + q * stride];
        dt1d(f.data(), out.data(), v.data(), z.data(), n, h);
        for (int q = 0; q < n; ++q) d[base + q * stride] = out[static_cast<std::size_t>(q)];
    };

    for (int zi = 0; zi < nz; ++zi)
        for (int yi = 0; yi < ny; ++yi)
            sweep(nx, 1, flat_index(m.dims, 0, yi, zi), sp[0]);
    for (int zi = 0; zi < nz; ++zi)
        for (int xi = 0; xi < nx; ++xi)
            sweep(ny, nx, flat_index(m.dims, xi, 0, zi), sp[1]);
    for (int yi = 0; yi < ny; ++yi)
        for (int xi = 0; xi < nx; ++xi)
            sweep(nz, static_cast<std::int64_t>(nx) * ny, flat_index(m.dims, xi, yi, 0), sp[2]);
    return d;
}

}  // namespace

double dice(const BinaryMask3D& a, const BinaryMask3D& b) {
    check_pair(a, b, "dice");
    std::int64_t na = 0, nb = 0, inter = 0;
    for (std::size_t i = 0; i < a.voxels.size(); ++i) {
        na += a.voxels[i];
        nb += b.voxels[i];
        inter += a.voxels[i] & b.voxels[i];
    }
    if (na + nb == 0)
        fail(ErrorKind::InvalidInput, "dice: both masks empty, coefficient undefined");
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double hausdorff(const BinaryMask3D& a, const BinaryMask3D& b, const Spacing& spacing) {
    check_pair(a, b, "hausdorff");
    for (double s : spacing)
        if (!(s > 0.0))
            fail(ErrorKind::InvalidInput, "hausdorff: spacing components must be > 0");
    bool a_empty = true, b_empty = true;
    for (std::size_t i = 0; i < a.voxels.size() && (a_empty || b_empty); ++i) {
        if (a.voxels[i]) a_empty = false;
        if (b.voxels[i]) b_empty = false;
    }
    if (a_empty || b_empty)
        fail(ErrorKind::InvalidInput, "hausdorff: distance to an empty mask is undefined");

    const auto to_a = squared_edt(a, spacing);
    const auto to_b = squared_edt(b, spacing);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.voxels.size(); ++i) {
        if (a.voxels[i]) worst = std::max(worst, to_b[i]);
        if (b.voxels[i]) worst = std::max(worst, to_a[i]);
    }
    return std::sqrt(worst);
}

SegMetrics compare_masks(const BinaryMask3D& a, const BinaryMask3D& b, const Spacing& spacing) {
    SegMetrics m;
    m.dsc = dice(a, b);
    m.hd = hausdorff(a, b, spacing);
    return m;
}

}  // namespace mrd::quant
