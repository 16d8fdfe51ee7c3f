#include "mrd/fcm.hpp"

#include <algorithm>
#include <cmath>

namespace mrd::seg {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double pos = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

void fcm_memberships(const FcmModel& model, double x, std::span<double> out) {
    const std::size_t c = model.centroids.size();
    // Exact centroid hits take the whole membership.
    std::size_t hits = 0;
    for (std::size_t j = 0; j < c; ++j)
        if (x == model.centroids[j]) ++hits;
    if (hits > 0) {
        for (std::size_t j = 0; j < c; ++j)
            out[j] = x == model.centroids[j] ? 1.0 / static_cast<double>(hits) : 0.0;
        return;
    }

    const double m = model.fuzziness_m;
    if (m == 2.0) {
        double total = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            double d = x - model.centroids[k];
            out[k] = 1.0 / (d * d);
            total += out[k];
        }
        for (std::size_t j = 0; j < c; ++j) out[j] /= total;
    } else {
        const double e = 2.0 / (m - 1.0);
        double total = 0.0;
        for (std::size_t k = 0; k < c; ++k) {
            double d = std::abs(x - model.centroids[k]);
            out[k] = std::pow(d, -e);
            total += out[k];
        }
        for (std::size_t j = 0; j < c; ++j) out[j] /= total;
    }
}

FcmModel fcm_fit(std::span<const double> intensities, int clusters, double fuzziness,
                 double tol, int max_iter) {
    if (clusters < 1) fail(ErrorKind::InvalidInput, "fcm_fit: clusters must be >= 1");
    if (!(fuzziness > 1.0)) fail(ErrorKind::InvalidInput, "fcm_fit: fuzziness must be > 1");
    if (intensities.empty()) fail(ErrorKind::InvalidInput, "fcm_fit: empty sample");
    for (double x : intensities)
        if (!std::isfinite(x))
            fail(ErrorKind::InvalidInput, "fcm_fit: non-finite intensity in sample");

    std::vector<double> sorted(intensities.begin(), intensities.end());
    std::sort(sorted.begin(), sorted.end());
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] != sorted[i - 1]) ++distinct;
    if (distinct < static_cast<std::size_t>(clusters))
        fail(ErrorKind::InvalidInput,
             "fcm_fit: sample has " + std::to_string(distinct) +
                 " distinct values, need >= " + std::to_string(clusters));

    FcmModel model;
    model.fuzziness_m = fuzziness;
    model.tol = tol;
    model.max_iter = max_iter;
    model.centroids.resize(static_cast<std::size_t>(clusters));
    for (int j = 0; j < clusters; ++j)
        model.centroids[static_cast<std::size_t>(j)] =
            quantile_sorted(sorted, (j + 0.5) / clusters);
    // Quantile init can collapse on heavily tied samples; fall back to an
    // even spread over the intensity range (still deterministic).
    bool increasing = true;
    for (int j = 1; j < clusters; ++j)
        if (model.centroids[j] <= model.centroids[j - 1]) increasing = false;
    if (!increasing && clusters > 1) {
        double lo = sorted.front(), hi = sorted.back();
        for (int j = 0; j < clusters; ++j)
            model.centroids[j] = lo + (hi - lo) * j / (clusters - 1);
    }

    const auto c = static_cast<std::size_t>(clusters);
    const double m = fuzziness;
    std::vector<double> u(c), num(c), den(c), sq(c);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::fill(num.begin(), num.end(), 0.0);
        std::fill(den.begin(), den.end(), 0.0);
        std::fill(sq.begin(), sq.end(), 0.0);
        for (double x : intensities) {
            fcm_memberships(model, x, u);
            for (std::size_t j = 0; j < c; ++j) {
                double w = m == 2.0 ? u[j] * u[j] : std::pow(u[j], m);
                num[j] += w * x;
                den[j] += w;
                sq[j] += w * x * x;
            }
        }
        double moved = 0.0;
        double objective = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double cj = den[j] > 0.0 ? num[j] / den[j] : model.centroids[j];
            moved = std::max(moved, std::abs(cj - model.centroids[j]));
            model.centroids[j] = cj;
            // sum u^m (x - c)^2 expanded around the updated centroid.
            objective += sq[j] - 2.0 * cj * num[j] + cj * cj * den[j];
        }
        model.objective_history.push_back(objective);
        model.iterations = iter + 1;
        if (moved < tol) break;
    }

    std::sort(model.centroids.begin(), model.centroids.end());
    for (std::size_t j = 1; j < c; ++j)
        if (model.centroids[j] <= model.centroids[j - 1])
            fail(ErrorKind::Computation,
                 "fcm_fit: clusters collapsed to coincident centroids; reduce cluster count");
    model.fitted = true;
    return model;
}

Volume3D fcm_predict_patch(const FcmModel& model, const Volume3D& patch, int target_cluster) {
    if (!model.fitted) fail(ErrorKind::InvalidInput, "fcm_predict_patch: model is not fitted");
    if (target_cluster < 0 || static_cast<std::size_t>(target_cluster) >= model.centroids.size())
        fail(ErrorKind::InvalidInput,
             "fcm_predict_patch: target cluster " + std::to_string(target_cluster) +
                 " out of range");
    Volume3D out;
    out.dims = patch.dims;
    out.spacing = patch.spacing;
    out.orientation = patch.orientation;
    out.voxels.resize(patch.voxels.size());
    std::vector<double> u(model.centroids.size());
    for (std::size_t i = 0; i < patch.voxels.size(); ++i) {
        fcm_memberships(model, patch.voxels[i], u);
        out.voxels[i] = u[static_cast<std::size_t>(target_cluster)];
    }
    return out;
}

}  // namespace mrd::seg
