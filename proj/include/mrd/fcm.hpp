#pragma once

#include <span>

#include "mrd/core.hpp"

namespace mrd::seg {

/// Fuzzy c-means over scalar intensities. Objective
/// sum_i sum_j u_ij^m (x_i - c_j)^2 with the standard membership update
/// u_ij = 1 / sum_k ((x_i - c_j)/(x_i - c_k))^(2/(m-1)).
/// Initialization is deterministic: centroids start at evenly spaced
/// quantiles ((j + 0.5)/c) of the sample.
struct FcmModel {
    std::vector<double> centroids;  // strictly increasing after fit
    double fuzziness_m = 2.0;
    double tol = 1e-5;
    int max_iter = 300;
    bool fitted = false;
    int iterations = 0;
    std::vector<double> objective_history;  // one value per iteration, non-increasing
};

FcmModel fcm_fit(std::span<const double> intensities, int clusters, double fuzziness = 2.0,
                 double tol = 1e-5, int max_iter = 300);

/// Membership of every cluster for one intensity; writes `centroids.size()`
/// values summing to 1. A value exactly at a centroid gets membership 1
/// there (split equally if several centroids coincide with it).
void fcm_memberships(const FcmModel& model, double x, std::span<double> out);

/// Per-voxel membership of one cluster, as a probability patch.
Volume3D fcm_predict_patch(const FcmModel& model, const Volume3D& patch, int target_cluster);

}  // namespace mrd::seg
