#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "mrd/cohort.hpp"

namespace mrd::stats {

/// Mann-Whitney AUC: fraction of (positive, negative) pairs where the
/// positive scores higher, ties counted 0.5. Labels are 0/1; both classes
/// must be present. Computed via midranks, which equals exhaustive pair
/// counting.
double auc_binary(std::span<const double> scores, std::span<const int> labels);

/// Three ascending density cut points partitioning [0,1] into the four
/// ordinal categories.
struct ThresholdClassifier {
    std::array<double, 3> thresholds{0.0, 0.0, 0.0};
};

/// Ordinal bucket lookup; a density equal to a cut point goes to the denser
/// bucket. Density must lie in [0,1].
DensityCategory classify_density(const ThresholdClassifier& c, double density);

struct ClassifierFit {
    ThresholdClassifier model;
    std::int64_t n_train = 0;
    std::int64_t n_test = 0;
    std::int64_t n_excluded = 0;  // records without a mammographic category
    double train_accuracy = 0.0;
    std::optional<double> test_accuracy;  // absent when the test split is empty
};

/// Fits the cut points on a deterministic shuffled split (seeded
/// Fisher-Yates, train fraction = split_ratio) by exhaustive search over
/// candidate cut points (midpoints of adjacent distinct sorted training
/// densities), maximizing training accuracy subject to strictly increasing
/// thresholds; ties broken toward the smallest threshold triple. Reported
/// accuracy is on the held-out split. Each category needs at least 4
/// training records.
ClassifierFit fit_threshold_classifier(const std::vector<CohortRecord>& records,
                                       double split_ratio = 0.8, std::uint64_t seed = 0);

}  // namespace mrd::stats
