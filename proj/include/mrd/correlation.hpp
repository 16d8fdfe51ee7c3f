#pragma once

#include <span>
#include <string>
#include <vector>

namespace mrd::stats {

struct CorrelationResult {
    std::string method;        // "spearman" or "kendall"
    double coefficient = 0.0;  // in [-1,1]
    double p_value = 1.0;      // two-sided
    std::int64_t n = 0;
};

/// Average ranks with tie midranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation: Pearson correlation of the two rank vectors.
/// p-value from t = rho*sqrt((n-2)/(1-rho^2)) against Student t with n-2
/// degrees of freedom, two-sided; |rho| = 1 reports p = 0. Requires equal
/// lengths, n >= 3, and at least two distinct values in each input.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

/// Kendall tau-b with tie corrections, computed by sorting and inversion
/// counting (O(n log n)). p-value from the normal approximation
/// z = 3*tau*sqrt(n*(n-1)) / sqrt(2*(2n+5)), two-sided; this is an
/// approximation, not an exact permutation p. Preconditions as spearman.
CorrelationResult kendall(std::span<const double> x, std::span<const double> y);

}  // namespace mrd::stats
