#include "mrd/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mrd/core.hpp"
#include "mrd/correlation.hpp"

namespace mrd::stats {

double auc_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        fail(ErrorKind::InvalidInput, "auc_binary: scores/labels length mismatch");
    if (scores.empty()) fail(ErrorKind::InvalidInput, "auc_binary: empty input");
    std::int64_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            fail(ErrorKind::InvalidInput, "auc_binary: labels must be 0 or 1");
        if (!std::isfinite(scores[i]))
            fail(ErrorKind::InvalidInput, "auc_binary: non-finite score");
        if (labels[i]) ++n_pos; else ++n_neg;
    }
    if (n_pos == 0 || n_neg == 0)
        fail(ErrorKind::InvalidInput, "auc_binary: both classes must be present");

    // Midrank identity: sum of positive ranks minus n_pos*(n_pos+1)/2 equals
    // (#pairs won) + 0.5*(#pairs tied).
    const auto ranks = average_ranks(scores);
    double pos_rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) pos_rank_sum += ranks[i];
    const double wins = pos_rank_sum - static_cast<double>(n_pos) *
                                           (static_cast<double>(n_pos) + 1.0) / 2.0;
    return wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

DensityCategory classify_density(const ThresholdClassifier& c, double density) {
    const auto& t = c.thresholds;
    if (!(t[0] < t[1] && t[1] < t[2]))
        fail(ErrorKind::InvalidInput, "classify_density: thresholds must be strictly ascending");
    if (!(density >= 0.0 && density <= 1.0))
        fail(ErrorKind::InvalidInput,
             "classify_density: density " + std::to_string(density) + " outside [0,1]");
    if (density < t[0]) return DensityCategory::AlmostEntirelyFatty;
    if (density < t[1]) return DensityCategory::ScatteredFibroglandular;
    if (density < t[2]) return DensityCategory::HeterogeneouslyDense;
    return DensityCategory::ExtremelyDense;
}

namespace {

struct TrainingPoint {
    double density;
    int category;  // 0..3 in ascending density order
};

}  // namespace

ClassifierFit fit_threshold_classifier(const std::vector<CohortRecord>& records,
                                       double split_ratio, std::uint64_t seed) {
    if (!(split_ratio > 0.0 && split_ratio <= 1.0))
        fail(ErrorKind::InvalidInput, "fit_threshold_classifier: split_ratio must be in (0,1]");

    ClassifierFit fit;
    std::vector<TrainingPoint> labeled;
    for (const auto& r : records) {
        if (!r.mammo_category) {
            ++fit.n_excluded;
            continue;
        }
        if (!(r.density >= 0.0 && r.density <= 1.0))
            fail(ErrorKind::InvalidInput, "fit_threshold_classifier: density outside [0,1]");
        labeled.push_back({r.density, category_rank(*r.mammo_category) - 1});
    }
    const auto n = static_cast<std::int64_t>(labeled.size());
    if (n == 0)
        fail(ErrorKind::InvalidInput, "fit_threshold_classifier: no categorized records");

    // Seeded Fisher-Yates with explicit modular draws keeps the split
    // identical across standard library implementations.
    std::vector<std::int64_t> order(labeled.size());
    for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    for (std::int64_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    fit.n_train = std::clamp<std::int64_t>(std::llround(split_ratio * static_cast<double>(n)),
                                           0, n);
    fit.n_test = n - fit.n_train;

    std::vector<TrainingPoint> train, test;
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& p = labeled[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        (i < fit.n_train ? train : test).push_back(p);
    }

    std::array<std::int64_t, 4> per_category{0, 0, 0, 0};
    for (const auto& p : train) ++per_category[static_cast<std::size_t>(p.category)];
    for (int c = 0; c < 4; ++c)
        if (per_category[static_cast<std::size_t>(c)] < 4)
            fail(ErrorKind::InvalidInput,
                 "fit_threshold_classifier: insufficient training coverage for category " +
                     category_name(static_cast<DensityCategory>(c + 1)) + " (" +
                     std::to_string(per_category[static_cast<std::size_t>(c)]) +
                     " records, need 4)");

    std::sort(train.begin(), train.end(), [](const TrainingPoint& a, const TrainingPoint& b) {
        if (a.density != b.density) return a.density < b.density;
        return a.category < b.category;
    });

    // Distinct density values with per-category multiplicities.
    std::vector<double> values;
    std::vector<std::array<std::int64_t, 4>> counts;
    for (const auto& p : train) {
        if (values.empty() || values.back() != p.density) {
            values.push_back(p.density);
            counts.push_back({0, 0, 0, 0});
        }
        ++counts.back()[static_cast<std::size_t>(p.category)];
    }
    const auto m = static_cast<std::int64_t>(values.size());
    if (m < 4)
        fail(ErrorKind::InvalidInput,
             "fit_threshold_classifier: fewer than 4 distinct training densities, cannot "
             "place 3 ascending thresholds");

    // prefix[c][k]: category-c records among the k smallest distinct values.
    std::array<std::vector<std::int64_t>, 4> prefix;
    for (auto& p : prefix) p.assign(static_cast<std::size_t>(m) + 1, 0);
    for (std::int64_t k = 0; k < m; ++k)
        for (std::size_t c = 0; c < 4; ++c)
            prefix[c][static_cast<std::size_t>(k) + 1] =
                prefix[c][static_cast<std::size_t>(k)] + counts[static_cast<std::size_t>(k)][c];

    // Cut positions p1<p2<p3 in 1..m-1 assign value ranges to the four
    // categories; training accuracy decomposes into three independent
    // per-position gains plus a constant, so suffix maxima give the optimum
    // and a forward scan recovers the smallest (p1,p2,p3) attaining it.
    auto gain = [&](std::size_t c, std::int64_t p) {
        return prefix[c][static_cast<std::size_t>(p)] - prefix[c + 1][static_cast<std::size_t>(p)];
    };
    std::vector<std::int64_t> suf_c(static_cast<std::size_t>(m) + 2,
                                    std::numeric_limits<std::int64_t>::min());
    for (std::int64_t p = m - 1; p >= 1; --p)
        suf_c[static_cast<std::size_t>(p)] =
            std::max(suf_c[static_cast<std::size_t>(p) + 1], gain(2, p));
    std::vector<std::int64_t> suf_bc(static_cast<std::size_t>(m) + 2,
                                     std::numeric_limits<std::int64_t>::min());
    for (std::int64_t p = m - 2; p >= 1; --p)
        suf_bc[static_cast<std::size_t>(p)] =
            std::max(suf_bc[static_cast<std::size_t>(p) + 1],
                     gain(1, p) + suf_c[static_cast<std::size_t>(p) + 1]);

    std::int64_t best = std::numeric_limits<std::int64_t>::min();
    for (std::int64_t p = 1; p <= m - 3; ++p)
        best = std::max(best, gain(0, p) + suf_bc[static_cast<std::size_t>(p) + 1]);

    std::int64_t p1 = 0, p2 = 0, p3 = 0;
    for (std::int64_t p = 1; p <= m - 3; ++p)
        if (gain(0, p) + suf_bc[static_cast<std::size_t>(p) + 1] == best) {
            p1 = p;
            break;
        }
    const std::int64_t rest_bc = best - gain(0, p1);
    for (std::int64_t p = p1 + 1; p <= m - 2; ++p)
        if (gain(1, p) + suf_c[static_cast<std::size_t>(p) + 1] == rest_bc) {
            p2 = p;
            break;
        }
    const std::int64_t rest_c = rest_bc - gain(1, p2);
    for (std::int64_t p = p2 + 1; p <= m - 1; ++p)
        if (gain(2, p) == rest_c) {
            p3 = p;
            break;
        }

    auto midpoint = [&](std::int64_t p) {
        return 0.5 * (values[static_cast<std::size_t>(p) - 1] + values[static_cast<std::size_t>(p)]);
    };
    fit.model.thresholds = {midpoint(p1), midpoint(p2), midpoint(p3)};

    const std::int64_t correct_train = best + prefix[3][static_cast<std::size_t>(m)];
    fit.train_accuracy = static_cast<double>(correct_train) / static_cast<double>(fit.n_train);

    if (!test.empty()) {
        std::int64_t correct = 0;
        for (const auto& p : test)
            if (category_rank(classify_density(fit.model, p.density)) - 1 == p.category)
                ++correct;
        fit.test_accuracy = static_cast<double>(correct) / static_cast<double>(fit.n_test);
    }
    return fit;
}

}  // namespace mrd::stats
