#include "mrd/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mrd/core.hpp"

namespace mrd::stats {

namespace {

// Order statistic at fractional rank (n-1)*p with linear interpolation.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double rank = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(rank);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = rank - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

void mean_and_stddev(std::span<const double> values, double& mean, double& stddev) {
    const auto n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    stddev = std::sqrt(ss / n);
}

}  // namespace

SummaryStats summarize(std::span<const double> values) {
    if (values.empty()) fail(ErrorKind::InvalidInput, "summarize: empty value list");
    for (double v : values)
        if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "summarize: non-finite value");
    SummaryStats s;
    s.n = static_cast<std::int64_t>(values.size());
    mean_and_stddev(values, s.mean, s.stddev);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    return s;
}

std::vector<GroupSummary> cohort_summary(const std::vector<CohortRecord>& records) {
    if (records.empty()) fail(ErrorKind::InvalidInput, "cohort_summary: empty cohort");
    std::map<std::string, std::vector<double>> groups;
    for (const auto& r : records) groups[r.dataset].push_back(r.density);
    std::vector<GroupSummary> out;
    out.reserve(groups.size());
    for (const auto& [tag, densities] : groups) {
        GroupSummary g;
        g.dataset = tag;
        g.n = static_cast<std::int64_t>(densities.size());
        mean_and_stddev(densities, g.mean, g.stddev);
        out.push_back(std::move(g));
    }
    return out;
}

Histogram density_histogram(std::span<const double> densities, double bin_width) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width))
        fail(ErrorKind::InvalidInput, "density_histogram: bin width must be > 0");
    const int nbins = std::max(1, static_cast<int>(std::ceil(1.0 / bin_width)));
    Histogram h;
    h.bin_width = bin_width;
    h.counts.assign(static_cast<std::size_t>(nbins), 0);
    h.edges.resize(static_cast<std::size_t>(nbins) + 1);
    for (int i = 0; i <= nbins; ++i)
        h.edges[static_cast<std::size_t>(i)] = std::min(1.0, i * bin_width);
    for (double d : densities) {
        if (!(d >= 0.0 && d <= 1.0))
            fail(ErrorKind::InvalidInput,
                 "density_histogram: density " + std::to_string(d) + " outside [0,1]");
        const int bin = std::min(static_cast<int>(d / bin_width), nbins - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

AgeGroupStats age_group_stats(const std::vector<CohortRecord>& records) {
    std::map<int, std::vector<double>> decades;
    AgeGroupStats out;
    for (const auto& r : records) {
        if (!r.age || !(*r.age >= 20.0 && *r.age < 90.0)) {
            ++out.excluded;
            continue;
        }
        decades[static_cast<int>(*r.age / 10.0)].push_back(r.density);
    }
    for (const auto& [decade, densities] : decades) {
        AgeBinSummary bin;
        bin.low = decade * 10;
        bin.high = decade * 10 + 9;
        bin.stats = summarize(densities);
        out.bins.push_back(std::move(bin));
    }
    return out;
}

}  // namespace mrd::stats
