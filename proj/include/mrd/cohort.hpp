#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrd/reports.hpp"

namespace mrd::stats {

struct CohortRecord {
    std::string subject_id;
    std::string dataset;
    std::optional<double> age;
    double density = 0.0;  // in [0,1]
    std::optional<DensityCategory> mammo_category;
};

/// Distribution summary; stddev is the population (1/n) form, quartiles use
/// linear interpolation between order statistics at rank (n-1)*p.
struct SummaryStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

SummaryStats summarize(std::span<const double> values);

struct GroupSummary {
    std::string dataset;
    std::int64_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

/// Per-dataset (n, mean, population std) of density, groups sorted by tag.
/// Empty cohort is an error.
std::vector<GroupSummary> cohort_summary(const std::vector<CohortRecord>& records);

struct Histogram {
    double bin_width = 0.0;
    std::vector<double> edges;        // size counts.size() + 1, spanning [0,1]
    std::vector<std::int64_t> counts; // bin i covers [edges[i], edges[i+1]); last bin closed
};

/// Uniform binning of densities over [0,1]. Bins are right-open except the
/// last, which is closed so density 1.0 lands in it. Any value outside
/// [0,1] is an error.
Histogram density_histogram(std::span<const double> densities, double bin_width = 0.02);

struct AgeBinSummary {
    int low = 0;   // inclusive
    int high = 0;  // inclusive decade end, e.g. 29
    SummaryStats stats;
};

struct AgeGroupStats {
    std::vector<AgeBinSummary> bins;  // empty bins omitted, ascending by age
    std::int64_t excluded = 0;        // records with missing or out-of-range age
};

/// Density stats per age decade, 20-29 through 80-89, bin by floor(age/10).
/// Records with no age or age outside [20,90) are excluded and counted.
AgeGroupStats age_group_stats(const std::vector<CohortRecord>& records);

}  // namespace mrd::stats
