#pragma once

#include <string>
#include <vector>

#include "mrd/cohort.hpp"
#include "mrd/csv.hpp"

namespace mrd::stats {

inline constexpr const char* kCohortCsvHeader = "subject_id,dataset,age,density,mammo_category";

/// Reads a cohort CSV with the exact header
/// `subject_id,dataset,age,density,mammo_category`. Age and mammo_category
/// may be empty; density must parse and lie in [0,1]. Errors carry the
/// 1-based row number (the header is row 1).
std::vector<CohortRecord> load_cohort_csv(const std::string& path);
std::vector<CohortRecord> parse_cohort_csv(const std::string& text);
std::vector<CohortRecord> cohort_from_table(const csv::Table& table);

/// Writes the same schema; numbers use shortest round-trip formatting so a
/// load of the written file reproduces the records exactly.
void save_cohort_csv(const std::string& path, const std::vector<CohortRecord>& records);

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Strict finite-double parse of a whole string.
double parse_double(const std::string& text, const std::string& context);

}  // namespace mrd::stats
