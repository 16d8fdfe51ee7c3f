#include "mrd/cohort_csv.hpp"

#include <charconv>
#include <cmath>

#include "mrd/core.hpp"

namespace mrd::stats {

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) fail(ErrorKind::Computation, "format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& context) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        fail(ErrorKind::InvalidInput, context + ": cannot parse number \"" + text + "\"");
    return value;
}

namespace {

std::vector<CohortRecord> records_from_table(const csv::Table& table) {
    const std::vector<std::string> expected = {"subject_id", "dataset", "age", "density",
                                               "mammo_category"};
    if (table.header != expected)
        fail(ErrorKind::InvalidInput,
             std::string("cohort csv: header must be exactly `") + kCohortCsvHeader + "`");
    std::vector<CohortRecord> records;
    records.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string where = "cohort csv row " + std::to_string(i + 2);
        if (row.size() != expected.size())
            fail(ErrorKind::InvalidInput, where + ": expected " +
                                              std::to_string(expected.size()) + " fields, got " +
                                              std::to_string(row.size()));
        CohortRecord r;
        r.subject_id = row[0];
        if (r.subject_id.empty())
            fail(ErrorKind::InvalidInput, where + ": empty subject_id");
        r.dataset = row[1];
        if (!row[2].empty()) {
            const double age = parse_double(row[2], where + " age");
            if (age < 0.0) fail(ErrorKind::InvalidInput, where + ": negative age");
            r.age = age;
        }
        r.density = parse_double(row[3], where + " density");
        if (!(r.density >= 0.0 && r.density <= 1.0))
            fail(ErrorKind::InvalidInput,
                 where + ": density " + row[3] + " outside [0,1]");
        try {
            r.mammo_category = category_from_token(row[4]);
        } catch (const Error& e) {
            fail(e.kind(), where + ": " + e.what());
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) fail(ErrorKind::InvalidInput, "cohort csv: no data rows");
    return records;
}

}  // namespace

std::vector<CohortRecord> load_cohort_csv(const std::string& path) {
    return records_from_table(csv::parse_file(path));
}

std::vector<CohortRecord> parse_cohort_csv(const std::string& text) {
    return records_from_table(csv::parse_text(text));
}

std::vector<CohortRecord> cohort_from_table(const csv::Table& table) {
    return records_from_table(table);
}

void save_cohort_csv(const std::string& path, const std::vector<CohortRecord>& records) {
    csv::Table table;
    table.header = {"subject_id", "dataset", "age", "density", "mammo_category"};
    for (const auto& r : records) {
        std::vector<std::string> row(5);
        row[0] = r.subject_id;
        row[1] = r.dataset;
        row[2] = r.age ? format_double(*r.age) : "";
        row[3] = format_double(r.density);
        row[4] = r.mammo_category ? category_token(*r.mammo_category) : "";
        table.rows.push_back(std::move(row));
    }
    csv::write_file(path, table);
}

}  // namespace mrd::stats
