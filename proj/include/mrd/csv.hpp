#pragma once

#include <string>
#include <vector>

namespace mrd::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 parsing: comma separators, CRLF or LF record ends, double-quoted
/// fields that may contain commas, quotes ("" escape) and newlines.
/// The first record is the header. Completely empty lines are skipped.
Table parse_text(const std::string& text);
Table parse_file(const std::string& path);

/// Quotes a field when it contains a comma, quote, or newline.
std::string escape(const std::string& field);

std::string format_row(const std::vector<std::string>& fields);
void write_file(const std::string& path, const Table& table);

}  // namespace mrd::csv
