#include "mrd/csv.hpp"

#include <fstream>
#include <sstream>

#include "mrd/core.hpp"

namespace mrd::csv {

namespace {

// Splits one decoded record; returns false at end of input.
// `pos` advances past the record's terminator.
bool next_record(const std::string& text, std::size_t& pos, std::vector<std::string>& fields,
                 std::size_t record_number) {
    fields.clear();
    const std::size_t n = text.size();
    // Skip blank lines between records.
    while (pos < n && (text[pos] == '\n' || text[pos] == '\r')) ++pos;
    if (pos >= n) return false;

    std::string field;
    bool in_quotes = false;
    while (pos < n) {
        const char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < n && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                } else {
                    in_quotes = false;
                    ++pos;
                }
            } else {
                field += c;
                ++pos;
            }
            continue;
        }
        if (c == '"') {
            if (!field.empty())
                fail(ErrorKind::InvalidInput, "csv: stray quote inside unquoted field, record " +
                                                  std::to_string(record_number));
            in_quotes = true;
            ++pos;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++pos;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && pos + 1 < n && text[pos + 1] == '\n') ++pos;
            ++pos;
            fields.push_back(std::move(field));
            return true;
        } else {
            field += c;
            ++pos;
        }
    }
    if (in_quotes)
        fail(ErrorKind::InvalidInput,
             "csv: unterminated quoted field, record " + std::to_string(record_number));
    fields.push_back(std::move(field));
    return true;
}

}  // namespace

Table parse_text(const std::string& text) {
    Table t;
    std::size_t pos = 0;
    std::vector<std::string> fields;
    std::size_t record = 1;
    if (!next_record(text, pos, fields, record)) fail(ErrorKind::InvalidInput, "csv: empty input");
    t.header = fields;
    while (next_record(text, pos, fields, ++record)) t.rows.push_back(fields);
    return t;
}

Table parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "csv: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_text(buf.str());
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " [" + path + "]");
    }
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    out += '\n';
    return out;
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "csv: cannot open " + path + " for writing");
    out << format_row(table.header);
    for (const auto& row : table.rows) out << format_row(row);
    if (!out) fail(ErrorKind::Io, "csv: write failed for " + path);
}

}  // namespace mrd::csv
