#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mrd/core.hpp"

namespace mrd::kv {

/// Structured-text file: one `key = value` pair per line, `#` comments,
/// blank lines ignored. Used by portable volume headers, phantom specs
/// and run configs.
class KeyValueFile {
public:
    static KeyValueFile parse_file(const std::filesystem::path& path);
    static KeyValueFile parse_text(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;

    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::vector<std::int64_t> get_ints(const std::string& key, std::size_t expected = 0) const;
    std::vector<double> get_doubles(const std::string& key, std::size_t expected = 0) const;

    const std::string& origin() const { return origin_; }
    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::string origin_;
    std::map<std::string, std::string> entries_;
};

/// Writes pairs in the given order as `key = value` lines.
void write_file(const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace mrd::kv
