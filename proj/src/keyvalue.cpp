#include "mrd/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mrd::kv {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream iss(value);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), path.string());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text, const std::string& origin) {
    KeyValueFile kv;
    kv.origin_ = origin;
    std::istringstream iss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::InvalidInput,
                 origin + ":" + std::to_string(lineno) + ": expected `key = value`, got `" + t + "`");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            fail(ErrorKind::InvalidInput, origin + ":" + std::to_string(lineno) + ": empty key");
        kv.entries_[key] = value;
    }
    return kv;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

const std::string& KeyValueFile::get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        fail(ErrorKind::InvalidInput, origin_ + ": missing required field `" + key + "`");
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::int64_t KeyValueFile::get_int(const std::string& key) const {
    const std::string& v = get(key);
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` is not an integer: " + v);
    return out;
}

double KeyValueFile::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` is not a number: " + v);
    }
}

std::vector<std::int64_t> KeyValueFile::get_ints(const std::string& key, std::size_t expected) const {
    auto fields = split_fields(get(key));
    std::vector<std::int64_t> out;
    for (const auto& f : fields) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc() || p != f.data() + f.size())
            fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` has non-integer entry: " + f);
        out.push_back(v);
    }
    if (expected && out.size() != expected)
        fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` needs " +
                                          std::to_string(expected) + " entries, got " +
                                          std::to_string(out.size()));
    return out;
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key, std::size_t expected) const {
    auto fields = split_fields(get(key));
    std::vector<double> out;
    for (const auto& f : fields) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(f, &pos));
            if (pos != f.size()) throw std::invalid_argument(f);
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` has non-numeric entry: " + f);
        }
    }
    if (expected && out.size() != expected)
        fail(ErrorKind::InvalidInput, origin_ + ": field `" + key + "` needs " +
                                          std::to_string(expected) + " entries, got " +
                                          std::to_string(out.size()));
    return out;
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::pair<std::string, std::string>>& pairs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    for (const auto& [k, v] : pairs) out << k << " = " << v << "\n";
    if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace mrd::kv
