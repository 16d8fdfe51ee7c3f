#include "mrd/reports.hpp"

#include <array>
#include <cctype>
#include <vector>

#include "mrd/core.hpp"

namespace mrd::stats {

std::string category_name(DensityCategory c) {
    switch (c) {
        case DensityCategory::AlmostEntirelyFatty: return "Almost entirely fatty";
        case DensityCategory::ScatteredFibroglandular: return "Scattered fibroglandular";
        case DensityCategory::HeterogeneouslyDense: return "Heterogeneously dense";
        case DensityCategory::ExtremelyDense: return "Extremely dense";
    }
    fail(ErrorKind::InvalidInput, "category_name: invalid category value");
}

std::string category_token(DensityCategory c) {
    switch (c) {
        case DensityCategory::AlmostEntirelyFatty: return "fatty";
        case DensityCategory::ScatteredFibroglandular: return "scattered";
        case DensityCategory::HeterogeneouslyDense: return "heterogeneously_dense";
        case DensityCategory::ExtremelyDense: return "extremely_dense";
    }
    fail(ErrorKind::InvalidInput, "category_token: invalid category value");
}

std::optional<DensityCategory> category_from_token(const std::string& token) {
    if (token.empty()) return std::nullopt;
    if (token == "fatty") return DensityCategory::AlmostEntirelyFatty;
    if (token == "scattered") return DensityCategory::ScatteredFibroglandular;
    if (token == "heterogeneously_dense") return DensityCategory::HeterogeneouslyDense;
    if (token == "extremely_dense") return DensityCategory::ExtremelyDense;
    fail(ErrorKind::InvalidInput, "unknown density category token \"" + token + "\"");
}

namespace {

// Lowercase and collapse every whitespace run to one space so phrases match
// across line breaks and spacing quirks.
std::string normalize_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = true;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += static_cast<char>(std::tolower(c));
            in_space = false;
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

struct KeywordFamily {
    DensityCategory category;
    std::vector<const char*> phrases;
};

// Ordered densest-first: a report mentioning several families is assigned
// the densest one.
const std::array<KeywordFamily, 4> kFamilies = {{
    {DensityCategory::ExtremelyDense, {"extremely dense", "extremely fibroglandular"}},
    {DensityCategory::HeterogeneouslyDense,
     {"heterogeneously dense", "heterogeneously fibroglandular"}},
    {DensityCategory::ScatteredFibroglandular, {"scattered fibroglandular"}},
    {DensityCategory::AlmostEntirelyFatty, {"entirely fatty", "predominantly fatty"}},
}};

}  // namespace

DensityCategory parse_density_category(const std::string& report_text) {
    if (report_text.empty())
        fail(ErrorKind::InvalidInput, "parse_density_category: empty report text");
    const std::string text = normalize_text(report_text);
    for (const auto& family : kFamilies)
        for (const char* phrase : family.phrases)
            if (text.find(phrase) != std::string::npos) return family.category;
    fail(ErrorKind::InvalidInput,
         "parse_density_category: no density keyword found in report text");
}

}  // namespace mrd::stats
