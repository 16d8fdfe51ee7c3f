#pragma once

#include <optional>
#include <string>

namespace mrd::stats {

/// Four-level ordinal mammographic density scale; the enum value doubles as
/// the ordinal rank used for rank correlations.
enum class DensityCategory : int {
    AlmostEntirelyFatty = 1,
    ScatteredFibroglandular = 2,
    HeterogeneouslyDense = 3,
    ExtremelyDense = 4,
};

inline int category_rank(DensityCategory c) { return static_cast<int>(c); }

/// Human-readable label, e.g. "Heterogeneously dense".
std::string category_name(DensityCategory c);

/// Machine token used in CSV files: fatty, scattered, heterogeneously_dense,
/// extremely_dense.
std::string category_token(DensityCategory c);

/// Inverse of category_token. An empty token means "no category recorded"
/// and maps to nullopt; any other unknown token is an InvalidInput error.
std::optional<DensityCategory> category_from_token(const std::string& token);

/// Assigns a density category from free-text report prose by case-insensitive,
/// whitespace-normalized substring matching of the four keyword families.
/// When phrases from several families appear, the densest category wins.
/// No recognized phrase at all is an InvalidInput error so callers must
/// route the report to an exception list instead of defaulting.
DensityCategory parse_density_category(const std::string& report_text);

}  // namespace mrd::stats
