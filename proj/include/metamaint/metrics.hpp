#pragma once

#include "metamaint/error.hpp"
#include "metamaint/family.hpp"
#include "metamaint/lexer.hpp"

#include <span>
#include <utility>
#include <vector>

namespace metamaint::metrics {

using lexer::TrigramSet;

class EmptyVariantSet : public Error {
public:
    using Error::Error;
};

struct FamilyMetrics {
    double retention = 1.0;
    double uniqueness = 0.0;
    double evolution_period_years = 0.0;
    std::size_t variant_count = 0;
};

/// Share of the variant's trigrams also found in the seed; 1.0 for an
/// empty variant.
double retention_f(const TrigramSet& variant, const TrigramSet& seed);

/// Mean of retention_f over the variants.
double retention_family(std::span<const TrigramSet> variants, const TrigramSet& seed);

/// Share of the variant's trigrams found in none of `others`; 0.0 for an
/// empty variant.
double uniqueness_u(const TrigramSet& variant, std::span<const TrigramSet> others);

/// Mean over variants v of uniqueness_u(v, {seed} + other variants).
double uniqueness_family(std::span<const TrigramSet> variants, const TrigramSet& seed);

inline constexpr double kSecondsPerYear = 365.25 * 86400.0;

/// Years from the earliest seed introduction to the latest post-seed
/// commit (or introduction) across the family's variants.
double evolution_period(const family::SeedFamily& family);

FamilyMetrics family_metrics(std::span<const TrigramSet> variants, const TrigramSet& seed,
                             const family::SeedFamily& family);

/// (family size, number of families) ascending by size.
std::vector<std::pair<std::size_t, std::size_t>> family_size_distribution(std::span<const std::size_t> sizes);
std::vector<std::pair<std::size_t, std::size_t>> family_size_distribution(std::span<const family::SeedFamily> families);

} // namespace metamaint::metrics
