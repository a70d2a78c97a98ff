#include "metamaint/metrics.hpp"

#include <algorithm>
#include <map>

namespace metamaint::metrics {

double retention_f(const TrigramSet& variant, const TrigramSet& seed)
{
    if (variant.empty())
        return 1.0;
    std::size_t shared = 0;
    // Both sides are sorted; merge-count the intersection.
    auto a = variant.begin(), b = seed.begin();
    while (a != variant.end() && b != seed.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            ++shared;
            ++a;
            ++b;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(variant.size());
}

double retention_family(std::span<const TrigramSet> variants, const TrigramSet& seed)
{
    if (variants.empty())
        throw EmptyVariantSet("retention of an empty variant set");
    double sum = 0.0;
    for (const auto& v : variants)
        sum += retention_f(v, seed);
    return sum / static_cast<double>(variants.size());
}

double uniqueness_u(const TrigramSet& variant, std::span<const TrigramSet> others)
{
    if (variant.empty())
        return 0.0;
    std::size_t unique = 0;
    for (const auto& t : variant)
        if (std::none_of(others.begin(), others.end(), [&](const TrigramSet& o) { return o.contains(t); }))
            ++unique;
    return static_cast<double>(unique) / static_cast<double>(variant.size());
}

double uniqueness_family(std::span<const TrigramSet> variants, const TrigramSet& seed)
{
    if (variants.empty())
        throw EmptyVariantSet("uniqueness of an empty variant set");
    // A trigram is unique to v iff the seed lacks it and v is the only
    // variant holding it.
    std::map<lexer::Trigram, std::size_t> holders;
    for (const auto& v : variants)
        for (const auto& t : v)
            ++holders[t];

    double sum = 0.0;
    for (const auto& v : variants) {
        if (v.empty())
            continue;
        std::size_t unique = 0;
        for (const auto& t : v)
            if (holders[t] == 1 && !seed.contains(t))
                ++unique;
        sum += static_cast<double>(unique) / static_cast<double>(v.size());
    }
    return sum / static_cast<double>(variants.size());
}

double evolution_period(const family::SeedFamily& family)
{
    std::optional<gitio::Timestamp> first, last;
    for (const auto& v : family.variants) {
        if (!v.seed_intro_commit)
            continue;
        auto intro = v.seed_intro_commit->commit_time;
        auto latest = intro;
        for (const auto& c : v.post_seed_commits)
            latest = std::max(latest, c.commit.commit_time);
        first = first ? std::min(*first, intro) : intro;
        last = last ? std::max(*last, latest) : latest;
    }
    if (!first)
        return 0.0;
    return static_cast<double>(*last - *first) / kSecondsPerYear;
}

FamilyMetrics family_metrics(std::span<const TrigramSet> variants, const TrigramSet& seed,
                             const family::SeedFamily& family)
{
    FamilyMetrics m;
    m.retention = retention_family(variants, seed);
    m.uniqueness = uniqueness_family(variants, seed);
    m.evolution_period_years = evolution_period(family);
    m.variant_count = variants.size();
    return m;
}

std::vector<std::pair<std::size_t, std::size_t>> family_size_distribution(std::span<const std::size_t> sizes)
{
    std::map<std::size_t, std::size_t> hist;
    for (auto s : sizes)
        ++hist[s];
    return {hist.begin(), hist.end()};
}

std::vector<std::pair<std::size_t, std::size_t>> family_size_distribution(std::span<const family::SeedFamily> families)
{
    std::vector<std::size_t> sizes;
    sizes.reserve(families.size());
    for (const auto& f : families)
        sizes.push_back(f.size);
    return family_size_distribution(sizes);
}

} // namespace metamaint::metrics
