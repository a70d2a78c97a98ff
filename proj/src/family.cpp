#include "metamaint/family.hpp"

#include "metamaint/corpus.hpp"
#include "metamaint/lexer.hpp"
#include "metamaint/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace metamaint::family {

std::string_view to_string(Stratum s)
{
    switch (s) {
    case Stratum::rare: return "rare";
    case Stratum::sometimes: return "sometimes";
    case Stratum::common: return "common";
    }
    return "rare";
}

std::string_view to_string(VariantStatus s)
{
    switch (s) {
    case VariantStatus::dormant: return "dormant";
    case VariantStatus::inactive: return "inactive";
    case VariantStatus::unchanged: return "unchanged";
    case VariantStatus::maintained: return "maintained";
    }
    return "inactive";
}

std::string_view to_string(FamilyType t)
{
    switch (t) {
    case FamilyType::not_maintained: return "not_maintained";
    case FamilyType::empty_seed: return "empty_seed";
    case FamilyType::zero_variance: return "zero_variance";
    case FamilyType::non_zero_variance: return "non_zero_variance";
    }
    return "not_maintained";
}

std::optional<Stratum> parse_stratum(std::string_view s)
{
    for (auto v : kStrata)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<VariantStatus> parse_status(std::string_view s)
{
    for (auto v : kStatuses)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::optional<FamilyType> parse_family_type(std::string_view s)
{
    for (auto v : kFamilyTypes)
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

std::size_t SeedFile::family_size() const
{
    std::set<std::string_view> repos;
    for (const auto& o : occurrences)
        repos.insert(o.repo_id);
    return repos.size();
}

void SampleSpec::validate() const
{
    if (!(confidence_z > 0))
        throw std::invalid_argument("confidence z must be positive");
    if (!(proportion_p > 0 && proportion_p < 1))
        throw std::invalid_argument("proportion must lie in (0, 1)");
    if (!(margin_e > 0))
        throw std::invalid_argument("margin of error must be positive");
}

std::vector<gitio::BlobPath> filter_source_blobs(std::span<const gitio::BlobPath> blobs)
{
    std::vector<gitio::BlobPath> kept;
    for (const auto& b : blobs)
        if (corpus::extension_language(b.path))
            kept.push_back(b);
    return kept;
}

BlobIndex build_blob_index(std::span<const RepoBlobs> enumerations)
{
    BlobIndex index;
    for (const auto& e : enumerations)
        for (const auto& b : e.blobs)
            index[b.blob].insert({e.repo_id, b.path});
    return index;
}

std::vector<SeedFamily> identify_seed_families(const BlobIndex& index, std::size_t min_size,
                                               const StrataThresholds& thresholds)
{
    min_size = std::max<std::size_t>(min_size, 2);
    std::vector<SeedFamily> families;
    for (const auto& [blob, occurrences] : index) {
        SeedFamily f;
        f.seed.blob = blob;
        f.seed.occurrences.assign(occurrences.begin(), occurrences.end());
        f.size = f.seed.family_size();
        if (f.size < min_size)
            continue;
        f.seed.language = corpus::extension_language(f.seed.occurrences.front().path).value_or(Language::Other);
        f.stratum = stratify(f.size, thresholds);
        for (const auto& o : f.seed.occurrences) {
            Variant v;
            v.repo_id = o.repo_id;
            v.path = o.path;
            f.variants.push_back(std::move(v));
        }
        families.push_back(std::move(f));
    }
    return families;
}

Stratum stratify(std::size_t family_size, const StrataThresholds& thresholds)
{
    if (family_size < 2)
        throw InvalidSize("family size " + std::to_string(family_size) + " is below 2");
    if (family_size >= thresholds.common)
        return Stratum::common;
    if (family_size >= thresholds.sometimes)
        return Stratum::sometimes;
    return Stratum::rare;
}

std::size_t sample_size(std::size_t population, const SampleSpec& spec)
{
    spec.validate();
    if (population == 0)
        return 0;
    const long double z = spec.confidence_z, p = spec.proportion_p, e = spec.margin_e;
    const long double n0 = z * z * p * (1.0L - p) / (e * e);
    const long double n = n0 / (1.0L + (n0 - 1.0L) / static_cast<long double>(population));
    // Parameters like 1.96 are inexact in binary, so an exact half (N=309
    // gives 171.5) can land just below .5; round it up like the decimal value.
    auto rounded = static_cast<std::size_t>(std::floor(n + 0.5L + 1e-9L));
    return std::clamp<std::size_t>(rounded, 1, population);
}

std::map<Stratum, std::vector<BlobId>> stratified_sample(std::span<const SeedFamily> families, const SampleSpec& spec)
{
    std::map<Stratum, std::vector<BlobId>> population;
    for (const auto& f : families)
        population[f.stratum].push_back(f.seed.blob);

    std::map<Stratum, std::vector<BlobId>> sample;
    for (auto stratum : kStrata) {
        auto& ids = population[stratum];
        std::sort(ids.begin(), ids.end());
        const std::size_t n = sample_size(ids.size(), spec);
        // Independent stream per stratum so adding families to one stratum
        // leaves the others' draws untouched.
        Rng rng(spec.rng_seed * 3 + static_cast<std::uint64_t>(stratum));
        for (std::size_t i = 0; i < n; ++i)
            std::swap(ids[i], ids[i + rng.below(ids.size() - i)]);
        std::vector<BlobId> chosen(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(chosen.begin(), chosen.end());
        sample[stratum] = std::move(chosen);
    }
    return sample;
}

VariantHistory split_history(std::span<const gitio::PathChange> changes, const BlobId& seed)
{
    VariantHistory h;
    auto intro = std::find_if(changes.begin(), changes.end(),
                              [&](const gitio::PathChange& c) { return c.blob_after && *c.blob_after == seed; });
    if (intro == changes.end())
        return h;
    h.seed_intro_commit = intro->commit;
    for (auto it = std::next(intro); it != changes.end(); ++it)
        h.post_seed_commits.push_back({it->commit, it->patch});
    return h;
}

VariantStatus classify_variant_status(const VariantFacts& facts, Timestamp reference_date, int dormancy_days)
{
    const Timestamp cutoff = reference_date - static_cast<Timestamp>(dormancy_days) * 86400;
    if (facts.repo_last_commit_time < cutoff)
        return VariantStatus::dormant;
    if (!facts.head_blob)
        return VariantStatus::inactive;
    if (*facts.head_blob == facts.seed_blob)
        return VariantStatus::unchanged;
    return VariantStatus::maintained;
}

SeedFamily dedupe_identical_repos(const SeedFamily& family, const std::map<std::string, std::string>& head_commit_by_repo)
{
    // head commit -> lowest repo_id holding it
    std::map<std::string, std::string> keeper;
    for (const auto& v : family.variants) {
        auto it = head_commit_by_repo.find(v.repo_id);
        if (it == head_commit_by_repo.end() || it->second.empty())
            continue;
        auto [k, inserted] = keeper.emplace(it->second, v.repo_id);
        if (!inserted && v.repo_id < k->second)
            k->second = v.repo_id;
    }

    SeedFamily out = family;
    out.variants.clear();
    for (const auto& v : family.variants) {
        auto it = head_commit_by_repo.find(v.repo_id);
        if (it != head_commit_by_repo.end() && !it->second.empty() && keeper.at(it->second) != v.repo_id)
            continue;
        out.variants.push_back(v);
    }
    return out;
}

SeedFamily dedupe_duplicate_variants(const SeedFamily& family)
{
    auto better = [](const Variant& a, const Variant& b) {
        if (a.post_seed_commits.size() != b.post_seed_commits.size())
            return a.post_seed_commits.size() > b.post_seed_commits.size();
        if (a.repo_id != b.repo_id)
            return a.repo_id < b.repo_id;
        return a.path < b.path;
    };
    std::map<BlobId, const Variant*> best;
    for (const auto& v : family.variants) {
        if (v.status != VariantStatus::maintained || !v.head_blob)
            continue;
        auto [it, inserted] = best.emplace(*v.head_blob, &v);
        if (!inserted && better(v, *it->second))
            it->second = &v;
    }

    SeedFamily out = family;
    out.variants.clear();
    for (const auto& v : family.variants) {
        if (v.status == VariantStatus::maintained && v.head_blob && best.at(*v.head_blob) != &v)
            continue;
        out.variants.push_back(v);
    }
    return out;
}

FamilyType classify_family_type(const SeedFamily& family, std::string_view seed_content)
{
    return classify_family_type(family, lexer::is_empty_source(seed_content, family.seed.language));
}

FamilyType classify_family_type(const SeedFamily& family, bool seed_is_empty)
{
    if (seed_is_empty)
        return FamilyType::empty_seed;
    std::set<BlobId> maintained_heads;
    for (const auto& v : family.variants)
        if (v.status == VariantStatus::maintained && v.head_blob)
            maintained_heads.insert(*v.head_blob);
    if (maintained_heads.empty())
        return FamilyType::not_maintained;
    if (maintained_heads.size() == 1)
        return FamilyType::zero_variance;
    return FamilyType::non_zero_variance;
}

std::vector<Variant> select_variants_for_annotation(const SeedFamily& family, std::size_t limit)
{
    if (family.variants.size() <= limit)
        return family.variants;

    std::vector<const Variant*> order;
    for (const auto& v : family.variants)
        order.push_back(&v);
    auto by_key = [](const Variant* v) { return std::tie(v->repo_id, v->path); };

    std::sort(order.begin(), order.end(), [&](const Variant* a, const Variant* b) {
        if (a->post_seed_commits.size() != b->post_seed_commits.size())
            return a->post_seed_commits.size() > b->post_seed_commits.size();
        return by_key(a) < by_key(b);
    });
    const std::size_t top = (limit + 1) / 2;
    std::vector<const Variant*> rest(order.begin() + static_cast<std::ptrdiff_t>(top), order.end());
    std::sort(rest.begin(), rest.end(), [&](const Variant* a, const Variant* b) {
        if (a->post_seed_commits.size() != b->post_seed_commits.size())
            return a->post_seed_commits.size() < b->post_seed_commits.size();
        return by_key(a) < by_key(b);
    });

    std::vector<Variant> chosen;
    for (std::size_t i = 0; i < top; ++i)
        chosen.push_back(*order[i]);
    for (std::size_t i = 0; i < limit - top && i < rest.size(); ++i)
        chosen.push_back(*rest[i]);
    return chosen;
}

} // namespace metamaint::family
