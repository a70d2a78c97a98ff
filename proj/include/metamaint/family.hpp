#pragma once

#include "metamaint/error.hpp"
#include "metamaint/gitio.hpp"
#include "metamaint/language.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace metamaint::family {

using gitio::BlobId;
using gitio::CommitMeta;
using gitio::PatchId;
using gitio::Timestamp;

class InvalidSize : public Error {
public:
    using Error::Error;
};

enum class Stratum { rare, sometimes, common };
enum class VariantStatus { dormant, inactive, unchanged, maintained };
enum class FamilyType { not_maintained, empty_seed, zero_variance, non_zero_variance };

inline constexpr Stratum kStrata[] = {Stratum::common, Stratum::sometimes, Stratum::rare};
inline constexpr VariantStatus kStatuses[] = {VariantStatus::dormant, VariantStatus::inactive,
                                              VariantStatus::unchanged, VariantStatus::maintained};
inline constexpr FamilyType kFamilyTypes[] = {FamilyType::not_maintained, FamilyType::empty_seed,
                                              FamilyType::zero_variance, FamilyType::non_zero_variance};

std::string_view to_string(Stratum s);
std::string_view to_string(VariantStatus s);
std::string_view to_string(FamilyType t);
std::optional<Stratum> parse_stratum(std::string_view s);
std::optional<VariantStatus> parse_status(std::string_view s);
std::optional<FamilyType> parse_family_type(std::string_view s);

struct Occurrence {
    std::string repo_id;
    std::string path;
    auto operator<=>(const Occurrence&) const = default;
};

struct SeedFile {
    BlobId blob;
    Language language = Language::Other;
    std::vector<Occurrence> occurrences; // sorted

    /// Number of distinct repositories holding the blob.
    std::size_t family_size() const;
};

/// A post-seed commit on the variant path with its per-path patch identity.
struct VariantCommit {
    CommitMeta commit;
    std::optional<PatchId> patch;
    bool operator==(const VariantCommit&) const = default;
};

struct Variant {
    std::string repo_id;
    std::string path;
    std::optional<CommitMeta> seed_intro_commit; // absent if the seed never reached the main branch here
    std::vector<VariantCommit> post_seed_commits;
    std::optional<BlobId> head_blob;
    VariantStatus status = VariantStatus::inactive;

    /// Unchanged by content, but the path was edited (and restored) since.
    bool churned() const { return status == VariantStatus::unchanged && !post_seed_commits.empty(); }
};

struct StrataThresholds {
    std::size_t sometimes = 28;
    std::size_t common = 331;
};

struct SeedFamily {
    SeedFile seed;
    std::vector<Variant> variants;
    std::size_t size = 0; // distinct repositories at identification
    Stratum stratum = Stratum::rare;
    std::optional<FamilyType> family_type;

    const std::string& id() const { return seed.blob.hex(); }
};

struct SampleSpec {
    double confidence_z = 1.96;
    double proportion_p = 0.5;
    double margin_e = 0.05;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
};

struct RepoBlobs {
    std::string repo_id;
    std::vector<gitio::BlobPath> blobs;
};

using BlobIndex = std::map<BlobId, std::set<Occurrence>>;

/// Keeps only blobs at paths with one of the seven source extensions.
std::vector<gitio::BlobPath> filter_source_blobs(std::span<const gitio::BlobPath> blobs);

BlobIndex build_blob_index(std::span<const RepoBlobs> enumerations);

/// One family per blob held by at least `min_size` (>= 2) distinct
/// repositories; every (repo, path) occurrence becomes a variant candidate.
std::vector<SeedFamily> identify_seed_families(const BlobIndex& index, std::size_t min_size = 2,
                                               const StrataThresholds& thresholds = {});

Stratum stratify(std::size_t family_size, const StrataThresholds& thresholds = {});

/// Cochran's estimate with finite-population correction, rounded to nearest.
std::size_t sample_size(std::size_t population, const SampleSpec& spec);

/// Per stratum, sample_size(population) families drawn uniformly without
/// replacement. Selected ids are returned sorted.
std::map<Stratum, std::vector<BlobId>> stratified_sample(std::span<const SeedFamily> families, const SampleSpec& spec);

/// Seed introduction and post-seed commits of one variant path.
struct VariantHistory {
    std::optional<CommitMeta> seed_intro_commit;
    std::vector<VariantCommit> post_seed_commits;
};

/// Splits a path's main-branch history at the earliest commit that leaves
/// the seed blob at the path.
VariantHistory split_history(std::span<const gitio::PathChange> changes, const BlobId& seed);

struct VariantFacts {
    Timestamp repo_last_commit_time = 0;
    std::optional<BlobId> head_blob;
    BlobId seed_blob;
};

inline constexpr int kDefaultDormancyDays = 365;

VariantStatus classify_variant_status(const VariantFacts& facts, Timestamp reference_date,
                                      int dormancy_days = kDefaultDormancyDays);

/// Among repositories whose main-branch head commits are equal, only the
/// lowest repo_id keeps its variants. Repos missing from the map, or with
/// an empty head, are never merged.
SeedFamily dedupe_identical_repos(const SeedFamily& family,
                                  const std::map<std::string, std::string>& head_commit_by_repo);

/// Among maintained variants with equal head blobs keep the one with the most
/// post-seed commits (ties: lowest repo_id, then path).
SeedFamily dedupe_duplicate_variants(const SeedFamily& family);

/// Expects classified statuses and identical repositories already removed.
FamilyType classify_family_type(const SeedFamily& family, std::string_view seed_content);
FamilyType classify_family_type(const SeedFamily& family, bool seed_is_empty);

/// Up to `limit` variants: the most-committed half (rounded up) plus the
/// least-committed rest; ties by repo_id.
std::vector<Variant> select_variants_for_annotation(const SeedFamily& family, std::size_t limit = 5);

} // namespace metamaint::family
