#pragma once

#include "metamaint/family.hpp"
#include "metamaint/opportunity.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

// On-disk formats shared by the pipeline stages. Every JSON record carries
// a "schema" tag; readers reject records with an unexpected tag.
namespace metamaint::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kRepoSchema = "repo/1";
inline constexpr std::string_view kBlobsSchema = "blobs/1";
inline constexpr std::string_view kFamilySchema = "family/1";
inline constexpr std::string_view kSampleSchema = "sample/1";
inline constexpr std::string_view kStatusSchema = "status/1";
inline constexpr std::string_view kOpportunitySchema = "opportunity/1";
inline constexpr std::string_view kReportSchema = "report/1";

/// Writes to a sibling temporary file and renames it into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// Calls `fn` for every non-blank line, parsed. Throws metamaint::Error
/// with the file and line number on malformed JSON or a schema mismatch.
void for_each_record(const std::filesystem::path& path, std::string_view schema,
                     const std::function<void(const Json&)>& fn);

/// Compact single-line JSON.
std::string dump_line(const Json& j);

/// Fixed six-decimal rendering used in CSV and reports.
std::string format_fixed(double value, int decimals = 6);

/// YYYY-MM-DD at 00:00 UTC. Throws metamaint::Error on malformed dates.
gitio::Timestamp parse_date(std::string_view date);
std::string format_date(gitio::Timestamp t);

Json to_json(const gitio::CommitMeta& c);
gitio::CommitMeta commit_from_json(const Json& j);

/// Occurrence-only family record (families.jsonl).
Json family_to_json(const family::SeedFamily& f);
family::SeedFamily family_from_json(const Json& j);

enum class DropReason { none, identical_repo, duplicate_variant };
std::string_view to_string(DropReason r);

/// Fully classified family (status.jsonl). `dropped` is parallel to
/// f.variants.
struct StatusRecord {
    family::SeedFamily family;
    std::vector<DropReason> dropped;
    bool seed_empty = false;

    /// Variants surviving identical-repository removal.
    family::SeedFamily without_identical_repos() const;
    /// Variants surviving both dedupe passes.
    family::SeedFamily deduplicated() const;
};

Json status_to_json(const StatusRecord& r);
StatusRecord status_from_json(const Json& j);

Json opportunity_to_json(const opportunity::OpportunityReport& r, family::Stratum stratum);

} // namespace metamaint::io
