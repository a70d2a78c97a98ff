#pragma once

#include "metamaint/error.hpp"
#include "metamaint/gitio.hpp"
#include "metamaint/language.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metamaint::corpus {

class ManifestParseError : public Error {
public:
    ManifestParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateRepoId : public Error {
public:
    using Error::Error;
};

struct RepoRecord {
    std::string repo_id;
    std::filesystem::path local_path;
    Language declared_language = Language::Other;
    bool is_fork = false;
    std::optional<std::string> default_branch;
    std::optional<std::uint64_t> total_commits;
    std::optional<std::uint64_t> max_commits_in_two_year_window;
    std::optional<std::uint64_t> committer_count;

    bool counts_known() const
    {
        return total_commits && max_commits_in_two_year_window && committer_count;
    }
    gitio::RepoHandle handle() const { return {repo_id, local_path}; }
};

struct FilterCriteria {
    std::uint64_t min_total_commits = 500; // strictly more than this many
    std::uint64_t min_two_year_commits = 100;
    bool exclude_forks = true;
    std::uint64_t min_committers = 2;
};

/// JSON Lines manifest. Relative repository paths resolve against the
/// manifest's directory.
std::vector<RepoRecord> load_manifest(const std::filesystem::path& file);

/// Fills missing count fields from the repository history.
void populate_counts(RepoRecord& record);

bool passes_activity_filters(const RepoRecord& record, const FilterCriteria& criteria);

/// Throws std::invalid_argument if a record's counts are not populated.
std::vector<RepoRecord> apply_activity_filters(std::span<const RepoRecord> records,
                                               const FilterCriteria& criteria);

std::optional<Language> extension_language(std::string_view path);

inline constexpr gitio::Timestamp kTwoYearWindowSeconds = 730LL * 86400;

/// Largest number of commits inside any half-open window [t, t + 730 days).
/// `commit_times` must be sorted ascending.
std::uint64_t two_year_window_max(std::span<const gitio::Timestamp> commit_times);

} // namespace metamaint::corpus
