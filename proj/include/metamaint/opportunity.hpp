#pragma once

#include "metamaint/family.hpp"

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace metamaint::opportunity {

using gitio::CommitMeta;
using gitio::PatchId;

/// A post-seed commit whose per-path patch appears in exactly one
/// repository of its family.
struct UniqueCommit {
    std::string family_ref;
    std::string repo_id;
    std::string path;
    CommitMeta commit;
    PatchId patch;
    std::vector<std::string> matched_keywords;
    bool substring_match = false; // no keyword occurs as a whole word
    std::vector<std::string> targets; // maintained sibling repos lacking the patch
};

struct OpportunityReport {
    std::string family_ref;
    std::vector<UniqueCommit> unique_commits;
    std::vector<std::string> candidate_targets; // maintained repos other than every source repo
};

inline const std::vector<std::string> kDefaultKeywords = {"fix"};
inline const std::vector<std::string> kExtendedKeywords = {"fix", "security", "performance"};

/// PatchId -> repositories exhibiting it, over every post-seed commit.
std::map<PatchId, std::set<std::string>> collect_family_patches(const family::SeedFamily& family);

/// Sorted by (repo_id, path, commit time, commit id).
std::vector<UniqueCommit> find_unique_commits(const family::SeedFamily& family);

/// Case-insensitive substring match of any keyword against the whole
/// message. Order of `commits` is preserved.
std::vector<UniqueCommit> filter_fix_commits(std::span<const UniqueCommit> commits,
                                             std::span<const std::string> keywords = kDefaultKeywords);

/// Absent when the family has no unique fix commit or more than
/// `max_unique` of them.
std::optional<OpportunityReport> propose_opportunities(const family::SeedFamily& family,
                                                       std::span<const std::string> keywords = kDefaultKeywords,
                                                       std::size_t max_unique = 2);

} // namespace metamaint::opportunity
