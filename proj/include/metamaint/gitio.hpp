#pragma once

#include "metamaint/error.hpp"

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Read-only access to local git repositories through the git command-line
// tools. Every call spawns git; bulk reads go through the batch modes so a
// whole repository costs a handful of processes.
namespace metamaint::gitio {

using Timestamp = std::int64_t; // seconds since the epoch, UTC

class RepoUnreadable : public Error {
public:
    using Error::Error;
};
class ObjectNotFound : public Error {
public:
    using Error::Error;
};
class NoBranch : public Error {
public:
    using Error::Error;
};
class EmptyRepo : public Error {
public:
    using Error::Error;
};

/// A git command exited unexpectedly. Not a user error.
class GitFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_object_name(std::string_view hex);

/// 40 lowercase hex characters naming a git blob.
class BlobId {
public:
    BlobId() = default;
    /// Throws std::invalid_argument unless `hex` is a SHA-1 object name.
    explicit BlobId(std::string hex);

    const std::string& hex() const { return hex_; }
    bool empty() const { return hex_.empty(); }

    auto operator<=>(const BlobId&) const = default;

private:
    std::string hex_;
};

inline const BlobId kEmptyBlob{"e69de29bb2d1d6434b8b29ae775ad8c2e48c5391"};

/// Stable per-path patch identity as computed by `git patch-id --stable`.
struct PatchId {
    std::string hex;
    auto operator<=>(const PatchId&) const = default;
};

struct RepoHandle {
    std::string repo_id;
    std::filesystem::path local_path;
};

struct CommitMeta {
    std::string commit_id;
    std::string author_name;
    std::string author_email;
    std::string committer_name;
    std::string committer_email;
    Timestamp author_time = 0;
    Timestamp commit_time = 0;
    std::string message;

    bool operator==(const CommitMeta&) const = default;
};

struct BlobPath {
    BlobId blob;
    std::string path;
    auto operator<=>(const BlobPath&) const = default;
};

/// One main-branch commit touching a tracked path.
struct PathChange {
    CommitMeta commit;
    std::optional<BlobId> blob_after; // absent when the commit deletes the path
    std::optional<PatchId> patch;     // absent when the diff has no textual hunks
};

/// Commit times (ascending) and distinct committer emails over all refs.
struct CommitActivity {
    std::vector<Timestamp> commit_times;
    std::uint64_t committer_count = 0;
};

struct BranchHead {
    std::string name;
    std::string commit_id;
};

/// Git executable: $METAMAINT_GIT if set, otherwise "git" on PATH.
std::string git_executable();

/// Verifies the object store is readable and uses SHA-1 names.
void check_repository(const RepoHandle& repo);

/// Every blob reachable from any ref with each path git reports for it.
/// Sorted, deduplicated.
std::vector<BlobPath> enumerate_blobs(const RepoHandle& repo);

std::string read_blob(const RepoHandle& repo, const BlobId& blob);

/// Batched form of read_blob over one `cat-file --batch` process.
std::map<BlobId, std::string> read_blobs(const RepoHandle& repo, std::span<const BlobId> blobs);

std::string resolve_main_branch(const RepoHandle& repo,
                                const std::optional<std::string>& override_branch = std::nullopt);

/// Resolved main branch together with its tip commit id.
BranchHead main_branch_head(const RepoHandle& repo,
                            const std::optional<std::string>& override_branch = std::nullopt);

/// Commits on the first-parent history of `branch` that change `path`,
/// oldest first. Renames are never followed.
std::vector<CommitMeta> path_history(const RepoHandle& repo, const std::string& branch,
                                     const std::string& path);

/// Batched history for several paths: one log walk and one patch-id run.
std::map<std::string, std::vector<PathChange>>
path_changes(const RepoHandle& repo, const std::string& branch, std::span<const std::string> paths);

std::optional<BlobId> head_blob(const RepoHandle& repo, const std::string& branch,
                                const std::string& path);

std::map<std::string, std::optional<BlobId>>
head_blobs(const RepoHandle& repo, const std::string& branch, std::span<const std::string> paths);

std::optional<PatchId> patch_identity(const RepoHandle& repo, const CommitMeta& commit,
                                      const std::string& path);

Timestamp last_commit_time(const RepoHandle& repo);

CommitActivity commit_activity(const RepoHandle& repo);

} // namespace metamaint::gitio
