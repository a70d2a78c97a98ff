#pragma once

#include "metamaint/gitio.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fixture {

namespace fs = std::filesystem;

/// Fresh directory under $TMPDIR, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

/// Runs git with `args` in `dir`; throws on a non-zero exit. Returns stdout.
std::string git(const fs::path& dir, const std::vector<std::string>& args, std::string_view input = {});

/// A non-bare repository driven through the git CLI with fixed identities
/// and dates, so commit ids are reproducible.
class WorkRepo {
public:
    explicit WorkRepo(fs::path dir, const std::string& branch = "master");

    void write(const std::string& path, std::string_view content);
    void remove(const std::string& path);
    void move(const std::string& from, const std::string& to);

    /// Stages everything and commits. Returns the commit id.
    std::string commit(const std::string& message, metamaint::gitio::Timestamp time,
                       const std::string& email = "dev@example.org");

    std::string run(const std::vector<std::string>& args, std::string_view input = {}) const;
    std::string head() const;
    metamaint::gitio::RepoHandle handle(const std::string& id = "repo") const { return {id, dir_}; }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
};

/// One JSON object per repository for a manifest file.
std::string manifest_line(const std::string& repo_id, const fs::path& path);

} // namespace fixture
