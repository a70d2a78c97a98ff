#include "metamaint/gitio.hpp"

#include "metamaint/subprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace metamaint::gitio {

namespace {

constexpr std::string_view kZeroId = "0000000000000000000000000000000000000000";

// Field separators for --format output. Commit messages containing these
// control characters are not supported.
constexpr char kRecordStart = '\x1e';
constexpr char kFieldSep = '\x1f';
constexpr char kHeaderEnd = '\x1d';
constexpr std::string_view kCommitFormat =
    "--format=%x1e%H%x1f%an%x1f%ae%x1f%cn%x1f%ce%x1f%at%x1f%ct%x1f%B%x1d";

std::vector<std::string> git_argv(const RepoHandle& repo, std::initializer_list<std::string_view> args)
{
    std::vector<std::string> argv{git_executable(),
                                  "-C",
                                  repo.local_path.string(),
                                  "--literal-pathspecs",
                                  "-c",
                                  "core.quotePath=false",
                                  "-c",
                                  "log.showSignature=false",
                                  "-c",
                                  "color.ui=never"};
    for (auto a : args)
        argv.emplace_back(a);
    return argv;
}

ProcessResult git(const std::vector<std::string>& argv, std::string_view input = {})
{
    return run_process(argv, input);
}

[[noreturn]] void fail(const RepoHandle& repo, const std::vector<std::string>& argv, const ProcessResult& r)
{
    std::string cmd;
    for (std::size_t i = 3; i < argv.size(); ++i)
        cmd += (cmd.empty() ? "" : " ") + argv[i];
    throw GitFailure("git " + cmd + " failed in " + repo.repo_id + " (exit " +
                     std::to_string(r.exit_code) + "): " + r.err);
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    while (!text.empty()) {
        auto nl = text.find('\n');
        if (nl == std::string_view::npos) {
            lines.push_back(text);
            break;
        }
        lines.push_back(text.substr(0, nl));
        text.remove_prefix(nl + 1);
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

Timestamp parse_time(std::string_view s)
{
    Timestamp t = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), t);
    if (ec != std::errc{})
        throw GitFailure("unparseable timestamp '" + std::string(s) + "'");
    return t;
}

// git quotes paths containing '"', '\\' or control characters even with
// core.quotePath=false.
std::string unquote_path(std::string_view p)
{
    if (p.size() < 2 || p.front() != '"' || p.back() != '"')
        return std::string(p);
    p = p.substr(1, p.size() - 2);
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        char c = p[i];
        if (c != '\\' || i + 1 == p.size()) {
            out.push_back(c);
            continue;
        }
        char e = p[++i];
        switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'a': out.push_back('\a'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case 'r': out.push_back('\r'); break;
        case 'v': out.push_back('\v'); break;
        default:
            if (e >= '0' && e <= '7') {
                int v = 0;
                std::size_t n = 0;
                while (n < 3 && i < p.size() && p[i] >= '0' && p[i] <= '7') {
                    v = v * 8 + (p[i] - '0');
                    ++i;
                    ++n;
                }
                --i;
                out.push_back(static_cast<char>(v));
            } else {
                out.push_back(e);
            }
        }
    }
    return out;
}

CommitMeta parse_commit_header(std::string_view header)
{
    auto f = split(header, kFieldSep);
    if (f.size() < 8)
        throw GitFailure("malformed commit header");
    CommitMeta c;
    c.commit_id = std::string(f[0]);
    c.author_name = std::string(f[1]);
    c.author_email = std::string(f[2]);
    c.committer_name = std::string(f[3]);
    c.committer_email = std::string(f[4]);
    c.author_time = parse_time(f[5]);
    c.commit_time = parse_time(f[6]);
    // %B may itself contain the separator; rejoin the tail.
    std::string msg(f[7]);
    for (std::size_t i = 8; i < f.size(); ++i) {
        msg.push_back(kFieldSep);
        msg.append(f[i]);
    }
    c.message = std::move(msg);
    return c;
}

struct RawEntry {
    std::string path;
    std::optional<BlobId> blob_after;
    std::optional<BlobId> link_after; // symlink target blob
};

bool is_regular_file_mode(std::string_view mode) { return mode == "100644" || mode == "100755"; }

// ":<old mode> <new mode> <old id> <new id> <status>\t<path>"
std::optional<RawEntry> parse_raw_line(std::string_view line)
{
    auto tab = line.find('\t');
    if (line.empty() || line.front() != ':' || tab == std::string_view::npos)
        return std::nullopt;
    auto fields = split(line.substr(1, tab - 1), ' ');
    if (fields.size() < 5)
        return std::nullopt;
    RawEntry e;
    e.path = unquote_path(line.substr(tab + 1));
    if (fields[3] != kZeroId && is_regular_file_mode(fields[1]))
        e.blob_after = BlobId(std::string(fields[3]));
    else if (fields[3] != kZeroId && fields[1] == "120000")
        e.link_after = BlobId(std::string(fields[3]));
    return e;
}

struct LoggedCommit {
    CommitMeta meta;
    std::vector<RawEntry> entries;
    std::vector<std::string> patches; // parallel to entries when present
};

// Parses `git log --raw [-p]` output produced with kCommitFormat.
std::vector<LoggedCommit> parse_log(std::string_view out)
{
    std::vector<LoggedCommit> commits;
    std::size_t pos = out.find(kRecordStart);
    while (pos != std::string_view::npos) {
        std::size_t next = out.find(kRecordStart, pos + 1);
        std::string_view record = out.substr(pos + 1, next == std::string_view::npos ? std::string_view::npos
                                                                                     : next - pos - 1);
        pos = next;

        auto hdr_end = record.find(kHeaderEnd);
        if (hdr_end == std::string_view::npos)
            throw GitFailure("malformed log record");
        LoggedCommit lc;
        lc.meta = parse_commit_header(record.substr(0, hdr_end));

        std::string* patch = nullptr;
        for (auto line : split_lines(record.substr(hdr_end + 1))) {
            if (line.starts_with("diff --git ")) {
                lc.patches.emplace_back();
                patch = &lc.patches.back();
            }
            if (patch) {
                patch->append(line);
                patch->push_back('\n');
            } else if (auto e = parse_raw_line(line)) {
                lc.entries.push_back(std::move(*e));
            }
        }
        commits.push_back(std::move(lc));
    }
    return commits;
}

std::string fake_commit_key(std::size_t n)
{
    char buf[41];
    std::snprintf(buf, sizeof buf, "%040zx", n);
    return buf;
}

// Runs `git patch-id --stable` over several diffs at once, keyed by index.
std::map<std::size_t, PatchId> compute_patch_ids(const RepoHandle& repo, const std::vector<std::string>& diffs)
{
    std::map<std::size_t, PatchId> ids;
    if (diffs.empty())
        return ids;
    std::string input;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        input += "commit " + fake_commit_key(i) + "\n";
        input += diffs[i];
    }
    auto argv = git_argv(repo, {"patch-id", "--stable"});
    auto r = git(argv, input);
    if (r.exit_code != 0)
        fail(repo, argv, r);
    for (auto line : split_lines(r.out)) {
        auto parts = split(line, ' ');
        if (parts.size() != 2)
            continue;
        std::size_t key = std::stoull(std::string(parts[1]), nullptr, 16);
        ids[key] = PatchId{std::string(parts[0])};
    }
    return ids;
}

std::vector<LoggedCommit> log_paths(const RepoHandle& repo, const std::string& branch,
                                    std::span<const std::string> paths, bool with_patches)
{
    std::vector<std::string> argv = git_argv(
        repo, {"log", "--no-color", "--first-parent", "--diff-merges=first-parent", "--reverse",
               "--no-renames", "--raw", "--no-abbrev", "--full-index", "--no-ext-diff", "--no-textconv",
               kCommitFormat});
    if (with_patches)
        argv.emplace_back("-p");
    argv.push_back("refs/heads/" + branch);
    argv.emplace_back("--");
    for (const auto& p : paths)
        argv.push_back(p);
    auto r = git(argv);
    if (r.exit_code != 0)
        fail(repo, argv, r);
    return parse_log(r.out);
}

std::vector<std::pair<std::string, std::string>> list_branches(const RepoHandle& repo)
{
    auto argv = git_argv(repo, {"for-each-ref", "--format=%(refname)%09%(objectname)", "refs/heads/"});
    auto r = git(argv);
    if (r.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": cannot list branches: " + r.err);
    std::vector<std::pair<std::string, std::string>> branches;
    for (auto line : split_lines(r.out)) {
        auto tab = line.find('\t');
        if (tab == std::string_view::npos)
            continue;
        auto ref = line.substr(0, tab);
        ref.remove_prefix(std::string_view("refs/heads/").size());
        branches.emplace_back(std::string(ref), std::string(line.substr(tab + 1)));
    }
    return branches;
}

} // namespace

bool is_object_name(std::string_view hex)
{
    return hex.size() == 40 &&
           std::all_of(hex.begin(), hex.end(), [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); });
}

BlobId::BlobId(std::string hex) : hex_(std::move(hex))
{
    if (!is_object_name(hex_))
        throw std::invalid_argument("not a SHA-1 object name: '" + hex_ + "'");
}

std::string git_executable()
{
    if (const char* env = std::getenv("METAMAINT_GIT"); env && *env)
        return env;
    return "git";
}

void check_repository(const RepoHandle& repo)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(repo.local_path, ec))
        throw RepoUnreadable(repo.repo_id + ": no such directory " + repo.local_path.string());
    auto argv = git_argv(repo, {"rev-parse", "--git-dir", "--show-object-format"});
    auto r = git(argv);
    if (r.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": not a git repository: " + r.err);
    auto lines = split_lines(r.out);
    if (lines.size() < 2 || lines[1] != "sha1")
        throw RepoUnreadable(repo.repo_id + ": unsupported object format (SHA-1 required)");
}

std::vector<BlobPath> enumerate_blobs(const RepoHandle& repo)
{
    check_repository(repo);

    auto rl_argv = git_argv(repo, {"rev-list", "--all", "--objects"});
    auto rl = git(rl_argv);
    if (rl.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": rev-list failed: " + rl.err);

    std::vector<std::pair<std::string, std::string>> named; // (object, path)
    std::string query;
    for (auto line : split_lines(rl.out)) {
        auto sp = line.find(' ');
        if (sp == std::string_view::npos || sp + 1 == line.size())
            continue; // commits and root trees carry no path
        named.emplace_back(std::string(line.substr(0, sp)), std::string(line.substr(sp + 1)));
        query.append(line.substr(0, sp));
        query.push_back('\n');
    }

    std::set<BlobPath> pairs;
    if (!named.empty()) {
        auto bc_argv = git_argv(repo, {"cat-file", "--batch-check=%(objectname) %(objecttype)"});
        auto bc = git(bc_argv, query);
        if (bc.exit_code != 0)
            throw RepoUnreadable(repo.repo_id + ": cat-file failed: " + bc.err);
        std::set<std::string> blobs;
        for (auto line : split_lines(bc.out)) {
            auto parts = split(line, ' ');
            if (parts.size() == 2 && parts[1] == "blob")
                blobs.emplace(parts[0]);
        }
        for (auto& [obj, path] : named)
            if (blobs.count(obj))
                pairs.insert({BlobId(obj), path});
    }

    // rev-list names each object once. A full raw log adds the other paths
    // an identical blob occupies, and tells symlinks apart from files.
    auto lg_argv = git_argv(repo, {"log", "--all", "--no-color", "--root", "--diff-merges=separate", "--raw",
                                   "--no-abbrev", "--no-renames", "--format="});
    auto lg = git(lg_argv);
    if (lg.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": log failed: " + lg.err);
    std::set<BlobPath> files, links;
    for (auto line : split_lines(lg.out)) {
        auto e = parse_raw_line(line);
        if (e && e->blob_after)
            files.insert({*e->blob_after, e->path});
        else if (e && e->link_after)
            links.insert({*e->link_after, e->path});
    }
    for (const auto& l : links)
        if (!files.count(l))
            pairs.erase(l);
    pairs.insert(files.begin(), files.end());

    return {pairs.begin(), pairs.end()};
}

std::map<BlobId, std::string> read_blobs(const RepoHandle& repo, std::span<const BlobId> blobs)
{
    std::map<BlobId, std::string> contents;
    if (blobs.empty())
        return contents;
    std::string query;
    for (const auto& b : blobs)
        query += b.hex() + "\n";
    auto argv = git_argv(repo, {"cat-file", "--batch"});
    auto r = git(argv, query);
    if (r.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": cat-file --batch failed: " + r.err);

    std::string_view out = r.out;
    for (const auto& b : blobs) {
        auto nl = out.find('\n');
        if (nl == std::string_view::npos)
            throw GitFailure("truncated cat-file output");
        auto header = split(out.substr(0, nl), ' ');
        out.remove_prefix(nl + 1);
        if (header.size() == 2 && header[1] == "missing")
            throw ObjectNotFound(repo.repo_id + ": object " + b.hex() + " not found");
        if (header.size() != 3)
            throw GitFailure("unexpected cat-file header");
        if (header[1] != "blob")
            throw ObjectNotFound(repo.repo_id + ": object " + b.hex() + " is a " + std::string(header[1]));
        std::size_t size = std::stoull(std::string(header[2]));
        if (out.size() < size + 1)
            throw GitFailure("truncated cat-file content");
        contents[b] = std::string(out.substr(0, size));
        out.remove_prefix(size + 1);
    }
    return contents;
}

std::string read_blob(const RepoHandle& repo, const BlobId& blob)
{
    auto all = read_blobs(repo, std::span<const BlobId>(&blob, 1));
    return std::move(all.begin()->second);
}

BranchHead main_branch_head(const RepoHandle& repo, const std::optional<std::string>& override_branch)
{
    auto branches = list_branches(repo);
    auto find = [&](const std::string& name) -> const std::pair<std::string, std::string>* {
        for (const auto& b : branches)
            if (b.first == name)
                return &b;
        return nullptr;
    };

    if (override_branch) {
        const auto* b = find(*override_branch);
        return {*override_branch, b ? b->second : std::string()};
    }

    auto argv = git_argv(repo, {"symbolic-ref", "-q", "HEAD"});
    auto r = git(argv);
    if (r.exit_code == 0) {
        std::string_view ref = r.out;
        while (!ref.empty() && (ref.back() == '\n' || ref.back() == '\r'))
            ref.remove_suffix(1);
        if (ref.starts_with("refs/heads/")) {
            ref.remove_prefix(std::string_view("refs/heads/").size());
            if (const auto* b = find(std::string(ref)))
                return {b->first, b->second};
        }
    }
    for (const char* fallback : {"master", "main"})
        if (const auto* b = find(fallback))
            return {b->first, b->second};
    throw NoBranch(repo.repo_id + ": no main branch (HEAD target, master, main all absent)");
}

std::string resolve_main_branch(const RepoHandle& repo, const std::optional<std::string>& override_branch)
{
    if (override_branch)
        return *override_branch;
    return main_branch_head(repo).name;
}

std::vector<CommitMeta> path_history(const RepoHandle& repo, const std::string& branch, const std::string& path)
{
    std::vector<CommitMeta> history;
    for (auto& c : log_paths(repo, branch, std::span<const std::string>(&path, 1), false))
        history.push_back(std::move(c.meta));
    return history;
}

std::map<std::string, std::vector<PathChange>>
path_changes(const RepoHandle& repo, const std::string& branch, std::span<const std::string> paths)
{
    std::map<std::string, std::vector<PathChange>> result;
    for (const auto& p : paths)
        result[p];
    if (paths.empty())
        return result;

    auto commits = log_paths(repo, branch, paths, true);

    struct Slot {
        std::string path;
        std::size_t index;
    };
    std::vector<std::string> diffs;
    std::vector<Slot> slots;
    for (auto& lc : commits) {
        for (std::size_t i = 0; i < lc.entries.size(); ++i) {
            auto& e = lc.entries[i];
            auto it = result.find(e.path);
            if (it == result.end())
                continue;
            it->second.push_back({lc.meta, e.blob_after, std::nullopt});
            if (i < lc.patches.size()) {
                slots.push_back({e.path, it->second.size() - 1});
                diffs.push_back(std::move(lc.patches[i]));
            }
        }
    }

    auto ids = compute_patch_ids(repo, diffs);
    for (auto& [key, id] : ids)
        if (key < slots.size())
            result[slots[key].path][slots[key].index].patch = id;
    return result;
}

std::map<std::string, std::optional<BlobId>>
head_blobs(const RepoHandle& repo, const std::string& branch, std::span<const std::string> paths)
{
    std::map<std::string, std::optional<BlobId>> result;
    if (paths.empty())
        return result;
    std::string query;
    for (const auto& p : paths)
        query += "refs/heads/" + branch + ":" + p + "\n";
    auto argv = git_argv(repo, {"cat-file", "--batch-check=%(objectname) %(objecttype)"});
    auto r = git(argv, query);
    if (r.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": cat-file failed: " + r.err);
    auto lines = split_lines(r.out);
    if (lines.size() != paths.size())
        throw GitFailure("cat-file --batch-check answered " + std::to_string(lines.size()) + " of " +
                         std::to_string(paths.size()) + " queries");
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto parts = split(lines[i], ' ');
        if (parts.size() == 2 && parts[1] == "blob" && is_object_name(parts[0]))
            result[paths[i]] = BlobId(std::string(parts[0]));
        else
            result[paths[i]] = std::nullopt;
    }
    return result;
}

std::optional<BlobId> head_blob(const RepoHandle& repo, const std::string& branch, const std::string& path)
{
    return head_blobs(repo, branch, std::span<const std::string>(&path, 1)).at(path);
}

std::optional<PatchId> patch_identity(const RepoHandle& repo, const CommitMeta& commit, const std::string& path)
{
    auto argv = git_argv(repo, {"show", "--no-color", "--diff-merges=first-parent", "--no-renames", "--full-index",
                                "--no-ext-diff", "--no-textconv", "--format=", "-p", commit.commit_id, "--", path});
    auto r = git(argv);
    if (r.exit_code != 0)
        fail(repo, argv, r);
    auto start = r.out.find("diff --git ");
    if (start == std::string::npos)
        return std::nullopt;
    auto ids = compute_patch_ids(repo, {r.out.substr(start)});
    if (ids.empty())
        return std::nullopt;
    return ids.begin()->second;
}

CommitActivity commit_activity(const RepoHandle& repo)
{
    auto argv = git_argv(repo, {"log", "--all", "--format=%ct%x1f%ce"});
    auto r = git(argv);
    if (r.exit_code != 0)
        throw RepoUnreadable(repo.repo_id + ": log failed: " + r.err);
    CommitActivity activity;
    std::set<std::string> committers;
    for (auto line : split_lines(r.out)) {
        auto parts = split(line, kFieldSep);
        if (parts.size() != 2)
            continue;
        activity.commit_times.push_back(parse_time(parts[0]));
        committers.emplace(parts[1]);
    }
    std::sort(activity.commit_times.begin(), activity.commit_times.end());
    activity.committer_count = committers.size();
    return activity;
}

Timestamp last_commit_time(const RepoHandle& repo)
{
    auto activity = commit_activity(repo);
    if (activity.commit_times.empty())
        throw EmptyRepo(repo.repo_id + ": repository has no commits");
    return activity.commit_times.back();
}

} // namespace metamaint::gitio
