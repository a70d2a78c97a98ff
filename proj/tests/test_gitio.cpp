#include "doctest.h"

#include "fixture.hpp"

#include "metamaint/gitio.hpp"
#include "metamaint/hashing.hpp"

#include <cstdlib>
#include <set>

using namespace metamaint;
using namespace metamaint::gitio;
using fixture::TempDir;
using fixture::WorkRepo;

namespace {

constexpr Timestamp T0 = 1500000000;

// Every (blob, path) of a regular file in the tree of any commit reachable
// from any ref, read with ls-tree.
std::set<BlobPath> ls_tree_oracle(const WorkRepo& repo)
{
    std::set<BlobPath> out;
    auto commits = repo.run({"rev-list", "--all"});
    std::size_t start = 0;
    while (start < commits.size()) {
        auto nl = commits.find('\n', start);
        auto id = commits.substr(start, nl - start);
        start = nl + 1;
        auto listing = repo.run({"ls-tree", "-r", "-z", "--full-tree", id});
        std::size_t p = 0;
        while (p < listing.size()) {
            auto end = listing.find('\0', p);
            auto entry = listing.substr(p, end - p);
            p = end + 1;
            // "<mode> <type> <id>\t<path>"
            auto tab = entry.find('\t');
            auto mode = entry.substr(0, 6);
            if (mode != "100644" && mode != "100755")
                continue;
            out.insert({BlobId(entry.substr(12, 40)), entry.substr(tab + 1)});
        }
    }
    return out;
}

std::set<BlobPath> as_set(const std::vector<BlobPath>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("enumerate_blobs on a single commit")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    repo.write("a.c", "int a;\n");
    repo.write("b.py", "b = 1\n");
    repo.commit("init", T0);

    auto blobs = enumerate_blobs(repo.handle());
    std::vector<BlobPath> expected = {{BlobId(git_blob_hash("int a;\n")), "a.c"},
                                      {BlobId(git_blob_hash("b = 1\n")), "b.py"}};
    std::sort(expected.begin(), expected.end());
    CHECK(blobs == expected);
}

TEST_CASE("enumerate_blobs covers every path of a shared blob, all refs and deleted files")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    repo.write("src/a.c", "int shared;\n");
    repo.write("src/copy.c", "int shared;\n");
    repo.write("dir with space/\xc3\xa9t\xc3\xa9.c", "int accent;\n");
    repo.write("odd\"name.c", "int quote;\n");
    repo.write("README.md", "readme\n");
    std::filesystem::create_symlink("src/a.c", repo.dir() / "link.c");
    repo.commit("init", T0);
    repo.write("src/a.c", "int shared2;\n");
    repo.write("gone.js", "var g;\n");
    repo.commit("edit", T0 + 10);
    repo.remove("gone.js");
    repo.commit("delete", T0 + 20);
    repo.run({"checkout", "-q", "-b", "topic"});
    repo.write("lib/other.c", "int shared;\n");
    repo.write("topic.rb", "x = 1\n");
    repo.commit("topic", T0 + 30);
    repo.run({"checkout", "-q", "master"});
    repo.run({"tag", "v1", "topic"});

    auto blobs = as_set(enumerate_blobs(repo.handle()));
    CHECK(blobs == ls_tree_oracle(repo));
    const BlobId shared(git_blob_hash("int shared;\n"));
    CHECK(blobs.count({shared, "src/a.c"}));
    CHECK(blobs.count({shared, "src/copy.c"}));
    CHECK(blobs.count({shared, "lib/other.c"}));
    CHECK(blobs.count({BlobId(git_blob_hash("var g;\n")), "gone.js"}));
    CHECK(blobs.count({BlobId(git_blob_hash("int accent;\n")), "dir with space/\xc3\xa9t\xc3\xa9.c"}));
    CHECK(blobs.count({BlobId(git_blob_hash("int quote;\n")), "odd\"name.c"}));
    for (const auto& b : blobs)
        CHECK(b.path != "link.c");
}

TEST_CASE("enumerate_blobs agrees with rev-list on the blob set")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    for (int i = 0; i < 5; ++i) {
        repo.write("f" + std::to_string(i % 3) + ".c", "int v" + std::to_string(i) + ";\n");
        repo.commit("c" + std::to_string(i), T0 + i);
    }
    std::set<std::string> from_git;
    auto listing = repo.run({"rev-list", "--all", "--objects"});
    auto types = repo.run({"cat-file", "--batch-check=%(objecttype) %(objectname)"}, [&] {
        std::string q;
        std::size_t s = 0;
        while (s < listing.size()) {
            auto nl = listing.find('\n', s);
            q += listing.substr(s, 40) + "\n";
            s = nl + 1;
        }
        return q;
    }());
    std::size_t s = 0;
    while (s < types.size()) {
        auto nl = types.find('\n', s);
        auto line = types.substr(s, nl - s);
        s = nl + 1;
        if (line.starts_with("blob "))
            from_git.insert(line.substr(5));
    }
    std::set<std::string> ours;
    for (const auto& b : enumerate_blobs(repo.handle()))
        ours.insert(b.blob.hex());
    CHECK(ours == from_git);
}

TEST_CASE("enumerate_blobs of a repository without commits is empty")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    CHECK(enumerate_blobs(repo.handle()).empty());
}

TEST_CASE("read_blob returns exact bytes")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    const std::string binary("a\0b\r\n\xff no newline", 16);
    repo.write("bin.c", binary);
    repo.write("t.c", "text\n");
    repo.commit("init", T0);
    const BlobId b1(git_blob_hash(binary)), b2(git_blob_hash("text\n"));
    CHECK(read_blob(repo.handle(), b1) == binary);
    std::vector<BlobId> both = {b2, b1};
    auto all = read_blobs(repo.handle(), both);
    CHECK(all.at(b1) == binary);
    CHECK(all.at(b2) == "text\n");
    CHECK_THROWS_AS(read_blob(repo.handle(), BlobId(git_blob_hash("absent"))), ObjectNotFound);
}

TEST_CASE("BlobId accepts only SHA-1 names")
{
    CHECK_NOTHROW(BlobId(std::string(40, 'a')));
    CHECK_THROWS_AS(BlobId(std::string(40, 'A')), std::invalid_argument);
    CHECK_THROWS_AS(BlobId(std::string(39, 'a')), std::invalid_argument);
    CHECK_THROWS_AS(BlobId(std::string(64, 'a')), std::invalid_argument);
    CHECK(kEmptyBlob.hex() == git_blob_hash(""));
}

TEST_CASE("check_repository rejects unreadable and SHA-256 repositories")
{
    TempDir tmp;
    CHECK_THROWS_AS(check_repository({"x", tmp / "missing"}), RepoUnreadable);
    std::filesystem::create_directories(tmp / "plain");
    CHECK_THROWS_AS(check_repository({"x", tmp / "plain"}), RepoUnreadable);
    std::filesystem::create_directories(tmp / "sha256");
    fixture::git(tmp / "sha256", {"init", "-q", "--object-format=sha256"});
    CHECK_THROWS_AS(check_repository({"x", tmp / "sha256"}), RepoUnreadable);
    WorkRepo ok(tmp / "ok");
    CHECK_NOTHROW(check_repository(ok.handle()));
}

TEST_CASE("main branch resolution")
{
    TempDir tmp;

    SUBCASE("symbolic HEAD wins over master")
    {
        WorkRepo repo(tmp / "r", "develop");
        repo.write("a.c", "1\n");
        repo.commit("init", T0);
        repo.run({"branch", "master"});
        auto head = main_branch_head(repo.handle());
        CHECK(head.name == "develop");
        CHECK(head.commit_id == repo.head());
    }
    SUBCASE("detached HEAD falls back to master, then main")
    {
        WorkRepo repo(tmp / "r", "main");
        repo.write("a.c", "1\n");
        auto first = repo.commit("init", T0);
        repo.write("a.c", "2\n");
        repo.commit("second", T0 + 1);
        repo.run({"checkout", "-q", "--detach", first});
        CHECK(resolve_main_branch(repo.handle()) == "main");
        repo.run({"branch", "master", first});
        CHECK(resolve_main_branch(repo.handle()) == "master");
    }
    SUBCASE("no usable branch")
    {
        WorkRepo repo(tmp / "r", "trunk");
        repo.write("a.c", "1\n");
        auto c = repo.commit("init", T0);
        repo.run({"checkout", "-q", "--detach", c});
        repo.run({"branch", "-D", "trunk"});
        CHECK_THROWS_AS(resolve_main_branch(repo.handle()), NoBranch);
    }
    SUBCASE("override is taken verbatim")
    {
        WorkRepo repo(tmp / "r");
        repo.write("a.c", "1\n");
        repo.commit("init", T0);
        CHECK(resolve_main_branch(repo.handle(), std::string("release")) == "release");
        CHECK(main_branch_head(repo.handle(), std::string("release")).commit_id.empty());
    }
}

TEST_CASE("path_history follows the first-parent chain without renames")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    repo.write("f.c", "v1\n");
    repo.write("other.c", "o\n");
    auto c1 = repo.commit("add", T0);
    repo.write("other.c", "o2\n");
    repo.commit("unrelated", T0 + 1);
    repo.write("f.c", "v2\n");
    auto c3 = repo.commit("edit\n\nbody line", T0 + 2);
    repo.run({"checkout", "-q", "-b", "topic"});
    repo.write("f.c", "v3\n");
    auto topic = repo.commit("topic edit", T0 + 3);
    repo.run({"checkout", "-q", "master"});
    repo.write("z.c", "z\n");
    repo.commit("side", T0 + 4);
    repo.run({"-c", "user.name=M", "merge", "-q", "--no-ff", "-m", "merge topic", "topic"});
    auto merge = repo.head();
    repo.move("f.c", "g.c");
    auto moved = repo.commit("rename", T0 + 6);

    auto h = path_history(repo.handle(), "master", "f.c");
    REQUIRE(h.size() == 4);
    CHECK(h[0].commit_id == c1);
    CHECK(h[1].commit_id == c3);
    CHECK(h[1].message == "edit\n\nbody line\n");
    CHECK(h[1].commit_time == T0 + 2);
    CHECK(h[2].commit_id == merge);
    CHECK(h[3].commit_id == moved);
    for (const auto& c : h)
        CHECK(c.commit_id != topic);

    std::vector<std::string> paths = {"f.c", "g.c", "never.c"};
    auto changes = path_changes(repo.handle(), "master", paths);
    REQUIRE(changes.at("f.c").size() == 4);
    CHECK(changes.at("f.c")[0].blob_after == BlobId(git_blob_hash("v1\n")));
    CHECK(changes.at("f.c")[2].blob_after == BlobId(git_blob_hash("v3\n")));
    CHECK_FALSE(changes.at("f.c")[3].blob_after.has_value());
    REQUIRE(changes.at("g.c").size() == 1);
    CHECK(changes.at("g.c")[0].commit.commit_id == moved);
    CHECK(changes.at("g.c")[0].blob_after == BlobId(git_blob_hash("v3\n")));
    CHECK(changes.at("never.c").empty());

    CHECK(head_blob(repo.handle(), "master", "g.c") == BlobId(git_blob_hash("v3\n")));
    CHECK_FALSE(head_blob(repo.handle(), "master", "f.c").has_value());
    auto heads = head_blobs(repo.handle(), "master", paths);
    CHECK(heads.at("g.c") == BlobId(git_blob_hash("v3\n")));
    CHECK_FALSE(heads.at("never.c").has_value());
}

TEST_CASE("patch identity is per path and survives cherry-picks")
{
    TempDir tmp;
    const std::string seed = "line1\nline2\nline3\n";
    WorkRepo a(tmp / "a"), b(tmp / "b");
    for (auto* r : {&a, &b}) {
        r->write("s.c", seed);
        r->write(r == &a ? "a_only.c" : "b_only.c", r == &a ? "a\n" : "b\n");
        r->commit("seed", T0);
    }
    // Same edit to s.c, but each commit also touches another file.
    a.write("s.c", "line1\nfixed\nline2\nline3\n");
    a.write("a_only.c", "a2\n");
    auto ca = a.commit("Fix s", T0 + 10);
    b.write("s.c", "line1\nfixed\nline2\nline3\n");
    auto cb = b.commit("Fix s (cherry picked)", T0 + 99);
    b.write("s.c", "line1\nfixed\nline2\nline3\nmore\n");
    auto cb2 = b.commit("more", T0 + 100);

    std::vector<std::string> paths = {"s.c"};
    auto pa = path_changes(a.handle(), "master", paths).at("s.c");
    auto pb = path_changes(b.handle(), "master", paths).at("s.c");
    REQUIRE(pa.size() == 2);
    REQUIRE(pb.size() == 3);
    REQUIRE(pa[1].patch);
    CHECK(pa[1].patch == pb[1].patch);
    CHECK(pb[2].patch != pb[1].patch);

    // Independent oracle: git show restricted to the path, piped to patch-id.
    auto oracle = [](const WorkRepo& r, const std::string& commit) {
        auto diff = r.run({"show", "--format=", "--full-index", "-p", commit, "--", "s.c"});
        auto out = r.run({"patch-id", "--stable"}, "commit " + commit + "\n" + diff);
        return out.substr(0, 40);
    };
    CHECK(pa[1].patch->hex == oracle(a, ca));
    CHECK(pb[1].patch->hex == oracle(b, cb));
    CHECK(pb[2].patch->hex == oracle(b, cb2));

    CHECK(patch_identity(a.handle(), pa[1].commit, "s.c") == pa[1].patch);
    CHECK(patch_identity(b.handle(), pb[2].commit, "s.c") == pb[2].patch);
}

TEST_CASE("commit activity spans all refs")
{
    TempDir tmp;
    WorkRepo repo(tmp / "r");
    repo.write("a.c", "1\n");
    repo.commit("one", T0 + 50, "x@example.org");
    repo.run({"checkout", "-q", "-b", "side"});
    repo.write("a.c", "2\n");
    repo.commit("two", T0 + 500, "y@example.org");
    repo.run({"checkout", "-q", "master"});
    repo.write("a.c", "3\n");
    repo.commit("three", T0 + 100, "x@example.org");

    auto act = commit_activity(repo.handle());
    CHECK(act.commit_times == std::vector<Timestamp>{T0 + 50, T0 + 100, T0 + 500});
    CHECK(act.committer_count == 2);
    CHECK(last_commit_time(repo.handle()) == T0 + 500);

    WorkRepo empty(tmp / "e");
    CHECK_THROWS_AS(last_commit_time(empty.handle()), EmptyRepo);
}

TEST_CASE("git executable honours METAMAINT_GIT")
{
    ::setenv("METAMAINT_GIT", "/opt/custom/git", 1);
    CHECK(git_executable() == "/opt/custom/git");
    ::unsetenv("METAMAINT_GIT");
    CHECK(git_executable() == "git");
}
