#include "doctest.h"

#include "fixture.hpp"

#include "metamaint/hashing.hpp"
#include "metamaint/subprocess.hpp"

#include <system_error>

using namespace metamaint;

TEST_CASE("sha1 known answers")
{
    CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
    CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
    CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("git_blob_hash matches git hash-object")
{
    fixture::TempDir tmp;
    const std::string samples[] = {"int main() {}\n", std::string("nul\0inside", 10), "no newline",
                                   std::string(100000, 'x')};
    for (const auto& s : samples) {
        auto out = fixture::git(tmp.path(), {"hash-object", "--stdin"}, s);
        CHECK(git_blob_hash(s) == out.substr(0, 40));
    }
}

TEST_CASE("run_process streams large input and output without blocking")
{
    std::string big;
    for (int i = 0; i < 200000; ++i)
        big += "line " + std::to_string(i) + "\n";
    auto r = run_process({"cat"}, big);
    CHECK(r.exit_code == 0);
    CHECK(r.out == big);

    // Large stderr alongside large stdout.
    auto both = run_process({"sh", "-c", "cat; cat >&2 </dev/null; head -c 300000 /dev/zero >&2"}, big);
    CHECK(both.out == big);
    CHECK(both.err.size() == 300000);
}

TEST_CASE("run_process reports exit codes, cwd and start failures")
{
    auto r = run_process({"sh", "-c", "echo oops >&2; exit 3"});
    CHECK(r.exit_code == 3);
    CHECK(r.err == "oops\n");

    fixture::TempDir tmp;
    auto pwd = run_process({"pwd", "-P"}, {}, tmp.path());
    CHECK(pwd.out == std::filesystem::canonical(tmp.path()).string() + "\n");

    CHECK_THROWS_AS(run_process({"/nonexistent/metamaint-binary"}), std::system_error);
}
