#include "fixture.hpp"

#include "metamaint/subprocess.hpp"

#include "json.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace fixture {

TempDir::TempDir()
{
    const char* base = std::getenv("TMPDIR");
    std::string tmpl = std::string(base && *base ? base : "/tmp") + "/metamaint-test-XXXXXX";
    if (!::mkdtemp(tmpl.data()))
        throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::string git(const fs::path& dir, const std::vector<std::string>& args, std::string_view input)
{
    std::vector<std::string> argv = {"git", "-C", dir.string(), "-c", "user.name=Fixture", "-c",
                                     "user.email=fixture@example.org", "-c", "commit.gpgsign=false"};
    argv.insert(argv.end(), args.begin(), args.end());
    auto r = metamaint::run_process(argv, input);
    if (r.exit_code != 0) {
        std::string cmd;
        for (const auto& a : args)
            cmd += " " + a;
        throw std::runtime_error("git" + cmd + " failed: " + r.err);
    }
    return r.out;
}

WorkRepo::WorkRepo(fs::path dir, const std::string& branch) : dir_(std::move(dir))
{
    fs::create_directories(dir_);
    git(dir_, {"init", "-q", "--initial-branch=" + branch});
}

void WorkRepo::write(const std::string& path, std::string_view content)
{
    auto p = dir_ / path;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

void WorkRepo::remove(const std::string& path) { fs::remove(dir_ / path); }

void WorkRepo::move(const std::string& from, const std::string& to)
{
    fs::create_directories((dir_ / to).parent_path());
    fs::rename(dir_ / from, dir_ / to);
}

std::string WorkRepo::commit(const std::string& message, metamaint::gitio::Timestamp time, const std::string& email)
{
    git(dir_, {"add", "-A"});
    const auto date = "@" + std::to_string(time) + " +0000";
    std::vector<std::string> argv = {"env",
                                     "GIT_AUTHOR_DATE=" + date,
                                     "GIT_COMMITTER_DATE=" + date,
                                     "GIT_AUTHOR_NAME=Dev",
                                     "GIT_AUTHOR_EMAIL=" + email,
                                     "GIT_COMMITTER_NAME=Dev",
                                     "GIT_COMMITTER_EMAIL=" + email,
                                     "git",
                                     "-C",
                                     dir_.string(),
                                     "-c",
                                     "commit.gpgsign=false",
                                     "commit",
                                     "-q",
                                     "--allow-empty",
                                     "-F",
                                     "-"};
    auto r = metamaint::run_process(argv, message);
    if (r.exit_code != 0)
        throw std::runtime_error("git commit failed: " + r.err);
    return head();
}

std::string WorkRepo::run(const std::vector<std::string>& args, std::string_view input) const
{
    return git(dir_, args, input);
}

std::string WorkRepo::head() const
{
    auto out = git(dir_, {"rev-parse", "HEAD"});
    return out.substr(0, 40);
}

std::string manifest_line(const std::string& repo_id, const fs::path& path)
{
    return nlohmann::json{{"repo_id", repo_id}, {"path", path.string()}}.dump() + "\n";
}

} // namespace fixture
