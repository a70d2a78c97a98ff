#include "metamaint/corpus.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace metamaint {

std::string_view to_string(Language lang)
{
    switch (lang) {
    case Language::C: return "C";
    case Language::Cpp: return "C++";
    case Language::Java: return "Java";
    case Language::JavaScript: return "JavaScript";
    case Language::Python: return "Python";
    case Language::PHP: return "PHP";
    case Language::Ruby: return "Ruby";
    case Language::Other: return "other";
    }
    return "other";
}

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

} // namespace

std::optional<Language> parse_language(std::string_view name)
{
    static const std::unordered_map<std::string, Language> names = {
        {"c", Language::C},           {"c++", Language::Cpp},       {"cpp", Language::Cpp},
        {"java", Language::Java},     {"javascript", Language::JavaScript}, {"js", Language::JavaScript},
        {"python", Language::Python}, {"py", Language::Python},     {"php", Language::PHP},
        {"ruby", Language::Ruby},     {"rb", Language::Ruby},       {"other", Language::Other},
    };
    auto it = names.find(lowercase(name));
    if (it == names.end())
        return std::nullopt;
    return it->second;
}

namespace corpus {

ManifestParseError::ManifestParseError(std::size_t line, const std::string& what)
    : Error("manifest line " + std::to_string(line) + ": " + what), line_(line)
{
}

namespace {

std::optional<std::uint64_t> optional_count(const nlohmann::json& obj, const char* key, std::size_t line)
{
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        return std::nullopt;
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<std::int64_t>() >= 0))
        throw ManifestParseError(line, std::string("'") + key + "' must be a non-negative integer");
    return it->get<std::uint64_t>();
}

} // namespace

std::vector<RepoRecord> load_manifest(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw Error("cannot open manifest " + file.string());
    auto base = file.parent_path();

    std::vector<RepoRecord> records;
    std::set<std::string> seen;
    std::string text;
    for (std::size_t line_no = 1; std::getline(in, text); ++line_no) {
        if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
            continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ManifestParseError(line_no, e.what());
        }
        if (!obj.is_object())
            throw ManifestParseError(line_no, "expected a JSON object");

        auto require_string = [&](const char* key) {
            auto it = obj.find(key);
            if (it == obj.end() || !it->is_string() || it->get<std::string>().empty())
                throw ManifestParseError(line_no, std::string("missing string field '") + key + "'");
            return it->get<std::string>();
        };

        RepoRecord r;
        r.repo_id = require_string("repo_id");
        std::filesystem::path p = require_string("path");
        r.local_path = p.is_absolute() ? p : base / p;

        if (auto it = obj.find("language"); it != obj.end() && !it->is_null()) {
            if (!it->is_string())
                throw ManifestParseError(line_no, "'language' must be a string");
            r.declared_language = parse_language(it->get<std::string>()).value_or(Language::Other);
        }
        if (auto it = obj.find("fork"); it != obj.end() && !it->is_null()) {
            if (!it->is_boolean())
                throw ManifestParseError(line_no, "'fork' must be a boolean");
            r.is_fork = it->get<bool>();
        }
        if (auto it = obj.find("default_branch"); it != obj.end() && !it->is_null()) {
            if (!it->is_string())
                throw ManifestParseError(line_no, "'default_branch' must be a string");
            r.default_branch = it->get<std::string>();
        }
        r.total_commits = optional_count(obj, "total_commits", line_no);
        r.max_commits_in_two_year_window = optional_count(obj, "two_year_commits", line_no);
        r.committer_count = optional_count(obj, "committers", line_no);

        if (!seen.insert(r.repo_id).second)
            throw DuplicateRepoId("manifest line " + std::to_string(line_no) + ": duplicate repo_id '" +
                                  r.repo_id + "'");
        records.push_back(std::move(r));
    }
    return records;
}

void populate_counts(RepoRecord& record)
{
    if (record.counts_known())
        return;
    auto activity = gitio::commit_activity(record.handle());
    if (!record.total_commits)
        record.total_commits = activity.commit_times.size();
    if (!record.committer_count)
        record.committer_count = activity.committer_count;
    if (!record.max_commits_in_two_year_window)
        record.max_commits_in_two_year_window = two_year_window_max(activity.commit_times);
}

bool passes_activity_filters(const RepoRecord& r, const FilterCriteria& c)
{
    if (!r.counts_known())
        throw std::invalid_argument("activity counts not populated for " + r.repo_id);
    return *r.total_commits > c.min_total_commits && *r.max_commits_in_two_year_window >= c.min_two_year_commits &&
           !(c.exclude_forks && r.is_fork) && *r.committer_count >= c.min_committers;
}

std::vector<RepoRecord> apply_activity_filters(std::span<const RepoRecord> records, const FilterCriteria& criteria)
{
    std::vector<RepoRecord> kept;
    for (const auto& r : records)
        if (passes_activity_filters(r, criteria))
            kept.push_back(r);
    return kept;
}

std::optional<Language> extension_language(std::string_view path)
{
    auto slash = path.find_last_of('/');
    auto name = slash == std::string_view::npos ? path : path.substr(slash + 1);
    auto dot = name.find_last_of('.');
    if (dot == std::string_view::npos)
        return std::nullopt;
    static const std::unordered_map<std::string, Language> table = {
        {"c", Language::C},       {"h", Language::C},       {"cc", Language::Cpp},  {"cp", Language::Cpp},
        {"cpp", Language::Cpp},   {"cx", Language::Cpp},    {"cxx", Language::Cpp}, {"c++", Language::Cpp},
        {"hh", Language::Cpp},    {"hp", Language::Cpp},    {"hpp", Language::Cpp}, {"hxx", Language::Cpp},
        {"h++", Language::Cpp},   {"java", Language::Java}, {"js", Language::JavaScript},
        {"py", Language::Python}, {"php", Language::PHP},   {"rb", Language::Ruby},
    };
    auto it = table.find(lowercase(name.substr(dot + 1)));
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

std::uint64_t two_year_window_max(std::span<const gitio::Timestamp> times)
{
    std::uint64_t best = 0;
    std::size_t lo = 0;
    for (std::size_t hi = 0; hi < times.size(); ++hi) {
        while (times[hi] - times[lo] >= kTwoYearWindowSeconds)
            ++lo;
        best = std::max<std::uint64_t>(best, hi - lo + 1);
    }
    return best;
}

} // namespace corpus
} // namespace metamaint
