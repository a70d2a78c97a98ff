#include "metamaint/opportunity.hpp"

#include <algorithm>
#include <cctype>

namespace metamaint::opportunity {

namespace {

std::string lowercase(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool whole_word_at(std::string_view text, std::size_t pos, std::size_t len)
{
    return (pos == 0 || !is_word_char(text[pos - 1])) &&
           (pos + len == text.size() || !is_word_char(text[pos + len]));
}

std::vector<std::string> maintained_repos(const family::SeedFamily& family)
{
    std::set<std::string> repos;
    for (const auto& v : family.variants)
        if (v.status == family::VariantStatus::maintained)
            repos.insert(v.repo_id);
    return {repos.begin(), repos.end()};
}

} // namespace

std::map<PatchId, std::set<std::string>> collect_family_patches(const family::SeedFamily& family)
{
    std::map<PatchId, std::set<std::string>> patches;
    for (const auto& v : family.variants)
        for (const auto& c : v.post_seed_commits)
            if (c.patch)
                patches[*c.patch].insert(v.repo_id);
    return patches;
}

std::vector<UniqueCommit> find_unique_commits(const family::SeedFamily& family)
{
    auto patches = collect_family_patches(family);
    auto maintained = maintained_repos(family);

    std::vector<UniqueCommit> unique;
    for (const auto& v : family.variants) {
        for (const auto& c : v.post_seed_commits) {
            if (!c.patch || patches.at(*c.patch).size() != 1)
                continue;
            UniqueCommit u;
            u.family_ref = family.id();
            u.repo_id = v.repo_id;
            u.path = v.path;
            u.commit = c.commit;
            u.patch = *c.patch;
            for (const auto& r : maintained)
                if (r != v.repo_id)
                    u.targets.push_back(r);
            unique.push_back(std::move(u));
        }
    }
    std::sort(unique.begin(), unique.end(), [](const UniqueCommit& a, const UniqueCommit& b) {
        return std::tie(a.repo_id, a.path, a.commit.commit_time, a.commit.commit_id) <
               std::tie(b.repo_id, b.path, b.commit.commit_time, b.commit.commit_id);
    });
    return unique;
}

std::vector<UniqueCommit> filter_fix_commits(std::span<const UniqueCommit> commits, std::span<const std::string> keywords)
{
    std::vector<std::string> needles;
    for (const auto& k : keywords)
        if (!k.empty())
            needles.push_back(lowercase(k));
    std::sort(needles.begin(), needles.end());
    needles.erase(std::unique(needles.begin(), needles.end()), needles.end());

    std::vector<UniqueCommit> kept;
    for (const auto& c : commits) {
        auto message = lowercase(c.commit.message);
        UniqueCommit out = c;
        out.matched_keywords.clear();
        bool any_whole_word = false;
        for (const auto& k : needles) {
            bool matched = false;
            for (auto pos = message.find(k); pos != std::string::npos; pos = message.find(k, pos + 1)) {
                matched = true;
                if (whole_word_at(message, pos, k.size())) {
                    any_whole_word = true;
                    break;
                }
            }
            if (matched)
                out.matched_keywords.push_back(k);
        }
        if (out.matched_keywords.empty())
            continue;
        out.substring_match = !any_whole_word;
        kept.push_back(std::move(out));
    }
    return kept;
}

std::optional<OpportunityReport> propose_opportunities(const family::SeedFamily& family,
                                                       std::span<const std::string> keywords, std::size_t max_unique)
{
    auto unique = find_unique_commits(family);
    auto fixes = filter_fix_commits(unique, keywords);
    if (fixes.empty() || fixes.size() > max_unique)
        return std::nullopt;

    OpportunityReport report;
    report.family_ref = family.id();
    std::set<std::string> sources;
    for (const auto& c : fixes)
        sources.insert(c.repo_id);
    for (const auto& r : maintained_repos(family))
        if (!sources.count(r))
            report.candidate_targets.push_back(r);
    report.unique_commits = std::move(fixes);
    return report;
}

} // namespace metamaint::opportunity
