#include "metamaint/io.hpp"

#include "metamaint/error.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace metamaint::io {

void atomic_write(const std::filesystem::path& path, std::string_view content)
{
    auto dir = path.parent_path();
    if (!dir.empty())
        std::filesystem::create_directories(dir);
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw Error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void for_each_record(const std::filesystem::path& path, std::string_view schema,
                     const std::function<void(const Json&)>& fn)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string() + " (run the earlier stage first)");
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
        if (!j.is_object() || j.value("schema", std::string()) != schema)
            throw Error(path.string() + ":" + std::to_string(n) + ": expected schema \"" + std::string(schema) +
                        "\"");
        try {
            fn(j);
        } catch (const Json::exception& e) {
            throw Error(path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

std::string dump_line(const Json& j) { return j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n"; }

std::string format_fixed(double value, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
}

gitio::Timestamp parse_date(std::string_view date)
{
    using namespace std::chrono;
    int y = 0;
    unsigned m = 0, d = 0;
    char tail = 0;
    std::string s(date);
    if (std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 || s.size() != 10)
        throw Error("invalid date '" + s + "' (expected YYYY-MM-DD)");
    year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok())
        throw Error("invalid date '" + s + "'");
    return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
}

std::string format_date(gitio::Timestamp t)
{
    using namespace std::chrono;
    year_month_day ymd{floor<days>(sys_seconds{seconds{t}})};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

Json to_json(const gitio::CommitMeta& c)
{
    return Json{{"commit_id", c.commit_id},         {"author_name", c.author_name},
                {"author_email", c.author_email},   {"committer_name", c.committer_name},
                {"committer_email", c.committer_email}, {"author_time", c.author_time},
                {"commit_time", c.commit_time},     {"message", c.message}};
}

gitio::CommitMeta commit_from_json(const Json& j)
{
    gitio::CommitMeta c;
    c.commit_id = j.at("commit_id").get<std::string>();
    c.author_name = j.at("author_name").get<std::string>();
    c.author_email = j.at("author_email").get<std::string>();
    c.committer_name = j.at("committer_name").get<std::string>();
    c.committer_email = j.at("committer_email").get<std::string>();
    c.author_time = j.at("author_time").get<gitio::Timestamp>();
    c.commit_time = j.at("commit_time").get<gitio::Timestamp>();
    c.message = j.at("message").get<std::string>();
    return c;
}

namespace {

Json occurrences_json(const family::SeedFamily& f)
{
    Json occ = Json::array();
    for (const auto& o : f.seed.occurrences)
        occ.push_back({{"repo_id", o.repo_id}, {"path", o.path}});
    return occ;
}

template <typename T, typename Parse>
T parse_enum(const Json& j, const char* key, Parse parse)
{
    auto s = j.at(key).get<std::string>();
    auto v = parse(s);
    if (!v)
        throw Error(std::string("unknown ") + key + " '" + s + "'");
    return *v;
}

family::SeedFamily family_core_from_json(const Json& j)
{
    family::SeedFamily f;
    f.seed.blob = gitio::BlobId(j.at("blob").get<std::string>());
    f.seed.language = parse_language(j.at("language").get<std::string>()).value_or(Language::Other);
    for (const auto& o : j.at("occurrences"))
        f.seed.occurrences.push_back({o.at("repo_id").get<std::string>(), o.at("path").get<std::string>()});
    f.size = j.at("size").get<std::size_t>();
    f.stratum = parse_enum<family::Stratum>(j, "stratum", family::parse_stratum);
    return f;
}

} // namespace

Json family_to_json(const family::SeedFamily& f)
{
    return Json{{"schema", kFamilySchema},
                {"family_id", f.id()},
                {"blob", f.seed.blob.hex()},
                {"language", to_string(f.seed.language)},
                {"size", f.size},
                {"stratum", family::to_string(f.stratum)},
                {"occurrences", occurrences_json(f)}};
}

family::SeedFamily family_from_json(const Json& j)
{
    auto f = family_core_from_json(j);
    for (const auto& o : f.seed.occurrences) {
        family::Variant v;
        v.repo_id = o.repo_id;
        v.path = o.path;
        f.variants.push_back(std::move(v));
    }
    return f;
}

std::string_view to_string(DropReason r)
{
    switch (r) {
    case DropReason::none: return "";
    case DropReason::identical_repo: return "identical_repo";
    case DropReason::duplicate_variant: return "duplicate_variant";
    }
    return "";
}

family::SeedFamily StatusRecord::without_identical_repos() const
{
    family::SeedFamily out = family;
    out.variants.clear();
    for (std::size_t i = 0; i < family.variants.size(); ++i)
        if (dropped[i] != DropReason::identical_repo)
            out.variants.push_back(family.variants[i]);
    return out;
}

family::SeedFamily StatusRecord::deduplicated() const
{
    family::SeedFamily out = family;
    out.variants.clear();
    for (std::size_t i = 0; i < family.variants.size(); ++i)
        if (dropped[i] == DropReason::none)
            out.variants.push_back(family.variants[i]);
    return out;
}

Json status_to_json(const StatusRecord& r)
{
    const auto& f = r.family;
    Json variants = Json::array();
    for (std::size_t i = 0; i < f.variants.size(); ++i) {
        const auto& v = f.variants[i];
        Json commits = Json::array();
        for (const auto& c : v.post_seed_commits) {
            Json cj = to_json(c.commit);
            cj["patch_id"] = c.patch ? Json(c.patch->hex) : Json(nullptr);
            commits.push_back(std::move(cj));
        }
        variants.push_back(Json{
            {"repo_id", v.repo_id},
            {"path", v.path},
            {"status", family::to_string(v.status)},
            {"head_blob", v.head_blob ? Json(v.head_blob->hex()) : Json(nullptr)},
            {"churned", v.churned()},
            {"dropped", r.dropped[i] == DropReason::none ? Json(nullptr) : Json(to_string(r.dropped[i]))},
            {"seed_intro", v.seed_intro_commit ? to_json(*v.seed_intro_commit) : Json(nullptr)},
            {"post_seed_commits", std::move(commits)},
        });
    }
    return Json{{"schema", kStatusSchema},
                {"family_id", f.id()},
                {"blob", f.seed.blob.hex()},
                {"language", to_string(f.seed.language)},
                {"size", f.size},
                {"stratum", family::to_string(f.stratum)},
                {"family_type", f.family_type ? Json(family::to_string(*f.family_type)) : Json(nullptr)},
                {"seed_empty", r.seed_empty},
                {"occurrences", occurrences_json(f)},
                {"variants", std::move(variants)}};
}

StatusRecord status_from_json(const Json& j)
{
    StatusRecord r;
    r.family = family_core_from_json(j);
    if (!j.at("family_type").is_null())
        r.family.family_type = parse_enum<family::FamilyType>(j, "family_type", family::parse_family_type);
    r.seed_empty = j.at("seed_empty").get<bool>();
    for (const auto& vj : j.at("variants")) {
        family::Variant v;
        v.repo_id = vj.at("repo_id").get<std::string>();
        v.path = vj.at("path").get<std::string>();
        v.status = parse_enum<family::VariantStatus>(vj, "status", family::parse_status);
        if (!vj.at("head_blob").is_null())
            v.head_blob = gitio::BlobId(vj.at("head_blob").get<std::string>());
        if (!vj.at("seed_intro").is_null())
            v.seed_intro_commit = commit_from_json(vj.at("seed_intro"));
        for (const auto& cj : vj.at("post_seed_commits")) {
            family::VariantCommit c{commit_from_json(cj), std::nullopt};
            if (!cj.at("patch_id").is_null())
                c.patch = gitio::PatchId{cj.at("patch_id").get<std::string>()};
            v.post_seed_commits.push_back(std::move(c));
        }
        auto drop = vj.at("dropped");
        DropReason reason = DropReason::none;
        if (!drop.is_null()) {
            auto s = drop.get<std::string>();
            if (s == to_string(DropReason::identical_repo))
                reason = DropReason::identical_repo;
            else if (s == to_string(DropReason::duplicate_variant))
                reason = DropReason::duplicate_variant;
            else
                throw Error("unknown drop reason '" + s + "'");
        }
        r.family.variants.push_back(std::move(v));
        r.dropped.push_back(reason);
    }
    return r;
}

Json opportunity_to_json(const opportunity::OpportunityReport& r, family::Stratum stratum)
{
    Json commits = Json::array();
    for (const auto& u : r.unique_commits) {
        commits.push_back(Json{{"repo_id", u.repo_id},
                               {"path", u.path},
                               {"commit", to_json(u.commit)},
                               {"patch_id", u.patch.hex},
                               {"matched_keywords", u.matched_keywords},
                               {"substring_match", u.substring_match},
                               {"targets", u.targets}});
    }
    return Json{{"schema", kOpportunitySchema},
                {"family_id", r.family_ref},
                {"stratum", family::to_string(stratum)},
                {"commit_identity", "git patch-id --stable of the per-path diff"},
                {"history_scope", "main branch, first-parent"},
                {"unique_commits", std::move(commits)},
                {"candidate_targets", r.candidate_targets}};
}

} // namespace metamaint::io
