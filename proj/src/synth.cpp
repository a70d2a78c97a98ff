#include "metamaint/synth.hpp"

#include "metamaint/hashing.hpp"
#include "metamaint/io.hpp"
#include "metamaint/rng.hpp"
#include "metamaint/subprocess.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace metamaint::synth {

using gitio::Timestamp;
using io::Json;

std::string_view to_string(VariantPlan p)
{
    switch (p) {
    case VariantPlan::unchanged: return "unchanged";
    case VariantPlan::edit: return "edit";
    case VariantPlan::revert: return "revert";
    case VariantPlan::cherry_pick: return "cherry_pick";
    case VariantPlan::duplicate: return "duplicate";
    case VariantPlan::remove: return "remove";
    case VariantPlan::rename: return "rename";
    case VariantPlan::topic_only: return "topic_only";
    case VariantPlan::merged_topic: return "merged_topic";
    }
    return "unchanged";
}

void SynthSpec::validate() const
{
    if (repos.size() < 2)
        throw InvalidSpec("a synthetic corpus needs at least 2 repositories");
    if (dormancy_days < 0)
        throw InvalidSpec("dormancy_days must not be negative");
    for (std::size_t i = 0; i < repos.size(); ++i) {
        const auto& r = repos[i];
        if (r.main_branch.empty() || r.main_branch.find_first_of(" ~^:?*[\\") != std::string::npos)
            throw InvalidSpec("repo " + std::to_string(i) + ": invalid branch name '" + r.main_branch + "'");
        if (r.stale_master && r.main_branch == "master")
            throw InvalidSpec("repo " + std::to_string(i) + ": stale_master needs a main branch other than master");
        if (r.copy_of) {
            if (*r.copy_of >= repos.size() || *r.copy_of == i || repos[*r.copy_of].copy_of)
                throw InvalidSpec("repo " + std::to_string(i) + ": copy_of must name another, non-copy repo");
        }
    }
    for (std::size_t f = 0; f < families.size(); ++f) {
        const auto& fam = families[f];
        const std::string where = "family " + std::to_string(f) + ": ";
        if (fam.variants.size() < 2)
            throw InvalidSpec(where + "family_size must be at least 2");
        if (fam.language == Language::Other)
            throw InvalidSpec(where + "language must be one of the seven source languages");
        std::set<std::size_t> seen;
        for (const auto& v : fam.variants) {
            if (v.repo >= repos.size() || repos[v.repo].copy_of)
                throw InvalidSpec(where + "variants must live in existing, non-copy repos");
            if (!seen.insert(v.repo).second)
                throw InvalidSpec(where + "variant repos must be distinct");
            if (v.fix_edits > v.edits)
                throw InvalidSpec(where + "fix_edits exceeds edits");
            switch (v.plan) {
            case VariantPlan::edit:
            case VariantPlan::revert:
                if (v.edits == 0)
                    throw InvalidSpec(where + std::string(to_string(v.plan)) + " needs at least one edit");
                break;
            case VariantPlan::unchanged:
            case VariantPlan::duplicate:
            case VariantPlan::topic_only:
            case VariantPlan::merged_topic:
                if (v.edits != 0)
                    throw InvalidSpec(where + std::string(to_string(v.plan)) + " takes no extra edits");
                break;
            default: break;
            }
        }
    }
}

SynthSpec random_spec(std::uint64_t seed, std::size_t max_repos, std::size_t max_families)
{
    Rng rng(seed);
    SynthSpec s;
    s.rng_seed = seed;
    const std::vector<std::string> branches = {"master", "master", "main", "develop"};

    const auto n = static_cast<std::size_t>(rng.between(2, static_cast<std::int64_t>(std::max<std::size_t>(2, max_repos))));
    for (std::size_t i = 0; i < n; ++i) {
        SynthRepo r;
        r.main_branch = rng.pick(branches);
        r.dormant = rng.chance(0.15);
        r.stale_master = r.main_branch != "master" && rng.chance(0.5);
        r.declare_branch = rng.chance(0.2);
        if (i >= 2 && rng.chance(0.12)) {
            std::size_t j;
            do
                j = rng.below(i);
            while (s.repos[j].copy_of);
            r.copy_of = j;
        }
        s.repos.push_back(r);
    }
    std::vector<std::size_t> hosts;
    for (std::size_t i = 0; i < n; ++i)
        if (!s.repos[i].copy_of)
            hosts.push_back(i);

    const std::vector<VariantPlan> weighted = {
        VariantPlan::unchanged, VariantPlan::unchanged, VariantPlan::unchanged, VariantPlan::edit,
        VariantPlan::edit,      VariantPlan::edit,      VariantPlan::edit,      VariantPlan::revert,
        VariantPlan::cherry_pick, VariantPlan::duplicate, VariantPlan::remove,  VariantPlan::rename,
        VariantPlan::topic_only, VariantPlan::merged_topic};

    const auto nf = rng.between(1, static_cast<std::int64_t>(std::max<std::size_t>(1, max_families)));
    for (std::int64_t f = 0; f < nf; ++f) {
        PlantedFamily fam;
        fam.language = kSourceLanguages[rng.below(std::size(kSourceLanguages))];
        fam.empty_seed = rng.chance(0.1);
        const auto size = static_cast<std::size_t>(
            rng.between(2, static_cast<std::int64_t>(std::min<std::size_t>(hosts.size(), 6))));
        auto chosen = hosts;
        rng.shuffle(chosen);
        for (std::size_t k = 0; k < size; ++k) {
            PlantedVariant v;
            v.repo = chosen[k];
            v.plan = rng.pick(weighted);
            fam.variants.push_back(v);
        }
        if (rng.chance(0.3)) {
            fam.variants[0].plan = VariantPlan::cherry_pick;
            fam.variants[1].plan = VariantPlan::cherry_pick;
        } else if (rng.chance(0.25)) {
            fam.variants[0].plan = VariantPlan::duplicate;
            fam.variants[1].plan = VariantPlan::duplicate;
        }
        for (auto& v : fam.variants) {
            switch (v.plan) {
            case VariantPlan::edit: v.edits = static_cast<std::size_t>(rng.between(1, 3)); break;
            case VariantPlan::revert: v.edits = static_cast<std::size_t>(rng.between(1, 2)); break;
            case VariantPlan::cherry_pick:
            case VariantPlan::remove:
            case VariantPlan::rename: v.edits = static_cast<std::size_t>(rng.between(0, 1)); break;
            default: v.edits = 0;
            }
            v.fix_edits = v.edits ? static_cast<std::size_t>(rng.between(0, static_cast<std::int64_t>(v.edits))) : 0;
            v.extra_copy = rng.chance(0.1);
        }
        s.families.push_back(std::move(fam));
    }
    return s;
}

namespace {

constexpr Timestamp kDay = 86400;
constexpr Timestamp kActiveStart = 1420070400;  // 2015-01-01
constexpr Timestamp kDormantStart = 1388534400; // 2014-01-01
constexpr Timestamp kLateActivity = 1527811200; // 2018-06-01

using Tree = std::map<std::string, std::string>;

struct Commit {
    std::string ref;
    std::optional<std::size_t> from;
    std::optional<std::size_t> merge;
    Timestamp author_time = 0;
    Timestamp time = 0;
    std::size_t who = 0;
    std::string message;
    Tree tree;
};

struct RepoModel {
    std::string id;
    SynthRepo cfg;
    std::vector<Commit> commits;
    std::vector<std::size_t> main_chain;
    std::vector<std::pair<std::string, std::size_t>> extra_refs; // ref -> commit
    Timestamp clock = 0;
};

enum class StepKind { intro, set, remove, move, topic, topic_merge };

struct Step {
    StepKind kind;
    std::string path;
    std::string path2; // extra copy (intro) or destination (move)
    std::string content;
    std::string message;
    std::string message2; // merge commit message
};

const char* const kWords[] = {"parser", "buffer", "matrix", "config", "logger", "socket",
                              "cache",  "stream", "render", "tokens", "crypto", "layout"};
const char* const kDevs[] = {"Ada Byron", "Brook Chen", "Casey Diaz"};
const char* const kDevMails[] = {"ada@example.org", "brook@example.org", "casey@example.org"};

std::string extension_for(Language lang, Rng& rng)
{
    switch (lang) {
    case Language::C: return rng.chance(0.8) ? ".c" : ".h";
    case Language::Cpp: {
        static const std::vector<std::string> exts = {".cpp", ".cc", ".hpp", ".cxx"};
        return rng.pick(exts);
    }
    case Language::Java: return ".java";
    case Language::JavaScript: return ".js";
    case Language::Python: return ".py";
    case Language::PHP: return ".php";
    case Language::Ruby: return ".rb";
    case Language::Other: break;
    }
    return ".c";
}

std::string code_line(Language lang, const std::string& ident, std::uint64_t k, std::uint64_t m)
{
    const auto ks = std::to_string(k), ms = std::to_string(m);
    switch (lang) {
    case Language::C: return "int " + ident + "(int a) { return a * " + ks + " + " + ms + "; }";
    case Language::Cpp: return "inline int " + ident + "(int a) { return a * " + ks + " + " + ms + "; }";
    case Language::Java: return "    static int " + ident + "(int a) { return a * " + ks + " + " + ms + "; }";
    case Language::JavaScript: return "function " + ident + "(a) { return a * " + ks + " + " + ms + "; }";
    case Language::Python: return "def " + ident + "(a): return a * " + ks + " + " + ms;
    case Language::PHP: return "function " + ident + "($a) { return $a * " + ks + " + " + ms + "; }";
    case Language::Ruby: return "def " + ident + "(a) = a * " + ks + " + " + ms;
    case Language::Other: break;
    }
    return ident;
}

bool hash_comments(Language lang) { return lang == Language::Python || lang == Language::Ruby; }

std::string comment_line(Language lang, const std::string& text)
{
    return (hash_comments(lang) ? "# " : "// ") + text;
}

std::vector<std::string> split_lines(const std::string& s)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < s.size()) {
        auto nl = s.find('\n', start);
        lines.push_back(s.substr(start, nl - start));
        if (nl == std::string::npos)
            break;
        start = nl + 1;
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines)
{
    std::string out;
    for (const auto& l : lines)
        out += l + "\n";
    return out;
}

bool is_source_path(const std::string& path) { return !path.ends_with(".md"); }

std::string lower(std::string s)
{
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

class Builder {
public:
    explicit Builder(const SynthSpec& spec) : spec_(spec), rng_(spec.rng_seed ^ 0x9e3779b97f4a7c15ULL) {}

    void build()
    {
        for (std::size_t i = 0; i < spec_.repos.size(); ++i) {
            RepoModel m;
            m.id = repo_id(i);
            m.cfg = spec_.repos[i];
            repos_.push_back(std::move(m));
        }
        tracks_.resize(spec_.repos.size());
        for (std::size_t f = 0; f < spec_.families.size(); ++f)
            plan_family(f);
        for (std::size_t i = 0; i < repos_.size(); ++i)
            if (!spec_.repos[i].copy_of)
                realize_repo(i);
        for (std::size_t i = 0; i < repos_.size(); ++i) {
            if (auto src = spec_.repos[i].copy_of) {
                auto id = repos_[i].id;
                auto cfg = repos_[*src].cfg;
                cfg.copy_of = src;
                repos_[i] = repos_[*src];
                repos_[i].id = id;
                repos_[i].cfg = cfg;
            }
        }
    }

    const std::vector<RepoModel>& repos() const { return repos_; }
    const std::set<std::string>& empty_contents() const { return empty_contents_; }

    static std::string repo_id(std::size_t i)
    {
        char buf[16];
        std::snprintf(buf, sizeof buf, "r%03zu", i);
        return buf;
    }

private:
    std::string next_message(const std::string& text) { return text + " (#" + std::to_string(++message_counter_) + ")"; }

    std::string fix_message(const std::string& name)
    {
        static const char* const templates[] = {"Fix crash in {}", "Trying to fix IE issues in {}", "bugfix for {}",
                                                "Prefix cleanup in {}", "FIX off-by-one in {}"};
        return next_message(fill(templates[rng_.below(std::size(templates))], name));
    }

    std::string plain_message(const std::string& name)
    {
        static const char* const templates[] = {"Update {}", "Refactor {}", "Improve {} performance", "Tweak {}",
                                                "Tidy {}"};
        return next_message(fill(templates[rng_.below(std::size(templates))], name));
    }

    static std::string fill(std::string t, const std::string& name)
    {
        t.replace(t.find("{}"), 2, name);
        return t;
    }

    std::string unique_line(Language lang)
    {
        const auto e = ++edit_counter_;
        return code_line(lang, "edit_" + std::to_string(e), e, rng_.below(1000));
    }

    /// Inserts a fresh line. Comment-only content only ever grows at the end
    /// so the new line cannot land inside a block comment.
    std::string edited(const std::string& content, Language lang, bool append_only)
    {
        auto lines = split_lines(content);
        std::size_t lo = (lang == Language::PHP && !lines.empty() && lines[0] == "<?php") ? 1 : 0;
        std::size_t pos = append_only ? lines.size() : lo + rng_.below(lines.size() - lo + 1);
        lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(pos), unique_line(lang));
        return join_lines(lines);
    }

    std::string seed_content(std::size_t f, const PlantedFamily& fam, const std::string& name)
    {
        const auto lang = fam.language;
        std::vector<std::string> lines;
        if (fam.empty_seed) {
            if (hash_comments(lang)) {
                lines = {"# " + name + " #" + std::to_string(f), "# placeholder", ""};
                if (lang == Language::Ruby)
                    lines.insert(lines.end(), {"=begin", "reserved for " + name, "=end"});
            } else {
                lines = {"/*", " * " + name + " #" + std::to_string(f), " */", "", "// nothing here yet"};
            }
            auto c = join_lines(lines);
            empty_contents_.insert(c);
            return c;
        }
        if (lang == Language::PHP)
            lines.push_back("<?php");
        if (rng_.chance(0.5))
            lines.push_back(comment_line(lang, name + " helpers"));
        const auto n = rng_.between(3, 8);
        for (std::int64_t k = 0; k < n; ++k)
            lines.push_back(code_line(lang, "s" + std::to_string(f) + "_" + std::to_string(k),
                                      static_cast<std::uint64_t>(k + 1), rng_.below(100)));
        return join_lines(lines);
    }

    void plan_family(std::size_t f)
    {
        const auto& fam = spec_.families[f];
        const auto lang = fam.language;
        const std::string name = std::string(kWords[rng_.below(std::size(kWords))]) + "_" + std::to_string(f);
        const auto ext = extension_for(lang, rng_);
        const auto seed = seed_content(f, fam, name);
        const bool append_only = fam.empty_seed;

        const std::string canonical = "src/" + name + ext;
        const std::vector<std::string> layouts = {"src/" + name + ext, "lib/" + name + ext, name + ext,
                                                  "vendor/" + name + "/" + name + ext,
                                                  "third_party/" + std::string(kWords[f % std::size(kWords)]) + "/" +
                                                      name + ext};
        const std::string shared = edited(seed, lang, append_only);
        const std::string shared_message = "Fix rounding in " + name;
        const std::string duplicate = edited(seed, lang, append_only);
        bool duplicate_direct_taken = false;

        for (const auto& v : fam.variants) {
            std::deque<Step> track;
            const std::string path = (v.plan == VariantPlan::cherry_pick) ? canonical : rng_.pick(layouts);
            track.push_back({StepKind::intro, path, v.extra_copy ? "copies/" + name + ext : "", seed,
                             next_message("Add " + name), ""});
            std::string current = seed;
            auto unique_edits = [&] {
                for (std::size_t e = 0; e < v.edits; ++e) {
                    current = edited(current, lang, append_only);
                    auto msg = e < v.fix_edits ? fix_message(name) : plain_message(name);
                    track.push_back({StepKind::set, path, "", current, msg, ""});
                }
            };
            switch (v.plan) {
            case VariantPlan::unchanged: break;
            case VariantPlan::edit: unique_edits(); break;
            case VariantPlan::revert:
                unique_edits();
                track.push_back({StepKind::set, path, "", seed, next_message("Restore original " + name), ""});
                break;
            case VariantPlan::cherry_pick:
                current = shared;
                track.push_back({StepKind::set, path, "", shared, shared_message, ""});
                unique_edits();
                break;
            case VariantPlan::duplicate:
                if (duplicate_direct_taken) {
                    track.push_back(
                        {StepKind::set, path, "", edited(seed, lang, append_only), plain_message(name), ""});
                }
                duplicate_direct_taken = true;
                track.push_back({StepKind::set, path, "", duplicate, next_message("Sync " + name), ""});
                break;
            case VariantPlan::remove:
                unique_edits();
                track.push_back({StepKind::remove, path, "", "", next_message("Remove " + name), ""});
                break;
            case VariantPlan::rename:
                unique_edits();
                track.push_back({StepKind::move, path, "moved/" + name + ext, "", next_message("Move " + name), ""});
                break;
            case VariantPlan::topic_only:
                track.push_back({StepKind::topic, path, "", edited(seed, lang, append_only), plain_message(name), ""});
                break;
            case VariantPlan::merged_topic:
                track.push_back({StepKind::topic_merge, path, "", edited(seed, lang, append_only),
                                 plain_message(name), ""});
                break;
            }
            tracks_[v.repo].push_back(std::move(track));
        }
    }

    Timestamp tick(RepoModel& m)
    {
        const Timestamp max_days = m.cfg.dormant ? 5 : 15;
        m.clock += rng_.between(1, max_days) * kDay + rng_.between(0, kDay - 1);
        return m.clock;
    }

    std::size_t add_commit(RepoModel& m, std::string ref, std::optional<std::size_t> from,
                           std::optional<std::size_t> merge, std::string message, Tree tree, Timestamp time)
    {
        Commit c;
        c.ref = std::move(ref);
        c.from = from;
        c.merge = merge;
        c.time = time;
        c.author_time = time - rng_.between(0, 7200);
        c.who = rng_.below(std::size(kDevs));
        c.message = std::move(message);
        c.tree = std::move(tree);
        m.commits.push_back(std::move(c));
        return m.commits.size() - 1;
    }

    std::size_t commit_main(RepoModel& m, std::string message, Tree tree, std::optional<std::size_t> merge = {})
    {
        std::optional<std::size_t> parent;
        if (!m.main_chain.empty())
            parent = m.main_chain.back();
        auto idx = add_commit(m, "refs/heads/" + m.cfg.main_branch, parent, merge, std::move(message),
                              std::move(tree), tick(m));
        m.main_chain.push_back(idx);
        return idx;
    }

    void realize_repo(std::size_t i)
    {
        RepoModel& m = repos_[i];
        m.clock = (m.cfg.dormant ? kDormantStart : kActiveStart) + rng_.between(0, 150) * kDay;

        const std::string app = "app/main_" + m.id + ".c";
        std::string app_content = "// " + m.id + " entry point\n" +
                                  code_line(Language::C, "main_" + m.id, rng_.below(50), rng_.below(50)) + "\n";
        commit_main(m, "Initial commit", Tree{{"README.md", "# " + m.id + "\n"}, {app, app_content}});
        if (m.cfg.stale_master)
            m.extra_refs.emplace_back("refs/heads/master", m.main_chain.front());

        auto& tracks = tracks_[i];
        std::size_t topic_counter = 0;
        for (;;) {
            std::vector<std::size_t> live;
            for (std::size_t t = 0; t < tracks.size(); ++t)
                if (!tracks[t].empty())
                    live.push_back(t);
            if (live.empty())
                break;
            auto& track = tracks[rng_.pick(live)];
            Step step = std::move(track.front());
            track.pop_front();

            Tree tree = m.commits[m.main_chain.back()].tree;
            switch (step.kind) {
            case StepKind::intro:
                tree[step.path] = step.content;
                if (!step.path2.empty())
                    tree[step.path2] = step.content;
                commit_main(m, step.message, std::move(tree));
                break;
            case StepKind::set:
                tree[step.path] = step.content;
                commit_main(m, step.message, std::move(tree));
                break;
            case StepKind::remove:
                tree.erase(step.path);
                commit_main(m, step.message, std::move(tree));
                break;
            case StepKind::move: {
                auto content = tree.at(step.path);
                tree.erase(step.path);
                tree[step.path2] = content;
                commit_main(m, step.message, std::move(tree));
                break;
            }
            case StepKind::topic:
            case StepKind::topic_merge: {
                const std::string branch = "topic-" + std::to_string(++topic_counter);
                tree[step.path] = step.content;
                auto topic = add_commit(m, "refs/heads/" + branch, m.main_chain.back(), std::nullopt, step.message,
                                        tree, tick(m));
                if (step.kind == StepKind::topic_merge)
                    commit_main(m, next_message("Merge branch '" + branch + "'"), std::move(tree), topic);
                break;
            }
            }
        }

        Tree tree = m.commits[m.main_chain.back()].tree;
        tree[app] = app_content + code_line(Language::C, "tick_" + m.id, 1, rng_.below(50)) + "\n";
        Timestamp t = tick(m);
        if (!m.cfg.dormant)
            t = std::max(t, kLateActivity + rng_.between(0, 150) * kDay);
        m.clock = t;
        auto idx = add_commit(m, "refs/heads/" + m.cfg.main_branch, m.main_chain.back(), std::nullopt,
                              next_message("Update app"), std::move(tree), t);
        m.main_chain.push_back(idx);
    }

    const SynthSpec& spec_;
    Rng rng_;
    std::vector<RepoModel> repos_;
    std::vector<std::vector<std::deque<Step>>> tracks_;
    std::set<std::string> empty_contents_;
    std::uint64_t message_counter_ = 0;
    std::uint64_t edit_counter_ = 0;
};

std::string fast_import_stream(const RepoModel& m)
{
    std::string s;
    auto data = [&](const std::string& bytes) { s += "data " + std::to_string(bytes.size()) + "\n" + bytes + "\n"; };
    for (std::size_t i = 0; i < m.commits.size(); ++i) {
        const auto& c = m.commits[i];
        const std::string who = std::string(kDevs[c.who]) + " <" + kDevMails[c.who] + ">";
        s += "commit " + c.ref + "\nmark :" + std::to_string(i + 1) + "\n";
        s += "author " + who + " " + std::to_string(c.author_time) + " +0000\n";
        s += "committer " + who + " " + std::to_string(c.time) + " +0000\n";
        data(c.message + "\n");
        if (c.from)
            s += "from :" + std::to_string(*c.from + 1) + "\n";
        if (c.merge)
            s += "merge :" + std::to_string(*c.merge + 1) + "\n";
        s += "deleteall\n";
        for (const auto& [path, content] : c.tree) {
            s += "M 100644 inline " + path + "\n";
            data(content);
        }
        s += "\n";
    }
    for (const auto& [ref, idx] : m.extra_refs)
        s += "reset " + ref + "\nfrom :" + std::to_string(idx + 1) + "\n\n";
    return s;
}

/// Expected analysis results, derived from the model's snapshots.
Json compute_truth(const SynthSpec& spec, const Builder& b)
{
    const auto& repos = b.repos();
    const Timestamp cutoff = spec.reference_date - static_cast<Timestamp>(spec.dormancy_days) * kDay;

    std::map<std::string, const RepoModel*> by_id;
    std::map<std::string, Timestamp> last_time;
    for (const auto& m : repos) {
        by_id[m.id] = &m;
        Timestamp t = 0;
        for (const auto& c : m.commits)
            t = std::max(t, c.time);
        last_time[m.id] = t;
    }
    auto identity_group = [&](const std::string& id) {
        const auto& cfg = by_id.at(id)->cfg;
        return cfg.copy_of ? *cfg.copy_of : static_cast<std::size_t>(std::stoul(id.substr(1)));
    };

    std::map<std::string, std::set<std::pair<std::string, std::string>>> holders;
    for (const auto& m : repos)
        for (const auto& c : m.commits)
            for (const auto& [path, content] : c.tree)
                if (is_source_path(path))
                    holders[content].emplace(m.id, path);

    struct Change {
        std::string path;
        std::optional<std::string> before, after;
        std::string message;
    };
    struct VariantTruth {
        std::string repo, path;
        std::string status;
        std::optional<std::string> head;
        std::vector<Change> post;
        std::string dropped;
    };

    std::vector<std::pair<std::string, std::string>> seeds; // blob id, content
    for (const auto& [content, occ] : holders) {
        std::set<std::string> repo_ids;
        for (const auto& o : occ)
            repo_ids.insert(o.first);
        if (repo_ids.size() >= 2)
            seeds.emplace_back(git_blob_hash(content), content);
    }
    std::sort(seeds.begin(), seeds.end());

    Json families = Json::array();
    Json opportunities = Json::array();
    for (const auto& [blob, seed] : seeds) {
        const auto& occ = holders.at(seed);
        std::set<std::string> repo_ids;
        std::vector<VariantTruth> vs;
        for (const auto& [repo, path] : occ) {
            repo_ids.insert(repo);
            const auto& m = *by_id.at(repo);
            VariantTruth v{repo, path, "", std::nullopt, {}, ""};
            std::optional<std::string> prev;
            bool introduced = false;
            for (auto idx : m.main_chain) {
                const auto& c = m.commits[idx];
                std::optional<std::string> cur;
                if (auto it = c.tree.find(path); it != c.tree.end())
                    cur = it->second;
                if (cur != prev) {
                    if (introduced)
                        v.post.push_back({path, prev, cur, c.message});
                    else if (cur == seed)
                        introduced = true;
                }
                prev = cur;
            }
            v.head = prev;
            if (last_time.at(repo) < cutoff)
                v.status = "dormant";
            else if (!v.head)
                v.status = "inactive";
            else if (*v.head == seed)
                v.status = "unchanged";
            else
                v.status = "maintained";
            vs.push_back(std::move(v));
        }

        std::map<std::size_t, std::string> keeper;
        for (const auto& v : vs) {
            auto g = identity_group(v.repo);
            if (!keeper.count(g) || v.repo < keeper[g])
                keeper[g] = v.repo;
        }
        for (auto& v : vs)
            if (keeper.at(identity_group(v.repo)) != v.repo)
                v.dropped = "identical_repo";

        std::set<std::string> heads;
        for (const auto& v : vs)
            if (v.dropped.empty() && v.status == "maintained")
                heads.insert(*v.head);
        std::string type;
        if (b.empty_contents().count(seed))
            type = "empty_seed";
        else if (heads.empty())
            type = "not_maintained";
        else if (heads.size() == 1)
            type = "zero_variance";
        else
            type = "non_zero_variance";

        std::map<std::string, const VariantTruth*> best;
        for (const auto& v : vs) {
            if (!v.dropped.empty() || v.status != "maintained")
                continue;
            auto& slot = best[*v.head];
            if (!slot || v.post.size() > slot->post.size() ||
                (v.post.size() == slot->post.size() && std::tie(v.repo, v.path) < std::tie(slot->repo, slot->path)))
                slot = &v;
        }
        for (auto& v : vs)
            if (v.dropped.empty() && v.status == "maintained" && best.at(*v.head) != &v)
                v.dropped = "duplicate_variant";

        Json variants = Json::array();
        for (const auto& v : vs)
            variants.push_back({{"repo_id", v.repo},
                                {"path", v.path},
                                {"status", v.status},
                                {"dropped", v.dropped.empty() ? Json(nullptr) : Json(v.dropped)},
                                {"post_seed_commits", v.post.size()}});

        Json unique = Json::array();
        if (type == "non_zero_variance") {
            using Key = std::tuple<std::string, std::optional<std::string>, std::optional<std::string>>;
            std::map<Key, std::set<std::string>> sharing;
            std::set<std::string> maintained;
            for (const auto& v : vs) {
                if (v.dropped == "identical_repo")
                    continue;
                if (v.status == "maintained")
                    maintained.insert(v.repo);
                for (const auto& c : v.post)
                    sharing[{c.path, c.before, c.after}].insert(v.repo);
            }
            struct Found {
                std::string repo, path, message;
            };
            std::vector<Found> fixes;
            for (const auto& v : vs) {
                if (v.dropped == "identical_repo")
                    continue;
                for (const auto& c : v.post) {
                    if (sharing.at({c.path, c.before, c.after}).size() != 1)
                        continue;
                    unique.push_back({{"repo_id", v.repo}, {"path", v.path}, {"message", c.message}});
                    const auto msg = lower(c.message);
                    bool is_fix = false;
                    for (const auto& k : spec.keywords)
                        if (!k.empty() && msg.find(lower(k)) != std::string::npos)
                            is_fix = true;
                    if (is_fix)
                        fixes.push_back({v.repo, v.path, c.message});
                }
            }
            if (!fixes.empty() && fixes.size() <= spec.max_unique) {
                std::set<std::string> sources;
                Json commits = Json::array();
                for (const auto& fx : fixes) {
                    sources.insert(fx.repo);
                    Json targets = Json::array();
                    for (const auto& r : maintained)
                        if (r != fx.repo)
                            targets.push_back(r);
                    commits.push_back(
                        {{"repo_id", fx.repo}, {"path", fx.path}, {"message", fx.message}, {"targets", targets}});
                }
                Json candidates = Json::array();
                for (const auto& r : maintained)
                    if (!sources.count(r))
                        candidates.push_back(r);
                opportunities.push_back(
                    {{"family_id", blob}, {"unique_commits", commits}, {"candidate_targets", candidates}});
            }
        }

        families.push_back({{"blob", blob},
                            {"size", repo_ids.size()},
                            {"family_type", type},
                            {"variants", variants},
                            {"unique_commits", unique}});
    }

    Json repo_list = Json::array();
    for (const auto& m : repos)
        repo_list.push_back({{"repo_id", m.id},
                             {"main_branch", m.cfg.main_branch},
                             {"dormant", last_time.at(m.id) < cutoff},
                             {"copy_of", m.cfg.copy_of ? Json(Builder::repo_id(*m.cfg.copy_of)) : Json(nullptr)}});

    return Json{{"schema", "truth/1"},
                {"rng_seed", spec.rng_seed},
                {"reference_date", io::format_date(spec.reference_date)},
                {"dormancy_days", spec.dormancy_days},
                {"keywords", spec.keywords},
                {"max_unique", spec.max_unique},
                {"repos", repo_list},
                {"families", families},
                {"opportunities", opportunities}};
}

void run_git(const std::vector<std::string>& argv, std::string_view input = {})
{
    auto r = run_process(argv, input);
    if (r.exit_code != 0)
        throw gitio::GitFailure("git " + argv[1] + " failed: " + r.err);
}

} // namespace

std::string ground_truth_json(const SynthSpec& spec)
{
    spec.validate();
    Builder b(spec);
    b.build();
    return compute_truth(spec, b).dump(2) + "\n";
}

std::filesystem::path generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir)
{
    spec.validate();
    if (std::filesystem::exists(out_dir) && !std::filesystem::is_empty(out_dir))
        throw OutDirNotEmpty("output directory is not empty: " + out_dir.string());
    std::filesystem::create_directories(out_dir / "repos");

    Builder b(spec);
    b.build();

    const auto git = gitio::git_executable();
    std::string manifest;
    for (const auto& m : b.repos()) {
        const auto rel = "repos/" + m.id + ".git";
        const auto path = (out_dir / rel).string();
        run_git({git, "init", "--bare", "-q", "--initial-branch=" + m.cfg.main_branch, path});
        run_git({git, "-C", path, "fast-import", "--quiet", "--date-format=raw"}, fast_import_stream(m));

        Json line{{"repo_id", m.id}, {"path", rel}, {"fork", false}};
        if (m.cfg.declare_branch)
            line["default_branch"] = m.cfg.main_branch;
        manifest += io::dump_line(line);
    }
    const auto manifest_path = out_dir / kManifestName;
    io::atomic_write(manifest_path, manifest);
    io::atomic_write(out_dir / kTruthName, compute_truth(spec, b).dump(2) + "\n");
    return manifest_path;
}

} // namespace metamaint::synth
