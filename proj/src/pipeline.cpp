#include "metamaint/pipeline.hpp"

#include "metamaint/io.hpp"
#include "metamaint/lexer.hpp"
#include "metamaint/metrics.hpp"
#include "metamaint/opportunity.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <thread>

namespace metamaint::pipeline {

using io::Json;

void PipelineConfig::validate() const
{
    if (strata.sometimes < 2 || strata.sometimes > strata.common)
        throw Error("strata thresholds must satisfy 2 <= sometimes <= common");
    if (jobs < 1)
        throw Error("--jobs must be at least 1");
    if (dormancy_days < 0)
        throw Error("--dormancy-days must not be negative");
    if (keywords.empty())
        throw Error("at least one keyword is required");
    if (min_family_size < 2)
        throw Error("--min-size must be at least 2");
    if (index_shard_limit == 0)
        throw Error("--index-shard-limit must be positive");
    try {
        sample.validate();
    } catch (const std::invalid_argument& e) {
        throw Error(e.what());
    }
}

namespace {

/// Runs fn(0..n-1) on up to `jobs` threads. The exception of the lowest
/// failing index is rethrown so failures are reported deterministically.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn)
{
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t k = std::min<std::size_t>(jobs, n);
    if (k <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < k; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

Json optional_json(const std::optional<std::uint64_t>& v) { return v ? Json(*v) : Json(nullptr); }

struct RepoInfo {
    corpus::RepoRecord record;
    std::optional<std::string> main_branch;
    std::string head_commit;
    std::optional<gitio::Timestamp> last_commit_time;
    bool included = false;
    std::string excluded_reason;
};

Json repo_to_json(const RepoInfo& r)
{
    const auto& rec = r.record;
    return Json{{"schema", io::kRepoSchema},
                {"repo_id", rec.repo_id},
                {"path", rec.local_path.string()},
                {"language", to_string(rec.declared_language)},
                {"fork", rec.is_fork},
                {"default_branch", rec.default_branch ? Json(*rec.default_branch) : Json(nullptr)},
                {"total_commits", optional_json(rec.total_commits)},
                {"two_year_commits", optional_json(rec.max_commits_in_two_year_window)},
                {"committers", optional_json(rec.committer_count)},
                {"main_branch", r.main_branch ? Json(*r.main_branch) : Json(nullptr)},
                {"head_commit", r.head_commit.empty() ? Json(nullptr) : Json(r.head_commit)},
                {"last_commit_time", r.last_commit_time ? Json(*r.last_commit_time) : Json(nullptr)},
                {"included", r.included},
                {"excluded_reason", r.excluded_reason.empty() ? Json(nullptr) : Json(r.excluded_reason)}};
}

std::map<std::string, RepoInfo> load_repos(const PipelineConfig& cfg)
{
    std::map<std::string, RepoInfo> repos;
    io::for_each_record(cfg.path(files::repos), io::kRepoSchema, [&](const Json& j) {
        RepoInfo r;
        r.record.repo_id = j.at("repo_id").get<std::string>();
        r.record.local_path = j.at("path").get<std::string>();
        if (!j.at("main_branch").is_null())
            r.main_branch = j.at("main_branch").get<std::string>();
        if (!j.at("head_commit").is_null())
            r.head_commit = j.at("head_commit").get<std::string>();
        if (!j.at("last_commit_time").is_null())
            r.last_commit_time = j.at("last_commit_time").get<gitio::Timestamp>();
        r.included = j.at("included").get<bool>();
        repos.emplace(r.record.repo_id, std::move(r));
    });
    return repos;
}

const RepoInfo& repo_at(const std::map<std::string, RepoInfo>& repos, const std::string& id)
{
    auto it = repos.find(id);
    if (it == repos.end())
        throw Error("repository '" + id + "' is not listed in " + std::string(files::repos));
    return it->second;
}

std::vector<io::StatusRecord> load_status(const PipelineConfig& cfg)
{
    std::vector<io::StatusRecord> out;
    io::for_each_record(cfg.path(files::status), io::kStatusSchema,
                        [&](const Json& j) { out.push_back(io::status_from_json(j)); });
    return out;
}

std::uint8_t first_byte(const gitio::BlobId& b)
{
    return static_cast<std::uint8_t>(std::stoi(b.hex().substr(0, 2), nullptr, 16));
}

} // namespace

StageSummary scan(const PipelineConfig& cfg)
{
    cfg.validate();
    if (cfg.manifest.empty())
        throw Error("--manifest is required for scan");
    auto records = corpus::load_manifest(cfg.manifest);

    struct Outcome {
        RepoInfo info;
        std::vector<gitio::BlobPath> blobs;
        std::string warning;
    };
    std::vector<Outcome> outcomes(records.size());

    parallel_for(records.size(), cfg.jobs, [&](std::size_t i) {
        Outcome& o = outcomes[i];
        o.info.record = records[i];
        auto& rec = o.info.record;
        const auto handle = rec.handle();
        try {
            gitio::check_repository(handle);
            auto activity = gitio::commit_activity(handle);
            if (!rec.total_commits)
                rec.total_commits = activity.commit_times.size();
            if (!rec.committer_count)
                rec.committer_count = activity.committer_count;
            if (!rec.max_commits_in_two_year_window)
                rec.max_commits_in_two_year_window = corpus::two_year_window_max(activity.commit_times);
            if (activity.commit_times.empty()) {
                o.info.excluded_reason = "no commits";
                return;
            }
            o.info.last_commit_time = activity.commit_times.back();
            try {
                auto head = gitio::main_branch_head(handle, rec.default_branch);
                if (head.commit_id.empty()) {
                    o.warning = rec.repo_id + ": branch '" + head.name + "' does not exist";
                } else {
                    o.info.main_branch = head.name;
                    o.info.head_commit = head.commit_id;
                }
            } catch (const gitio::NoBranch& e) {
                o.warning = e.what();
            }
            if (!corpus::passes_activity_filters(rec, cfg.filters)) {
                o.info.excluded_reason = "activity filter";
                return;
            }
            o.blobs = family::filter_source_blobs(gitio::enumerate_blobs(handle));
            o.info.included = true;
        } catch (const gitio::RepoUnreadable& e) {
            o.info.excluded_reason = e.what();
        }
    });

    StageSummary summary{"scan", 0, {}};
    std::string repos_out, blobs_out;
    for (const auto& o : outcomes) {
        repos_out += io::dump_line(repo_to_json(o.info));
        if (!o.warning.empty())
            summary.warnings.push_back(o.warning);
        if (!o.info.included) {
            if (o.info.excluded_reason != "activity filter")
                summary.warnings.push_back(o.info.record.repo_id + ": excluded: " + o.info.excluded_reason);
            continue;
        }
        ++summary.records;
        Json pairs = Json::array();
        for (const auto& b : o.blobs)
            pairs.push_back(Json::array({b.blob.hex(), b.path}));
        blobs_out += io::dump_line(
            Json{{"schema", io::kBlobsSchema}, {"repo_id", o.info.record.repo_id}, {"blobs", std::move(pairs)}});
    }
    io::atomic_write(cfg.path(files::repos), repos_out);
    io::atomic_write(cfg.path(files::blobs), blobs_out);
    return summary;
}

StageSummary families(const PipelineConfig& cfg)
{
    cfg.validate();
    const auto blobs_file = cfg.path(files::blobs);

    std::size_t total = 0;
    io::for_each_record(blobs_file, io::kBlobsSchema, [&](const Json& j) { total += j.at("blobs").size(); });

    // The index is built in passes over blob-id prefix ranges when the
    // corpus is too large to hold at once; output order is unaffected.
    std::size_t shards = 1;
    while (shards < 256 && total / shards > cfg.index_shard_limit)
        shards *= 16;

    std::string out;
    std::size_t count = 0;
    for (std::size_t s = 0; s < shards; ++s) {
        const std::size_t lo = s * 256 / shards, hi = (s + 1) * 256 / shards;
        std::vector<family::RepoBlobs> enumerations;
        io::for_each_record(blobs_file, io::kBlobsSchema, [&](const Json& j) {
            family::RepoBlobs rb{j.at("repo_id").get<std::string>(), {}};
            for (const auto& pair : j.at("blobs")) {
                gitio::BlobId id(pair.at(0).get<std::string>());
                const auto b = first_byte(id);
                if (b >= lo && b < hi)
                    rb.blobs.push_back({std::move(id), pair.at(1).get<std::string>()});
            }
            enumerations.push_back(std::move(rb));
        });
        auto index = family::build_blob_index(enumerations);
        enumerations.clear();
        for (const auto& f : family::identify_seed_families(index, cfg.min_family_size, cfg.strata)) {
            out += io::dump_line(io::family_to_json(f));
            ++count;
        }
    }
    io::atomic_write(cfg.path(files::families), out);
    return {"families", count, {}};
}

StageSummary sample(const PipelineConfig& cfg)
{
    cfg.validate();
    std::vector<family::SeedFamily> fams;
    io::for_each_record(cfg.path(files::families), io::kFamilySchema, [&](const Json& j) {
        auto f = io::family_from_json(j);
        // Strata follow the current thresholds, not the ones used when the
        // families file was written.
        f.stratum = family::stratify(f.size, cfg.strata);
        fams.push_back(std::move(f));
    });
    std::map<family::Stratum, std::size_t> population;
    for (const auto& f : fams)
        ++population[f.stratum];

    auto chosen = family::stratified_sample(fams, cfg.sample);
    std::string out;
    std::size_t count = 0;
    for (auto s : family::kStrata) {
        Json ids = Json::array();
        for (const auto& b : chosen[s])
            ids.push_back(b.hex());
        count += chosen[s].size();
        out += io::dump_line(Json{{"schema", io::kSampleSchema},
                                  {"stratum", family::to_string(s)},
                                  {"population", population[s]},
                                  {"sample_size", chosen[s].size()},
                                  {"confidence_z", cfg.sample.confidence_z},
                                  {"proportion", cfg.sample.proportion_p},
                                  {"margin", cfg.sample.margin_e},
                                  {"rng_seed", cfg.sample.rng_seed},
                                  {"families", std::move(ids)}});
    }
    io::atomic_write(cfg.path(files::sample), out);
    return {"sample", count, {}};
}

StageSummary status(const PipelineConfig& cfg)
{
    cfg.validate();
    const auto repos = load_repos(cfg);

    std::optional<std::set<std::string>> wanted;
    if (cfg.use_sample) {
        wanted.emplace();
        io::for_each_record(cfg.path(files::sample), io::kSampleSchema, [&](const Json& j) {
            for (const auto& id : j.at("families"))
                wanted->insert(id.get<std::string>());
        });
    }

    std::vector<family::SeedFamily> fams;
    io::for_each_record(cfg.path(files::families), io::kFamilySchema, [&](const Json& j) {
        auto f = io::family_from_json(j);
        if (wanted && !wanted->count(f.id()))
            return;
        f.stratum = family::stratify(f.size, cfg.strata);
        fams.push_back(std::move(f));
    });

    // Per-repository work: histories and heads of every variant path, and
    // the emptiness of seeds read from their first holder.
    struct RepoWork {
        std::string repo_id;
        std::set<std::string> paths;
        std::map<gitio::BlobId, Language> seeds;
        std::map<std::string, std::vector<gitio::PathChange>> changes;
        std::map<std::string, std::optional<gitio::BlobId>> heads;
        std::map<gitio::BlobId, bool> seed_empty;
    };
    std::map<std::string, RepoWork> work_by_repo;
    for (const auto& f : fams) {
        for (const auto& v : f.variants)
            work_by_repo[v.repo_id].paths.insert(v.path);
        work_by_repo[f.seed.occurrences.front().repo_id].seeds.emplace(f.seed.blob, f.seed.language);
    }
    std::vector<RepoWork*> work;
    for (auto& [id, w] : work_by_repo) {
        w.repo_id = id;
        work.push_back(&w);
    }

    parallel_for(work.size(), cfg.jobs, [&](std::size_t i) {
        RepoWork& w = *work[i];
        const auto& info = repo_at(repos, w.repo_id);
        const auto handle = info.record.handle();
        if (info.main_branch) {
            std::vector<std::string> paths(w.paths.begin(), w.paths.end());
            w.changes = gitio::path_changes(handle, *info.main_branch, paths);
            w.heads = gitio::head_blobs(handle, *info.main_branch, paths);
        }
        if (!w.seeds.empty()) {
            std::vector<gitio::BlobId> ids;
            for (const auto& [b, lang] : w.seeds)
                ids.push_back(b);
            for (const auto& [b, content] : gitio::read_blobs(handle, ids))
                w.seed_empty[b] = lexer::is_empty_source(content, w.seeds.at(b));
        }
    });

    std::map<std::string, std::string> head_commits;
    for (const auto& [id, info] : repos)
        if (!info.head_commit.empty())
            head_commits[id] = info.head_commit;

    std::string out;
    for (auto& f : fams) {
        for (auto& v : f.variants) {
            const auto& w = work_by_repo.at(v.repo_id);
            const auto& info = repo_at(repos, v.repo_id);
            if (auto it = w.changes.find(v.path); it != w.changes.end()) {
                auto h = family::split_history(it->second, f.seed.blob);
                v.seed_intro_commit = std::move(h.seed_intro_commit);
                v.post_seed_commits = std::move(h.post_seed_commits);
            }
            if (auto it = w.heads.find(v.path); it != w.heads.end())
                v.head_blob = it->second;
            family::VariantFacts facts{info.last_commit_time.value_or(0), v.head_blob, f.seed.blob};
            v.status = family::classify_variant_status(facts, cfg.reference_date, cfg.dormancy_days);
        }

        io::StatusRecord rec;
        rec.seed_empty = work_by_repo.at(f.seed.occurrences.front().repo_id).seed_empty.at(f.seed.blob);
        rec.dropped.assign(f.variants.size(), io::DropReason::none);

        auto kept_keys = [](const family::SeedFamily& g) {
            std::set<std::pair<std::string, std::string>> keys;
            for (const auto& v : g.variants)
                keys.emplace(v.repo_id, v.path);
            return keys;
        };
        const auto merged = family::dedupe_identical_repos(f, head_commits);
        const auto deduped = family::dedupe_duplicate_variants(merged);
        const auto after_merge = kept_keys(merged), after_dedupe = kept_keys(deduped);
        for (std::size_t i = 0; i < f.variants.size(); ++i) {
            const std::pair key{f.variants[i].repo_id, f.variants[i].path};
            if (!after_merge.count(key))
                rec.dropped[i] = io::DropReason::identical_repo;
            else if (!after_dedupe.count(key))
                rec.dropped[i] = io::DropReason::duplicate_variant;
        }
        f.family_type = family::classify_family_type(merged, rec.seed_empty);
        rec.family = std::move(f);
        out += io::dump_line(io::status_to_json(rec));
    }
    io::atomic_write(cfg.path(files::status), out);
    return {"status", fams.size(), {}};
}

StageSummary metrics(const PipelineConfig& cfg)
{
    cfg.validate();
    const auto repos = load_repos(cfg);
    const auto records = load_status(cfg);

    // Variants measured per family, in record order.
    std::vector<family::SeedFamily> selected;
    for (const auto& r : records) {
        auto fam = r.deduplicated();
        auto& vs = fam.variants;
        if (cfg.metrics_scope == MetricsScope::non_zero) {
            if (r.family.family_type != family::FamilyType::non_zero_variance)
                continue;
            std::erase_if(vs, [](const family::Variant& v) { return v.status != family::VariantStatus::maintained; });
        } else {
            std::erase_if(vs, [](const family::Variant& v) { return !v.head_blob; });
        }
        if (vs.empty())
            continue;
        selected.push_back(std::move(fam));
    }

    using Key = std::pair<gitio::BlobId, Language>;
    std::map<std::string, std::set<Key>> reads;
    for (const auto& f : selected) {
        reads[f.seed.occurrences.front().repo_id].emplace(f.seed.blob, f.seed.language);
        for (const auto& v : f.variants)
            reads[v.repo_id].emplace(*v.head_blob, f.seed.language);
    }
    std::vector<std::pair<const std::string*, const std::set<Key>*>> jobs;
    for (const auto& [id, keys] : reads)
        jobs.emplace_back(&id, &keys);
    std::vector<std::map<Key, lexer::TrigramSet>> partial(jobs.size());
    parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& info = repo_at(repos, *jobs[i].first);
        std::vector<gitio::BlobId> ids;
        for (const auto& k : *jobs[i].second)
            ids.push_back(k.first);
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        auto contents = gitio::read_blobs(info.record.handle(), ids);
        for (const auto& k : *jobs[i].second)
            partial[i].emplace(k, lexer::trigram_set(contents.at(k.first), k.second));
    });
    std::map<Key, lexer::TrigramSet> sets;
    for (auto& p : partial)
        sets.merge(p);

    std::string csv = "family_id,stratum,variant_count,retention,uniqueness,evolution_years\n";
    for (const auto& f : selected) {
        const auto& seed = sets.at({f.seed.blob, f.seed.language});
        std::vector<lexer::TrigramSet> vsets;
        for (const auto& v : f.variants)
            vsets.push_back(sets.at({*v.head_blob, f.seed.language}));
        const auto m = metrics::family_metrics(vsets, seed, f);
        csv += f.id() + "," + std::string(family::to_string(f.stratum)) + "," + std::to_string(m.variant_count) + "," +
               io::format_fixed(m.retention) + "," + io::format_fixed(m.uniqueness) + "," +
               io::format_fixed(m.evolution_period_years) + "\n";
    }
    io::atomic_write(cfg.path(files::metrics), csv);

    std::vector<std::size_t> sizes;
    io::for_each_record(cfg.path(files::families), io::kFamilySchema,
                        [&](const Json& j) { sizes.push_back(j.at("size").get<std::size_t>()); });
    std::string hist = "size,count\n";
    for (const auto& [size, n] : metrics::family_size_distribution(sizes))
        hist += std::to_string(size) + "," + std::to_string(n) + "\n";
    io::atomic_write(cfg.path(files::histogram), hist);

    return {"metrics", selected.size(), {}};
}

StageSummary opportunities(const PipelineConfig& cfg)
{
    cfg.validate();
    std::string out;
    std::size_t count = 0;
    io::for_each_record(cfg.path(files::status), io::kStatusSchema, [&](const Json& j) {
        const auto rec = io::status_from_json(j);
        if (rec.family.family_type != family::FamilyType::non_zero_variance)
            return;
        // Duplicate-content variants keep their histories here: a change
        // they carry still counts towards patch sharing.
        auto report = opportunity::propose_opportunities(rec.without_identical_repos(), cfg.keywords, cfg.max_unique);
        if (!report)
            return;
        out += io::dump_line(io::opportunity_to_json(*report, rec.family.stratum));
        ++count;
    });
    io::atomic_write(cfg.opportunities_out.value_or(cfg.path(files::opportunities)), out);
    return {"opportunities", count, {}};
}

StageSummary report(const PipelineConfig& cfg)
{
    cfg.validate();
    const auto records = load_status(cfg);
    auto data = report::tabulate(records);

    if (const auto p = cfg.path(files::metrics); std::filesystem::exists(p))
        data.metric_medians = report::metric_medians(io::read_file(p));
    if (const auto p = cfg.opportunities_out.value_or(cfg.path(files::opportunities)); std::filesystem::exists(p)) {
        report::OpportunitySummary s;
        io::for_each_record(p, io::kOpportunitySchema, [&](const Json& j) {
            ++s.families;
            for (const auto& u : j.at("unique_commits")) {
                ++s.unique_fix_commits;
                if (u.at("substring_match").get<bool>())
                    ++s.substring_only;
            }
        });
        data.opportunities = s;
    }
    auto written = report::emit_report(data, cfg.report_formats, cfg.out_dir);
    return {"report", written.size(), {}};
}

std::vector<StageSummary> run_all(const PipelineConfig& cfg)
{
    std::vector<StageSummary> out;
    out.push_back(scan(cfg));
    out.push_back(families(cfg));
    if (cfg.use_sample)
        out.push_back(sample(cfg));
    out.push_back(status(cfg));
    out.push_back(metrics(cfg));
    out.push_back(opportunities(cfg));
    out.push_back(report(cfg));
    return out;
}

} // namespace metamaint::pipeline
