#include "metamaint/cli.hpp"

#include "metamaint/io.hpp"
#include "metamaint/lexer.hpp"
#include "metamaint/opportunity.hpp"
#include "metamaint/pipeline.hpp"
#include "metamaint/synth.hpp"

#include "CLI11.hpp"

#include <functional>

namespace metamaint::cli {

namespace {

struct Options {
    std::string manifest;
    std::string out = ".";
    std::string in;
    std::string reference_date = "2019-01-01";
    std::uint64_t rng_seed = 0;
    unsigned jobs = 1;

    std::uint64_t min_total_commits = 500;
    std::uint64_t min_two_year_commits = 100;
    std::uint64_t min_committers = 2;
    bool include_forks = false;

    int dormancy_days = family::kDefaultDormancyDays;
    std::size_t sometimes = 28;
    std::size_t common = 331;
    double z = 1.96, p = 0.5, e = 0.05;
    std::size_t min_size = 2;
    std::size_t shard_limit = 20'000'000;
    bool use_sample = false;
    std::string scope = "non-zero";

    std::vector<std::string> keywords;
    std::string keyword_preset = "default";
    std::size_t max_unique = 2;
    std::vector<std::string> formats;

    std::size_t max_repos = 15;
    std::size_t max_families = 6;

    std::string token_file;
    std::string token_lang;
};

pipeline::PipelineConfig make_config(const Options& o)
{
    pipeline::PipelineConfig c;
    c.manifest = o.manifest;
    c.out_dir = o.out;
    c.reference_date = io::parse_date(o.reference_date);
    c.dormancy_days = o.dormancy_days;
    c.strata = {o.sometimes, o.common};
    c.sample = {o.z, o.p, o.e, o.rng_seed};
    c.filters = {o.min_total_commits, o.min_two_year_commits, !o.include_forks, o.min_committers};
    c.keywords = o.keywords;
    if (o.keyword_preset == "extended")
        c.keywords.insert(c.keywords.end(), opportunity::kExtendedKeywords.begin(), opportunity::kExtendedKeywords.end());
    else if (o.keyword_preset != "default")
        throw Error("unknown keyword preset '" + o.keyword_preset + "' (default, extended)");
    if (c.keywords.empty())
        c.keywords = opportunity::kDefaultKeywords;
    c.max_unique = o.max_unique;
    c.min_family_size = o.min_size;
    c.jobs = o.jobs;
    c.use_sample = o.use_sample;
    c.index_shard_limit = o.shard_limit;
    if (o.scope == "non-zero")
        c.metrics_scope = pipeline::MetricsScope::non_zero;
    else if (o.scope == "all")
        c.metrics_scope = pipeline::MetricsScope::all;
    else
        throw Error("unknown metrics scope '" + o.scope + "' (non-zero, all)");
    if (!o.formats.empty()) {
        c.report_formats.clear();
        for (const auto& f : o.formats)
            c.report_formats.push_back(report::parse_format(f));
    }
    c.validate();
    return c;
}

void print(std::ostream& out, std::ostream& err, const pipeline::StageSummary& s)
{
    out << s.stage << ": " << s.records << "\n";
    for (const auto& w : s.warnings)
        err << "warning: " << w << "\n";
}

int dump_tokens(const Options& o, std::ostream& out)
{
    std::optional<Language> lang;
    if (!o.token_lang.empty()) {
        lang = parse_language(o.token_lang);
        if (!lang)
            throw Error("unknown language '" + o.token_lang + "'");
    } else {
        lang = corpus::extension_language(o.token_file);
        if (!lang)
            throw Error("cannot infer the language of '" + o.token_file + "'; pass --lang");
    }
    const auto content = io::read_file(o.token_file);
    for (const auto& t : lexer::tokenize(content, *lang))
        out << io::Json(t.text).dump(-1, ' ', false, io::Json::error_handler_t::replace) << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Find files shared verbatim across git repositories and track how the copies diverge.",
                 "metamaint"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->always_capture_default();

    app.add_option("--manifest", o.manifest, "JSON Lines repository manifest");
    app.add_option("--out", o.out, "Output directory (opportunities: may name a .jsonl file)");
    app.add_option("--reference-date", o.reference_date, "Dormancy reference date, YYYY-MM-DD");
    app.add_option("--rng-seed", o.rng_seed, "Seed for sampling and corpus synthesis");
    app.add_option("--jobs", o.jobs, "Parallel repository workers")->check(CLI::PositiveNumber);

    app.add_option("--min-total-commits", o.min_total_commits, "Keep repos with more commits than this")
        ->group("Scan");
    app.add_option("--min-two-year-commits", o.min_two_year_commits, "Minimum commits in the busiest two-year window")
        ->group("Scan");
    app.add_option("--min-committers", o.min_committers, "Minimum distinct committer emails")->group("Scan");
    app.add_flag("--include-forks", o.include_forks, "Keep repositories marked as forks")->group("Scan");

    app.add_option("--min-size", o.min_size, "Minimum repositories per family")->group("Families");
    app.add_option("--index-shard-limit", o.shard_limit, "Blob occurrences indexed per pass")->group("Families");
    app.add_option("--sometimes-threshold", o.sometimes, "Smallest 'sometimes' family size")->group("Families");
    app.add_option("--common-threshold", o.common, "Smallest 'common' family size")->group("Families");

    app.add_option("--confidence-z", o.z, "z score of the confidence level")->group("Sample");
    app.add_option("--proportion", o.p, "Assumed proportion")->group("Sample");
    app.add_option("--margin", o.e, "Margin of error")->group("Sample");

    app.add_flag("--use-sample", o.use_sample, "Only classify sampled families")->group("Status");
    app.add_option("--dormancy-days", o.dormancy_days, "Days without commits that make a repo dormant")
        ->group("Status");

    app.add_option("--scope", o.scope, "Families measured: non-zero or all")->group("Metrics");

    app.add_option("--keyword", o.keywords, "Fix keyword (repeatable; default: fix)")->group("Opportunities");
    app.add_option("--keyword-preset", o.keyword_preset, "default or extended (adds security, performance)")
        ->group("Opportunities");
    app.add_option("--max-unique", o.max_unique, "Drop families with more unique fix commits")
        ->group("Opportunities");
    app.add_option("--in", o.in, "Directory holding status.jsonl when --out names a file")->group("Opportunities");

    app.add_option("--format", o.formats, "jsonl, csv or markdown (repeatable; default: all)")->group("Report");

    app.add_option("--max-repos", o.max_repos, "Largest repository count")->group("Synth");
    app.add_option("--max-families", o.max_families, "Largest planted family count")->group("Synth");

    using Stage = std::function<pipeline::StageSummary(const pipeline::PipelineConfig&)>;
    std::function<int()> action;
    auto stage = [&](const char* name, const char* help, Stage fn) {
        app.add_subcommand(name, help)->callback([&, fn] {
            action = [&, fn] {
                print(out, err, fn(make_config(o)));
                return 0;
            };
        });
    };
    stage("scan", "Enumerate source blobs of every repository", pipeline::scan);
    stage("families", "Group shared blobs into seed families", pipeline::families);
    stage("sample", "Draw the stratified family sample", pipeline::sample);
    stage("status", "Classify variants and families", pipeline::status);
    stage("metrics", "Retention, uniqueness and evolution period per family", pipeline::metrics);
    stage("report", "Summary tables", pipeline::report);

    app.add_subcommand("opportunities", "Report fix commits unique to one repository")->callback([&] {
        action = [&] {
            auto cfg_opts = o;
            std::optional<std::filesystem::path> file;
            if (std::filesystem::path(o.out).extension() == ".jsonl") {
                file = o.out;
                auto parent = file->parent_path();
                cfg_opts.out = !o.in.empty() ? o.in : (parent.empty() ? std::string(".") : parent.string());
            } else if (!o.in.empty()) {
                throw Error("--in is only meaningful when --out names a .jsonl file");
            }
            auto cfg = make_config(cfg_opts);
            cfg.opportunities_out = file;
            print(out, err, pipeline::opportunities(cfg));
            return 0;
        };
    });

    app.add_subcommand("pipeline", "Run every stage in order")->callback([&] {
        action = [&] {
            for (const auto& s : pipeline::run_all(make_config(o)))
                print(out, err, s);
            return 0;
        };
    });

    app.add_subcommand("synth", "Generate a random synthetic corpus with ground truth into --out")->callback([&] {
        action = [&] {
            auto spec = synth::random_spec(o.rng_seed, o.max_repos, o.max_families);
            spec.reference_date = io::parse_date(o.reference_date);
            spec.dormancy_days = o.dormancy_days;
            spec.max_unique = o.max_unique;
            if (!o.keywords.empty())
                spec.keywords = o.keywords;
            out << synth::generate_synthetic_corpus(spec, o.out).string() << "\n";
            return 0;
        };
    });

    auto* tokens = app.add_subcommand("tokens", "Print the tokens of a source file, one JSON string per line");
    tokens->add_option("file", o.token_file, "Source file")->required();
    tokens->add_option("--lang", o.token_lang, "Language (default: from the extension)");
    tokens->callback([&] { action = [&] { return dump_tokens(o, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        return action ? action() : 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace metamaint::cli
