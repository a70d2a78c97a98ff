#include "doctest.h"

#include "fixture.hpp"
#include "truth.hpp"

#include "metamaint/cli.hpp"
#include "metamaint/io.hpp"
#include "metamaint/pipeline.hpp"
#include "metamaint/synth.hpp"

#include <fstream>
#include <sstream>

using namespace metamaint;
namespace fs = std::filesystem;
namespace files = pipeline::files;

namespace {

const char* const kAllOutputs[] = {files::repos,   files::blobs,         files::families,  files::status,
                                   files::metrics, files::histogram,     files::opportunities,
                                   files::report_md, files::report_csv, files::report_jsonl};

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli_run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const fs::path& p)
{
    auto s = io::read_file(p);
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("full pipeline on a synthetic corpus recovers the ground truth")
{
    fixture::TempDir tmp;
    auto spec = synth::random_spec(3);
    auto manifest = synth::generate_synthetic_corpus(spec, tmp / "corpus");
    auto cfg = fixture::synth_config(manifest, tmp / "out");
    auto summaries = pipeline::run_all(cfg);
    CHECK(summaries.size() == 6);
    for (auto name : kAllOutputs)
        CHECK_MESSAGE(fs::exists(tmp / "out" / name), name);
    CHECK_FALSE(fs::exists(tmp / "out" / files::sample));

    auto diff = fixture::compare_with_truth(tmp / "corpus" / synth::kTruthName, tmp / "out");
    for (const auto* group : {&diff.families, &diff.statuses, &diff.opportunities})
        for (const auto& m : *group)
            FAIL_CHECK(m);
    CHECK(count_lines(tmp / "out" / files::repos) == spec.repos.size());

    SUBCASE("rerunning a single stage reproduces its outputs byte for byte")
    {
        std::map<std::string, std::string> before;
        for (auto name : kAllOutputs)
            before[name] = io::read_file(tmp / "out" / name);
        pipeline::families(cfg);
        pipeline::status(cfg);
        pipeline::metrics(cfg);
        pipeline::opportunities(cfg);
        pipeline::report(cfg);
        for (auto name : kAllOutputs)
            CHECK_MESSAGE(io::read_file(tmp / "out" / name) == before[name], name);
    }
    SUBCASE("parallel workers give identical outputs")
    {
        auto par = cfg;
        par.out_dir = tmp / "par";
        par.jobs = 3;
        pipeline::run_all(par);
        for (auto name : kAllOutputs)
            CHECK_MESSAGE(io::read_file(tmp / "par" / name) == io::read_file(tmp / "out" / name), name);
    }
    SUBCASE("sampled status only covers sampled families")
    {
        auto s = cfg;
        s.use_sample = true;
        s.sample.margin_e = 0.4; // small samples
        pipeline::sample(s);
        std::set<std::string> sampled;
        io::for_each_record(tmp / "out" / files::sample, io::kSampleSchema, [&](const io::Json& j) {
            for (const auto& id : j.at("families"))
                sampled.insert(id.get<std::string>());
        });
        pipeline::status(s);
        std::size_t n = 0;
        io::for_each_record(tmp / "out" / files::status, io::kStatusSchema, [&](const io::Json& j) {
            CHECK(sampled.count(j.at("blob").get<std::string>()));
            ++n;
        });
        CHECK(n == sampled.size());
    }
}

TEST_CASE("stages report missing inputs")
{
    fixture::TempDir tmp;
    pipeline::PipelineConfig cfg;
    cfg.out_dir = tmp.path();
    cfg.manifest = tmp / "none.jsonl";
    CHECK_THROWS_AS(pipeline::scan(cfg), Error);
    CHECK_THROWS_AS(pipeline::families(cfg), Error);
    CHECK_THROWS_AS(pipeline::status(cfg), Error);
    CHECK_THROWS_AS(pipeline::opportunities(cfg), Error);
    cfg.jobs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("scan filters and tolerates unreadable repositories")
{
    fixture::TempDir tmp;
    fixture::WorkRepo busy(tmp / "busy"), quiet(tmp / "quiet");
    for (int i = 0; i < 6; ++i) {
        busy.write("a.c", std::to_string(i));
        busy.commit("c", 1500000000 + i, i % 2 ? "a@x" : "b@x");
    }
    quiet.write("a.c", "shared\n");
    quiet.commit("c", 1500000000);
    std::ofstream(tmp / "m.jsonl") << fixture::manifest_line("busy", tmp / "busy") << "\n"
                                   << fixture::manifest_line("quiet", tmp / "quiet") << "\n"
                                   << fixture::manifest_line("gone", tmp / "gone") << "\n";
    pipeline::PipelineConfig cfg;
    cfg.manifest = tmp / "m.jsonl";
    cfg.out_dir = tmp / "out";
    cfg.filters = {5, 1, true, 2};
    auto s = pipeline::scan(cfg);
    CHECK_FALSE(s.warnings.empty());
    std::map<std::string, bool> included;
    io::for_each_record(tmp / "out" / files::repos, io::kRepoSchema, [&](const io::Json& j) {
        included[j.at("repo_id").get<std::string>()] = j.at("included").get<bool>();
    });
    CHECK(included == std::map<std::string, bool>{{"busy", true}, {"quiet", false}, {"gone", false}});
}

TEST_CASE("synthetic corpora are deterministic")
{
    CHECK(synth::ground_truth_json(synth::random_spec(21)) == synth::ground_truth_json(synth::random_spec(21)));
    CHECK(synth::ground_truth_json(synth::random_spec(21)) != synth::ground_truth_json(synth::random_spec(22)));

    fixture::TempDir tmp;
    auto spec = synth::random_spec(9, 4, 2);
    synth::generate_synthetic_corpus(spec, tmp / "a");
    synth::generate_synthetic_corpus(spec, tmp / "b");
    CHECK(io::read_file(tmp / "a" / synth::kManifestName) == io::read_file(tmp / "b" / synth::kManifestName));
    CHECK(io::read_file(tmp / "a" / synth::kTruthName) == io::read_file(tmp / "b" / synth::kTruthName));
    for (std::size_t i = 0; i < spec.repos.size(); ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "r%03zu.git", i);
        auto refs = [&](const fs::path& root) {
            return fixture::git(root / "repos" / name, {"for-each-ref", "--format=%(refname) %(objectname)"});
        };
        CHECK(refs(tmp / "a") == refs(tmp / "b"));
    }
    CHECK_THROWS_AS(synth::generate_synthetic_corpus(spec, tmp / "a"), synth::OutDirNotEmpty);

    auto bad = spec;
    bad.families[0].variants.resize(1);
    CHECK_THROWS_AS(bad.validate(), synth::InvalidSpec);
}

TEST_CASE("command line")
{
    fixture::TempDir tmp;

    auto help = cli_run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("pipeline") != std::string::npos);
    CHECK(cli_run({"scan", "--help"}).code == 0);
    CHECK(cli_run({"--bogus"}).code == 1);
    CHECK(cli_run({}).code == 1);
    CHECK(cli_run({"report", "--out", (tmp / "nothing").string()}).code == 1);
    CHECK(cli_run({"report", "--format", "xml", "--out", tmp.path().string()}).code == 1);
    CHECK(cli_run({"status", "--reference-date", "2019-13-01", "--out", tmp.path().string()}).code == 1);

    auto corpus = tmp / "corpus";
    auto synth_run = cli_run({"synth", "--rng-seed", "4", "--out", corpus.string()});
    REQUIRE(synth_run.code == 0);
    CHECK(cli_run({"synth", "--rng-seed", "4", "--out", corpus.string()}).code == 1);

    const std::vector<std::string> common = {"--manifest", (corpus / "manifest.jsonl").string(),
                                             "--out", (tmp / "out").string(),
                                             "--min-total-commits", "0", "--min-two-year-commits", "0",
                                             "--min-committers", "0"};
    auto with = [&](std::string cmd, std::vector<std::string> extra = {}) {
        std::vector<std::string> args = {cmd};
        args.insert(args.end(), common.begin(), common.end());
        args.insert(args.end(), extra.begin(), extra.end());
        return cli_run(args);
    };
    auto run = with("pipeline");
    REQUIRE_MESSAGE(run.code == 0, run.err);
    CHECK(run.out.find("status: ") != std::string::npos);

    auto diff = fixture::compare_with_truth(corpus / "truth.json", tmp / "out");
    CHECK(diff.families.empty());
    CHECK(diff.statuses.empty());
    CHECK(diff.opportunities.empty());

    // Opportunities written to an explicit file, reading status from --in.
    auto file = tmp / "elsewhere" / "opps.jsonl";
    fs::create_directories(file.parent_path());
    auto o = cli_run({"opportunities", "--out", file.string(), "--in", (tmp / "out").string()});
    REQUIRE_MESSAGE(o.code == 0, o.err);
    CHECK(io::read_file(file) == io::read_file(tmp / "out" / files::opportunities));
    CHECK(cli_run({"opportunities", "--out", (tmp / "out").string(), "--in", "x"}).code == 1);

    auto report = with("report", {"--format", "csv"});
    CHECK(report.code == 0);

    std::ofstream(tmp / "t.py") << "x = 1  # c\n";
    auto tokens = cli_run({"tokens", (tmp / "t.py").string()});
    CHECK(tokens.code == 0);
    CHECK(tokens.out == "\"x\"\n\"=\"\n\"1\"\n");
    CHECK(cli_run({"tokens", (tmp / "t.py").string(), "--lang", "ruby"}).code == 0);
    CHECK(cli_run({"tokens", (tmp / "t.py").string(), "--lang", "cobol"}).code == 1);
    std::ofstream(tmp / "t.txt") << "x\n";
    CHECK(cli_run({"tokens", (tmp / "t.txt").string()}).code == 1);
}
