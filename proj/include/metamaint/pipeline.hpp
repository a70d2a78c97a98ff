#pragma once

#include "metamaint/corpus.hpp"
#include "metamaint/error.hpp"
#include "metamaint/family.hpp"
#include "metamaint/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

// Stage drivers. Each stage reads only the files written by the stages it
// depends on and writes its own outputs atomically into the output
// directory, so any suffix of the pipeline can be rerun on its own.
namespace metamaint::pipeline {

namespace files {
inline constexpr const char* repos = "repos.jsonl";
inline constexpr const char* blobs = "blobs.jsonl";
inline constexpr const char* families = "families.jsonl";
inline constexpr const char* sample = "sample.jsonl";
inline constexpr const char* status = "status.jsonl";
inline constexpr const char* metrics = "metrics.csv";
inline constexpr const char* histogram = "size_histogram.csv";
inline constexpr const char* opportunities = "opportunities.jsonl";
inline constexpr const char* report_md = "report.md";
inline constexpr const char* report_csv = "report.csv";
inline constexpr const char* report_jsonl = "report.jsonl";
} // namespace files

enum class MetricsScope {
    non_zero, // non_zero_variance families, maintained variants after both dedupes
    all,      // every family, every surviving variant that still has the file
};

inline constexpr gitio::Timestamp kDefaultReferenceDate = 1546300800; // 2019-01-01

struct PipelineConfig {
    std::filesystem::path manifest;
    std::filesystem::path out_dir = ".";
    gitio::Timestamp reference_date = kDefaultReferenceDate;
    int dormancy_days = family::kDefaultDormancyDays;
    family::StrataThresholds strata;
    family::SampleSpec sample; // carries rng_seed
    corpus::FilterCriteria filters;
    std::vector<std::string> keywords = {"fix"};
    std::size_t max_unique = 2;
    std::size_t min_family_size = 2;
    unsigned jobs = 1;
    bool use_sample = false;
    std::size_t index_shard_limit = 20'000'000; // occurrences held in memory at once
    MetricsScope metrics_scope = MetricsScope::non_zero;
    std::vector<report::Format> report_formats = {report::Format::markdown, report::Format::csv, report::Format::jsonl};
    std::optional<std::filesystem::path> opportunities_out; // default: out_dir/opportunities.jsonl

    /// Throws metamaint::Error on inconsistent settings.
    void validate() const;
    std::filesystem::path path(const char* name) const { return out_dir / name; }
};

struct StageSummary {
    std::string stage;
    std::size_t records = 0;
    std::vector<std::string> warnings;
};

/// Manifest -> repos.jsonl, blobs.jsonl.
StageSummary scan(const PipelineConfig& cfg);
/// blobs.jsonl -> families.jsonl.
StageSummary families(const PipelineConfig& cfg);
/// families.jsonl -> sample.jsonl.
StageSummary sample(const PipelineConfig& cfg);
/// repos.jsonl, families.jsonl (+ sample.jsonl with use_sample) -> status.jsonl.
StageSummary status(const PipelineConfig& cfg);
/// repos.jsonl, status.jsonl -> metrics.csv, size_histogram.csv.
StageSummary metrics(const PipelineConfig& cfg);
/// status.jsonl -> opportunities.jsonl.
StageSummary opportunities(const PipelineConfig& cfg);
/// status.jsonl (+ opportunities.jsonl, metrics.csv if present) -> report.*
StageSummary report(const PipelineConfig& cfg);

/// Every stage in order; sample only with use_sample.
std::vector<StageSummary> run_all(const PipelineConfig& cfg);

} // namespace metamaint::pipeline
