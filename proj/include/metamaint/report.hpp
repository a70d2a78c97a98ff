#pragma once

#include "metamaint/error.hpp"
#include "metamaint/io.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metamaint::report {

class UnsupportedFormat : public Error {
public:
    using Error::Error;
};

enum class Format { jsonl, csv, markdown };

/// "jsonl", "csv", "markdown" (or "md"). Throws UnsupportedFormat.
Format parse_format(std::string_view s);

/// Rows x strata (common, sometimes, rare) counts.
struct Table {
    std::string key;   // machine name
    std::string title;
    std::string row_header;
    std::vector<std::string> rows;
    std::vector<std::vector<std::size_t>> counts; // [row][stratum column]
    bool percentages = true; // per-column shares

    std::size_t column_total(std::size_t col) const;
};

struct MetricsRow {
    std::string stratum;
    double retention = 0;
    double uniqueness = 0;
};

struct OpportunitySummary {
    std::size_t families = 0;
    std::size_t unique_fix_commits = 0;
    std::size_t substring_only = 0;
};

struct ReportData {
    Table statuses; // variant statuses x strata
    Table types;    // family types x strata
    Table survivors; // non-zero-variance families and their variants
    std::optional<std::vector<MetricsRow>> metric_medians;
    std::optional<OpportunitySummary> opportunities;
};

inline constexpr const char* kColumns[] = {"common", "sometimes", "rare"};

/// Status counts include every variant except those merged away as
/// identical repositories. Survivor variants are maintained variants left
/// after both dedupe passes.
ReportData tabulate(std::span<const io::StatusRecord> records);

/// Median retention and uniqueness per stratum from metrics CSV text.
std::vector<MetricsRow> metric_medians(std::string_view metrics_csv);

/// Percent of `count` in `total` with one decimal; "0.0" when total is 0.
std::string percent(std::size_t count, std::size_t total);

std::string render_markdown(const ReportData& data);
std::string render_csv(const ReportData& data);
std::string render_jsonl(const ReportData& data);

/// Writes report.md / report.csv / report.jsonl for the requested formats.
std::vector<std::filesystem::path> emit_report(const ReportData& data, std::span<const Format> formats,
                                               const std::filesystem::path& out_dir);

} // namespace metamaint::report
