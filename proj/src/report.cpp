#include "metamaint/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace metamaint::report {

using family::Stratum;

Format parse_format(std::string_view s)
{
    if (s == "jsonl")
        return Format::jsonl;
    if (s == "csv")
        return Format::csv;
    if (s == "markdown" || s == "md")
        return Format::markdown;
    throw UnsupportedFormat("unsupported report format '" + std::string(s) + "' (jsonl, csv, markdown)");
}

std::size_t Table::column_total(std::size_t col) const
{
    std::size_t total = 0;
    for (const auto& row : counts)
        total += row[col];
    return total;
}

namespace {

std::size_t column_of(Stratum s)
{
    switch (s) {
    case Stratum::common: return 0;
    case Stratum::sometimes: return 1;
    case Stratum::rare: return 2;
    }
    return 2;
}

constexpr std::size_t kNumColumns = 3;

Table make_table(std::string key, std::string title, std::string row_header, std::vector<std::string> rows,
                 bool percentages)
{
    Table t;
    t.key = std::move(key);
    t.title = std::move(title);
    t.row_header = std::move(row_header);
    t.rows = std::move(rows);
    t.counts.assign(t.rows.size(), std::vector<std::size_t>(kNumColumns, 0));
    t.percentages = percentages;
    return t;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

} // namespace

std::string percent(std::size_t count, std::size_t total)
{
    if (total == 0)
        return "0.0";
    return io::format_fixed(100.0 * static_cast<double>(count) / static_cast<double>(total), 1);
}

ReportData tabulate(std::span<const io::StatusRecord> records)
{
    std::vector<std::string> status_rows, type_rows;
    for (auto s : family::kStatuses)
        status_rows.emplace_back(family::to_string(s));
    for (auto t : family::kFamilyTypes)
        type_rows.emplace_back(family::to_string(t));

    ReportData d;
    d.statuses = make_table("variant_status", "Variant statuses", "status", status_rows, true);
    d.types = make_table("family_type", "Family types", "type", type_rows, true);
    d.survivors = make_table("non_zero_variance", "Non-zero-variance families", "count",
                             {"families", "maintained_variants"}, false);

    for (const auto& r : records) {
        const std::size_t col = column_of(r.family.stratum);
        for (std::size_t i = 0; i < r.family.variants.size(); ++i)
            if (r.dropped[i] != io::DropReason::identical_repo)
                ++d.statuses.counts[static_cast<std::size_t>(r.family.variants[i].status)][col];
        if (r.family.family_type)
            ++d.types.counts[static_cast<std::size_t>(*r.family.family_type)][col];
        if (r.family.family_type == family::FamilyType::non_zero_variance) {
            ++d.survivors.counts[0][col];
            for (const auto& v : r.deduplicated().variants)
                if (v.status == family::VariantStatus::maintained)
                    ++d.survivors.counts[1][col];
        }
    }
    return d;
}

std::vector<MetricsRow> metric_medians(std::string_view csv)
{
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_stratum;
    std::istringstream in{std::string(csv)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty())
            continue;
        auto cells = split_csv_line(line);
        if (cells.size() < 6)
            throw Error("malformed metrics row: " + line);
        auto& slot = by_stratum[std::string(cells[1])];
        slot.first.push_back(std::stod(std::string(cells[3])));
        slot.second.push_back(std::stod(std::string(cells[4])));
    }
    std::vector<MetricsRow> rows;
    for (const char* s : kColumns) {
        auto it = by_stratum.find(s);
        if (it == by_stratum.end())
            continue;
        rows.push_back({s, median(it->second.first), median(it->second.second)});
    }
    return rows;
}

namespace {

void markdown_table(std::ostringstream& out, const Table& t)
{
    out << "## " << t.title << "\n\n";
    out << "| " << t.row_header;
    for (const char* c : kColumns)
        out << " | " << c;
    out << " | total |\n|---";
    for (std::size_t i = 0; i <= kNumColumns; ++i)
        out << "|---:";
    out << "|\n";

    std::size_t grand = 0;
    std::vector<std::size_t> totals(kNumColumns);
    for (std::size_t c = 0; c < kNumColumns; ++c) {
        totals[c] = t.column_total(c);
        grand += totals[c];
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out << "| " << t.rows[r];
        std::size_t row_total = 0;
        for (std::size_t c = 0; c < kNumColumns; ++c) {
            row_total += t.counts[r][c];
            out << " | " << t.counts[r][c];
            if (t.percentages)
                out << " (" << percent(t.counts[r][c], totals[c]) << "%)";
        }
        out << " | " << row_total;
        if (t.percentages)
            out << " (" << percent(row_total, grand) << "%)";
        out << " |\n";
    }
    if (t.percentages) {
        out << "| **sum**";
        for (std::size_t c = 0; c < kNumColumns; ++c)
            out << " | " << totals[c] << " (" << (totals[c] ? "100.0" : "0.0") << "%)";
        out << " | " << grand << " (" << (grand ? "100.0" : "0.0") << "%) |\n";
    }
    out << "\n";
}

} // namespace

std::string render_markdown(const ReportData& d)
{
    std::ostringstream out;
    out << "# Seed family report\n\n";
    markdown_table(out, d.statuses);
    markdown_table(out, d.types);
    markdown_table(out, d.survivors);

    if (d.metric_medians) {
        out << "## Median similarity (non-zero-variance families)\n\n";
        out << "| stratum | retention | uniqueness |\n|---|---:|---:|\n";
        for (const auto& m : *d.metric_medians)
            out << "| " << m.stratum << " | " << io::format_fixed(m.retention, 3) << " | "
                << io::format_fixed(m.uniqueness, 3) << " |\n";
        out << "\n";
    }
    if (d.opportunities) {
        out << "## Propagation candidates\n\n";
        out << "- families: " << d.opportunities->families << "\n";
        out << "- unique fix commits: " << d.opportunities->unique_fix_commits << "\n";
        out << "- keyword matched only inside a longer word: " << d.opportunities->substring_only << "\n\n";
    }

    out << "## Notes\n\n"
        << "- Statuses and commit histories use the first-parent history of each repository's main branch.\n"
        << "- Renamed or moved files are not followed; a renamed variant counts as inactive.\n"
        << "- A variant whose file was edited and later restored to the seed counts as unchanged.\n"
        << "- Repositories with identical main-branch heads are merged into the lowest repository id "
           "before counting.\n"
        << "- Commit identity across repositories is `git patch-id --stable` over the per-path diff.\n"
        << "- Percentages are per stratum column and may not sum to exactly 100 due to rounding.\n";
    return out.str();
}

std::string render_csv(const ReportData& d)
{
    std::ostringstream out;
    out << "table,row,stratum,count,percent\n";
    for (const Table* t : {&d.statuses, &d.types, &d.survivors}) {
        for (std::size_t r = 0; r < t->rows.size(); ++r)
            for (std::size_t c = 0; c < kNumColumns; ++c) {
                out << t->key << ',' << t->rows[r] << ',' << kColumns[c] << ',' << t->counts[r][c] << ',';
                if (t->percentages)
                    out << percent(t->counts[r][c], t->column_total(c));
                out << '\n';
            }
    }
    return out.str();
}

std::string render_jsonl(const ReportData& d)
{
    std::string out;
    for (const Table* t : {&d.statuses, &d.types, &d.survivors}) {
        io::Json rows = io::Json::array();
        for (std::size_t r = 0; r < t->rows.size(); ++r) {
            io::Json row{{"row", t->rows[r]}};
            for (std::size_t c = 0; c < kNumColumns; ++c)
                row[kColumns[c]] = t->counts[r][c];
            rows.push_back(std::move(row));
        }
        out += io::dump_line(
            io::Json{{"schema", io::kReportSchema}, {"table", t->key}, {"title", t->title}, {"rows", std::move(rows)}});
    }
    if (d.metric_medians) {
        io::Json rows = io::Json::array();
        for (const auto& m : *d.metric_medians)
            rows.push_back({{"stratum", m.stratum}, {"retention", m.retention}, {"uniqueness", m.uniqueness}});
        out += io::dump_line(io::Json{{"schema", io::kReportSchema}, {"table", "metric_medians"}, {"rows", rows}});
    }
    if (d.opportunities) {
        out += io::dump_line(io::Json{{"schema", io::kReportSchema},
                                      {"table", "opportunities"},
                                      {"families", d.opportunities->families},
                                      {"unique_fix_commits", d.opportunities->unique_fix_commits},
                                      {"substring_only", d.opportunities->substring_only}});
    }
    return out;
}

std::vector<std::filesystem::path> emit_report(const ReportData& data, std::span<const Format> formats,
                                               const std::filesystem::path& out_dir)
{
    std::vector<std::filesystem::path> written;
    for (auto f : formats) {
        std::filesystem::path p;
        switch (f) {
        case Format::markdown:
            p = out_dir / "report.md";
            io::atomic_write(p, render_markdown(data));
            break;
        case Format::csv:
            p = out_dir / "report.csv";
            io::atomic_write(p, render_csv(data));
            break;
        case Format::jsonl:
            p = out_dir / "report.jsonl";
            io::atomic_write(p, render_jsonl(data));
            break;
        }
        written.push_back(p);
    }
    return written;
}

} // namespace metamaint::report
