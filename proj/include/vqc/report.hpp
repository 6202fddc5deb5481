#pragma once

#include "vqc/common.hpp"

#include <map>
#include <string>
#include <vector>

namespace vqc {

struct ReportRow {
    std::string experiment;
    std::string dataset;
    std::string architecture;
    long total_params = 0;
    // metric name -> (mean, std)
    std::map<std::string, std::pair<double, double>> metrics;
};

/// "0.833±0.058" formatting used in tables.
std::string format_mean_std(double mean, double sd);

/// Markdown table, one row per aggregate, best mean per metric column in
/// bold (max for r2/accuracy/macro_f1, min for rmse/mae).
std::string render_markdown_table(const std::vector<ReportRow> &rows);

/// RFC-4180 CSV with a header row.
std::string render_csv_table(const std::vector<ReportRow> &rows);

/// Collect rows from `<dir>/<experiment>/aggregate.json` files.
std::vector<ReportRow> collect_report_rows(const std::string &results_dir);

} // namespace vqc
