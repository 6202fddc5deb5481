#include "vqc/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace vqc {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string format_mean_std(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f±%.3f", mean, sd);
    return buf;
}

namespace {

std::vector<std::string> metric_order(const std::vector<ReportRow> &rows) {
    static const std::vector<std::string> canon = {"r2", "rmse", "mae", "accuracy",
                                                   "macro_f1"};
    std::set<std::string> present;
    for (const auto &r : rows)
        for (const auto &[k, v] : r.metrics) present.insert(k);
    std::vector<std::string> out;
    for (const auto &m : canon)
        if (present.count(m)) out.push_back(m);
    return out;
}

bool lower_is_better(const std::string &metric) {
    return metric == "rmse" || metric == "mae";
}

std::string csv_quote(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string render_markdown_table(const std::vector<ReportRow> &rows) {
    const auto metrics = metric_order(rows);
    std::string out = "| experiment | dataset | model | #params |";
    for (const auto &m : metrics) out += " " + m + " |";
    out += "\n|---|---|---|---|";
    for (std::size_t i = 0; i < metrics.size(); ++i) out += "---|";
    out += "\n";

    // best mean per metric column
    std::map<std::string, double> best;
    for (const auto &m : metrics) {
        double b = lower_is_better(m) ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
        for (const auto &r : rows) {
            const auto it = r.metrics.find(m);
            if (it == r.metrics.end()) continue;
            b = lower_is_better(m) ? std::min(b, it->second.first)
                                   : std::max(b, it->second.first);
        }
        best[m] = b;
    }

    for (const auto &r : rows) {
        out += "| " + r.experiment + " | " + r.dataset + " | " + r.architecture + " | " +
               std::to_string(r.total_params) + " |";
        for (const auto &m : metrics) {
            const auto it = r.metrics.find(m);
            if (it == r.metrics.end()) {
                out += " - |";
                continue;
            }
            std::string cell = format_mean_std(it->second.first, it->second.second);
            if (it->second.first == best[m]) cell = "**" + cell + "**";
            out += " " + cell + " |";
        }
        out += "\n";
    }
    return out;
}

std::string render_csv_table(const std::vector<ReportRow> &rows) {
    const auto metrics = metric_order(rows);
    std::string out = "experiment,dataset,model,params";
    for (const auto &m : metrics) out += "," + m + "_mean," + m + "_std";
    out += "\r\n";
    char buf[64];
    for (const auto &r : rows) {
        out += csv_quote(r.experiment) + "," + csv_quote(r.dataset) + "," +
               csv_quote(r.architecture) + "," + std::to_string(r.total_params);
        for (const auto &m : metrics) {
            const auto it = r.metrics.find(m);
            if (it == r.metrics.end()) {
                out += ",,";
                continue;
            }
            std::snprintf(buf, sizeof(buf), ",%.10g,%.10g", it->second.first,
                          it->second.second);
            out += buf;
        }
        out += "\r\n";
    }
    return out;
}

std::vector<ReportRow> collect_report_rows(const std::string &results_dir) {
    std::vector<ReportRow> rows;
    if (!fs::is_directory(results_dir)) return rows;
    std::vector<fs::path> files;
    for (const auto &entry : fs::recursive_directory_iterator(results_dir))
        if (entry.is_regular_file() && entry.path().filename() == "aggregate.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto &path : files) {
        std::ifstream in(path);
        json j;
        try {
            in >> j;
        } catch (const std::exception &) {
            std::fprintf(stderr, "warning: skipping unreadable aggregate %s\n",
                         path.c_str());
            continue;
        }
        ReportRow row;
        row.experiment = path.parent_path().filename().string();
        if (j.contains("runs") && !j["runs"].empty()) {
            const auto &r0 = j["runs"][0];
            row.dataset = r0.value("dataset", "");
            row.architecture = r0.value("architecture", "");
            if (r0.contains("param_breakdown"))
                row.total_params = r0["param_breakdown"].value("total", 0L);
            const bool classification = r0.contains("test_metrics") &&
                                        r0["test_metrics"].value("accuracy", 0.0) > 0.0 &&
                                        r0["test_metrics"].value("r2", 0.0) == 0.0;
            const auto &mm = j["metrics_mean"];
            const auto &ms = j["metrics_std"];
            const std::vector<std::string> keys =
                classification ? std::vector<std::string>{"accuracy", "macro_f1"}
                               : std::vector<std::string>{"r2", "rmse", "mae"};
            for (const auto &k : keys)
                row.metrics[k] = {mm.value(k, 0.0), ms.value(k, 0.0)};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace vqc
