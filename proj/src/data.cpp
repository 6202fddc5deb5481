#include "vqc/data.hpp"

#include "vqc/rng.hpp"
#include "vqc/sha256.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace vqc {

using json = nlohmann::ordered_json;

SplitIndices split(int n, std::uint64_t seed) {
    if (n < 10) throw ConfigError("split: need at least 10 rows");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(seed);
    // Fisher-Yates with the counter rng
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[int(rng.next_below(std::uint64_t(i) + 1))]);
    const int n_train = int(std::floor(0.70 * n));
    const int n_val = int(std::floor(0.15 * n));
    SplitIndices s;
    s.seed = seed;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    return s;
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw ConfigError("percentile: empty sample");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * double(values.size() - 1);
    const std::size_t lo = std::size_t(std::floor(rank));
    const std::size_t hi = std::size_t(std::ceil(rank));
    const double w = rank - double(lo);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

VectorXd Scaler::transform_features(const VectorXd &row) const {
    VectorXd out(Eigen::Index(kept_columns.size()));
    for (std::size_t i = 0; i < kept_columns.size(); ++i)
        out[Eigen::Index(i)] =
            (row[kept_columns[i]] - feature_mean[Eigen::Index(i)]) / feature_std[Eigen::Index(i)];
    return out;
}

double Scaler::transform_target(double y) const {
    const double c = std::clamp(y, clip_lo, clip_hi);
    return (c - target_mean) / target_std;
}

double Scaler::inverse_target(double y_std) const { return y_std * target_std + target_mean; }

ProcessedData preprocess(const Dataset &dataset, const SplitIndices &idx) {
    ProcessedData out;
    out.task = dataset.task;
    Scaler &sc = out.scaler;

    // feature statistics from the training split only
    const int f = int(dataset.f());
    VectorXd mean = VectorXd::Zero(f), var = VectorXd::Zero(f);
    for (int r : idx.train) mean += dataset.features.row(r).transpose();
    mean /= double(idx.train.size());
    for (int r : idx.train) {
        const VectorXd d = dataset.features.row(r).transpose() - mean;
        var += d.cwiseProduct(d);
    }
    var /= double(idx.train.size());
    for (int c = 0; c < f; ++c) {
        const double sd = std::sqrt(var[c]);
        if (sd > 0) {
            sc.kept_columns.push_back(c);
        } else {
            std::fprintf(stderr, "warning: dropping constant feature column %d of %s\n", c,
                         dataset.name.c_str());
        }
    }
    sc.feature_mean.resize(Eigen::Index(sc.kept_columns.size()));
    sc.feature_std.resize(Eigen::Index(sc.kept_columns.size()));
    for (std::size_t i = 0; i < sc.kept_columns.size(); ++i) {
        sc.feature_mean[Eigen::Index(i)] = mean[sc.kept_columns[i]];
        sc.feature_std[Eigen::Index(i)] = std::sqrt(var[sc.kept_columns[i]]);
    }

    if (dataset.task == Task::Regression) {
        // clip bounds from training targets, before standardization
        std::vector<double> train_targets;
        train_targets.reserve(idx.train.size());
        for (int r : idx.train) train_targets.push_back(dataset.targets[r]);
        sc.clip_lo = percentile(train_targets, 4.0);
        sc.clip_hi = percentile(train_targets, 96.0);
        double tm = 0, tv = 0;
        for (double &y : train_targets) {
            y = std::clamp(y, sc.clip_lo, sc.clip_hi);
            tm += y;
        }
        tm /= double(train_targets.size());
        for (double y : train_targets) tv += (y - tm) * (y - tm);
        tv /= double(train_targets.size());
        sc.target_mean = tm;
        sc.target_std = tv > 0 ? std::sqrt(tv) : 1.0;
        sc.has_target_scaling = true;
    } else {
        // contiguous class indices over labels seen in training data
        std::vector<double> seen;
        for (int r : idx.train) {
            const double v = dataset.targets[r];
            if (std::find(seen.begin(), seen.end(), v) == seen.end()) seen.push_back(v);
        }
        std::sort(seen.begin(), seen.end());
        out.class_values = seen;
        out.n_classes = int(seen.size());
    }

    auto fill = [&](const std::vector<int> &rows, MatrixXd &xm, VectorXd &yv) {
        xm.resize(Eigen::Index(rows.size()), Eigen::Index(sc.kept_columns.size()));
        yv.resize(Eigen::Index(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            xm.row(Eigen::Index(i)) =
                sc.transform_features(dataset.features.row(rows[i]).transpose()).transpose();
            const double y = dataset.targets[rows[i]];
            if (dataset.task == Task::Regression) {
                yv[Eigen::Index(i)] = sc.transform_target(y);
            } else {
                const auto it =
                    std::find(out.class_values.begin(), out.class_values.end(), y);
                // labels unseen in training map to an extra truth-only bucket
                yv[Eigen::Index(i)] =
                    it == out.class_values.end()
                        ? double(out.n_classes)
                        : double(std::distance(out.class_values.begin(), it));
            }
        }
    };
    fill(idx.train, out.x_train, out.y_train);
    fill(idx.val, out.x_val, out.y_val);
    fill(idx.test, out.x_test, out.y_test);

    if (dataset.task == Task::Regression) {
        out.y_test_original.resize(Eigen::Index(idx.test.size()));
        for (std::size_t i = 0; i < idx.test.size(); ++i)
            out.y_test_original[Eigen::Index(i)] =
                std::clamp(dataset.targets[idx.test[i]], sc.clip_lo, sc.clip_hi);
    }
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string &text, char sep) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(row);
        row.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == sep) {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else if (c != '\r') {
            field += c;
        }
    }
    if (!field.empty() || !row.empty()) end_row();
    return rows;
}

std::vector<ManifestEntry> load_manifest(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception &e) {
        throw DataError("manifest parse error in " + path + ": " + e.what());
    }
    std::vector<ManifestEntry> out;
    for (const auto &e : j.at("datasets")) {
        ManifestEntry m;
        m.name = e.at("name").get<std::string>();
        m.file = e.at("file").get<std::string>();
        for (const auto &u : e.at("sources"))
            m.sources.push_back({u.at("url").get<std::string>(),
                                 u.at("format").get<std::string>()});
        m.sha256 = e.value("sha256", std::string());
        m.rows = e.at("rows").get<int>();
        m.cols = e.at("cols").get<int>();
        for (const auto &c : e.at("columns")) m.columns.push_back(c.get<std::string>());
        m.target = e.at("target").get<std::string>();
        m.task = e.at("task").get<std::string>();
        m.n_classes = e.value("n_classes", 0);
        m.ethics_flag = e.value("ethics_flag", false);
        out.push_back(std::move(m));
    }
    return out;
}

void save_manifest(const std::string &path, const std::vector<ManifestEntry> &entries) {
    json j;
    j["datasets"] = json::array();
    for (const auto &m : entries) {
        json e;
        e["name"] = m.name;
        e["file"] = m.file;
        e["sources"] = json::array();
        for (const auto &s : m.sources) {
            json src;
            src["url"] = s.url;
            src["format"] = s.format;
            e["sources"].push_back(src);
        }
        e["sha256"] = m.sha256;
        e["rows"] = m.rows;
        e["cols"] = m.cols;
        e["columns"] = m.columns;
        e["target"] = m.target;
        e["task"] = m.task;
        e["n_classes"] = m.n_classes;
        e["ethics_flag"] = m.ethics_flag;
        j["datasets"].push_back(e);
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << j.dump(2) << "\n";
}

namespace {

Dataset load_csv_dataset(const ManifestEntry &m, const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("dataset snapshot missing: " + path +
                             " (run `vqcbench fetch-data` to download it)");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    if (!m.sha256.empty()) {
        const std::string got = sha256_hex(text);
        if (got != m.sha256)
            throw DataError("checksum mismatch for " + m.name + ": manifest " + m.sha256 +
                            ", file " + got);
    }

    const auto rows = parse_csv(text, ',');
    if (rows.empty()) throw DataError("empty dataset file: " + path);
    if (rows[0].size() != m.columns.size())
        throw DataError("column count mismatch in " + m.name + ": expected " +
                        std::to_string(m.columns.size()) + ", found " +
                        std::to_string(rows[0].size()));
    for (std::size_t c = 0; c < m.columns.size(); ++c)
        if (rows[0][c] != m.columns[c])
            throw DataError("column " + std::to_string(c) + " of " + m.name + " is '" +
                            rows[0][c] + "', expected '" + m.columns[c] + "'");
    const int n = int(rows.size()) - 1;
    if (n != m.rows)
        throw DataError("row count mismatch in " + m.name + ": expected " +
                        std::to_string(m.rows) + ", found " + std::to_string(n));

    Dataset d;
    d.name = m.name;
    d.task = m.task == "classification" ? Task::Classification : Task::Regression;
    d.ethics_flag = m.ethics_flag;
    const int f = int(m.columns.size()) - 1; // target is the last column
    d.features.resize(n, f);
    d.targets.resize(n);
    d.feature_names.assign(m.columns.begin(), m.columns.end() - 1);
    for (int r = 0; r < n; ++r) {
        const auto &cells = rows[std::size_t(r) + 1];
        if (int(cells.size()) != f + 1)
            throw DataError("ragged row " + std::to_string(r + 1) + " in " + m.name);
        for (int c = 0; c <= f; ++c) {
            double v;
            try {
                v = std::stod(cells[std::size_t(c)]);
            } catch (const std::exception &) {
                throw DataError("non-numeric value '" + cells[std::size_t(c)] + "' at row " +
                                std::to_string(r + 1) + ", column '" +
                                m.columns[std::size_t(c)] + "' of " + m.name);
            }
            if (c < f)
                d.features(r, c) = v;
            else
                d.targets[r] = v;
        }
    }
    return d;
}

} // namespace

Dataset make_synth_regression() {
    // 506 x 13, a fixed smooth nonlinear response with light noise; shaped
    // like the smallest benchmark so T = 5 presets apply unchanged
    const int n = 506, f = 13;
    Dataset d;
    d.name = "synth_reg";
    d.task = Task::Regression;
    d.features.resize(n, f);
    d.targets.resize(n);
    for (int c = 0; c < f; ++c) d.feature_names.push_back("x" + std::to_string(c));
    CounterRng rng(0xC0FFEEULL);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < f; ++c) d.features(r, c) = rng.normal();
        const auto x = d.features.row(r);
        double y = 3.0 * std::sin(x[0]) + 2.0 * x[1] * x[2] - 1.5 * x[3] +
                   0.8 * std::cos(x[4] + x[5]) + 0.5 * x[6] * x[6] - 0.7 * x[7] +
                   0.3 * x[8] * x[9] + 0.2 * (x[10] + x[11] - x[12]);
        d.targets[r] = 20.0 + 4.0 * y + 0.5 * rng.normal();
    }
    return d;
}

Dataset make_synth_classification() {
    // 600 x 11, five ordinal classes from a thresholded nonlinear score
    const int n = 600, f = 11;
    Dataset d;
    d.name = "synth_cls";
    d.task = Task::Classification;
    d.features.resize(n, f);
    d.targets.resize(n);
    for (int c = 0; c < f; ++c) d.feature_names.push_back("x" + std::to_string(c));
    CounterRng rng(0xBEEFULL);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < f; ++c) d.features(r, c) = rng.normal();
        const auto x = d.features.row(r);
        const double s =
            std::tanh(x[0] + 0.5 * x[1] * x[2]) + 0.8 * std::sin(x[3]) - 0.6 * x[4] +
            0.4 * x[5] * x[6] + 0.3 * rng.normal();
        int cls = 5;
        if (s < -1.2) cls = 3;
        else if (s < -0.4) cls = 4;
        else if (s < 0.4) cls = 5;
        else if (s < 1.2) cls = 6;
        else cls = 7;
        d.targets[r] = double(cls);
    }
    return d;
}

Dataset load_dataset(const std::string &name, const std::string &data_dir) {
    if (name == "synth_reg") return make_synth_regression();
    if (name == "synth_cls") return make_synth_classification();
    const std::string manifest_path = data_dir + "/MANIFEST.json";
    for (const ManifestEntry &m : load_manifest(manifest_path)) {
        if (m.name != name) continue;
        Dataset d = load_csv_dataset(m, data_dir + "/" + m.file);
        if (d.ethics_flag)
            std::fprintf(stderr,
                         "note: dataset '%s' is deprecated upstream for ethical concerns; "
                         "used for comparability only\n",
                         name.c_str());
        return d;
    }
    throw ConfigError("unknown dataset '" + name + "' (not in " + manifest_path + ")");
}

} // namespace vqc
