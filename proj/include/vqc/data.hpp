#pragma once

#include "vqc/common.hpp"
#include "vqc/models.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vqc {

/// One tabular benchmark after ingestion. Targets stay in original units;
/// `labels` additionally holds the raw class values for classification.
struct Dataset {
    std::string name;
    Task task = Task::Regression;
    MatrixXd features;          // n x f
    VectorXd targets;           // regression values or raw class labels
    std::vector<std::string> feature_names;
    bool ethics_flag = false;   // deprecated-dataset warning from the manifest

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index f() const { return features.cols(); }
};

/// Disjoint, exhaustive 70/15/15 partition from a seeded shuffle.
/// Sizes: train = floor(0.70 n), val = floor(0.15 n), test = remainder.
struct SplitIndices {
    std::vector<int> train, val, test;
    std::uint64_t seed = 0;
};

SplitIndices split(int n, std::uint64_t seed);

/// Standardization fitted on the training split only. For regression the
/// target is clipped to [P4, P96] of the training targets (linear
/// interpolation percentiles) before standardizing.
struct Scaler {
    VectorXd feature_mean, feature_std;
    std::vector<int> kept_columns;   // constant train columns are dropped
    double target_mean = 0, target_std = 1;
    double clip_lo = 0, clip_hi = 0; // original units
    bool has_target_scaling = false;

    VectorXd transform_features(const VectorXd &row) const;
    double transform_target(double y) const;   // clip then standardize
    double inverse_target(double y_std) const; // unscale only
};

/// Preprocessed view of one dataset: standardized features everywhere,
/// clipped+standardized regression targets, classification labels mapped to
/// contiguous indices over the training split's distinct values.
struct ProcessedData {
    MatrixXd x_train, x_val, x_test;
    VectorXd y_train, y_val, y_test;       // standardized / class indices
    VectorXd y_test_original;              // clipped original units (regression)
    std::vector<double> class_values;      // index -> raw label value
    int n_classes = 0;
    Scaler scaler;
    Task task = Task::Regression;
};

/// Linear-interpolation percentile of a sample (p in [0, 100]).
double percentile(std::vector<double> values, double p);

ProcessedData preprocess(const Dataset &dataset, const SplitIndices &idx);

/// Per-dataset manifest entry (data/MANIFEST.json). Each source carries its
/// own normalizer format since mirrors ship different shapes; for the
/// combined wine dataset the two sources are parts (red, white), not
/// mirrors.
struct ManifestSource {
    std::string url;
    std::string format; // csv | csv-semicolon | boston-statlib |
                        // boston-sklearn-csv | cal-housing-zip | wine-combined
};

struct ManifestEntry {
    std::string name;
    std::string file;
    std::vector<ManifestSource> sources;
    std::string sha256;     // empty until pinned on first fetch
    int rows = 0, cols = 0; // features + target
    std::vector<std::string> columns;
    std::string target;
    std::string task; // regression | classification
    int n_classes = 0;
    bool ethics_flag = false;
};

std::vector<ManifestEntry> load_manifest(const std::string &path);
void save_manifest(const std::string &path, const std::vector<ManifestEntry> &entries);

/// Load by dataset name. Names from the manifest resolve to CSV snapshots
/// under `data_dir` (schema- and checksum-validated); the built-in
/// deterministic `synth_reg` / `synth_cls` datasets need no files.
Dataset load_dataset(const std::string &name, const std::string &data_dir);

/// Deterministic synthetic stand-ins (no external files).
Dataset make_synth_regression();
Dataset make_synth_classification();

/// Parse an RFC-4180-style CSV with a header row. `sep` is ',' or ';'.
std::vector<std::vector<std::string>> parse_csv(const std::string &text, char sep = ',');

} // namespace vqc
