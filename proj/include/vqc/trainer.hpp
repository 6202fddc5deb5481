#pragma once

#include "vqc/data.hpp"
#include "vqc/metrics.hpp"
#include "vqc/models.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vqc {

struct TrainConfig {
    int epochs = 2000;            // desk scale; the full protocol uses 10000
    double learning_rate = 0.005; // Adam, no weight decay
    double clip_norm = 1.0;
    int train_subsample = 0;      // 0 = full batch over the whole split
    int threads = 1;
    std::optional<NoiseConfig> noise; // density-matrix path when set
};

/// Everything one (config, seed) run produced. `wall_clock_seconds` is
/// deliberately excluded from the canonical JSON so identical runs produce
/// byte-identical records; it goes to a timing sidecar instead.
struct RunRecord {
    std::string dataset;
    std::string architecture;
    std::string config_text; // verbatim experiment config snapshot
    std::uint64_t seed = 0;
    int epochs_requested = 0;
    int epochs_run = 0;
    std::vector<double> train_loss; // entry e: loss used for step e+1
    std::vector<double> val_loss;   // entry e: val loss after step e (0 = init)
    int best_epoch = 0;
    double best_val_loss = 0;
    bool early_stop = false;
    int early_stop_epoch = -1;
    int train_subsample = 0;
    double noise_p_d = -1; // -1 when noiseless
    Metrics test_metrics;
    ParamBreakdown params;
    double wall_clock_seconds = 0;
};

struct Aggregate {
    std::vector<RunRecord> records;
    Metrics mean;
    Metrics stddev; // sample standard deviation (n-1)
};

/// Full-batch training with best-validation checkpointing; deterministic
/// for a fixed (config, seed) regardless of thread count.
RunRecord train(const Model &model, const ProcessedData &data, const TrainConfig &tc,
                std::uint64_t seed);

/// Run one config across seeds and aggregate metric mean +- std.
Aggregate multi_seed(const Model &model, const ProcessedData &data, const TrainConfig &tc,
                     const std::vector<std::uint64_t> &seeds);

/// Aggregate already-computed per-seed records (sample std, n-1).
Aggregate aggregate_records(std::vector<RunRecord> records);

/// Mean prediction pass with the given parameters (no gradients).
VectorXd predict(const Model &model, const MatrixXd &x, const VectorXd &params,
                 const std::optional<NoiseConfig> &noise);

double dataset_loss(const Model &model, const MatrixXd &x, const VectorXd &y,
                    const VectorXd &params, const std::optional<NoiseConfig> &noise);

nlohmann::ordered_json run_record_to_json(const RunRecord &r);
nlohmann::ordered_json aggregate_to_json(const Aggregate &a);

} // namespace vqc
