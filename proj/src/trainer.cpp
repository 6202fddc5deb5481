#include "vqc/trainer.hpp"

#include "vqc/optim.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace vqc {

namespace {

constexpr int kChunk = 32; // fixed accumulation granularity, thread-invariant

struct BatchResult {
    double loss = 0;
    VectorXd grad;
};

int sample_loss_node(const Model &model, Tape &tape, const VectorXd &x, double y, Task task) {
    const int out = model.forward(tape, x);
    if (task == Task::Regression) return tape.mse_loss(out, VectorXd::Constant(1, y));
    return tape.cross_entropy_loss(out, int(std::lround(y)));
}

/// Mean loss (and gradient) over rows [begin, end); sequential within the
/// chunk so results do not depend on scheduling.
BatchResult chunk_pass(const Model &model, const MatrixXd &x, const VectorXd &y,
                       const VectorXd &params, const TrainConfig &tc, int begin, int end,
                       double inv_n, bool with_grad) {
    BatchResult r;
    r.grad = with_grad ? VectorXd::Zero(params.size()) : VectorXd();
    for (int i = begin; i < end; ++i) {
        Tape tape(params, with_grad, tc.noise);
        const int loss = sample_loss_node(model, tape, x.row(i).transpose(), y[i],
                                          model.config().task);
        r.loss += tape.value(loss)[0] * inv_n;
        if (with_grad) tape.backward(loss, r.grad, inv_n);
    }
    return r;
}

BatchResult batch_pass(const Model &model, const MatrixXd &x, const VectorXd &y,
                       const VectorXd &params, const TrainConfig &tc, bool with_grad) {
    const int n = int(x.rows());
    const double inv_n = 1.0 / double(n);
    const int n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<BatchResult> partial(n_chunks);

    const int workers = std::max(1, tc.threads);
    if (workers == 1 || n_chunks == 1) {
        for (int c = 0; c < n_chunks; ++c)
            partial[c] = chunk_pass(model, x, y, params, tc, c * kChunk,
                                    std::min(n, (c + 1) * kChunk), inv_n, with_grad);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < std::min(workers, n_chunks); ++w)
            pool.emplace_back([&]() {
                int c;
                while ((c = next.fetch_add(1)) < n_chunks)
                    partial[c] = chunk_pass(model, x, y, params, tc, c * kChunk,
                                            std::min(n, (c + 1) * kChunk), inv_n, with_grad);
            });
        for (auto &t : pool) t.join();
    }

    BatchResult total;
    total.grad = with_grad ? VectorXd::Zero(params.size()) : VectorXd();
    for (const BatchResult &p : partial) { // fixed chunk order: reproducible sums
        total.loss += p.loss;
        if (with_grad) total.grad += p.grad;
    }
    return total;
}

Metrics test_metrics_from(const Model &model, const ProcessedData &data,
                          const VectorXd &params, const TrainConfig &tc) {
    if (model.config().task == Task::Regression) {
        VectorXd preds = predict(model, data.x_test, params, tc.noise);
        for (Eigen::Index i = 0; i < preds.size(); ++i)
            preds[i] = data.scaler.inverse_target(preds[i]);
        return evaluate_metrics(preds, data.y_test_original, Task::Regression);
    }
    VectorXd preds(data.x_test.rows());
    for (Eigen::Index i = 0; i < data.x_test.rows(); ++i) {
        Tape tape(params, false, tc.noise);
        const int out = model.forward(tape, data.x_test.row(i).transpose());
        Eigen::Index argmax;
        tape.value(out).maxCoeff(&argmax);
        preds[i] = double(argmax);
    }
    return evaluate_metrics(preds, data.y_test, Task::Classification);
}

} // namespace

VectorXd predict(const Model &model, const MatrixXd &x, const VectorXd &params,
                 const std::optional<NoiseConfig> &noise) {
    VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Tape tape(params, false, noise);
        const int node = model.forward(tape, x.row(i).transpose());
        out[i] = tape.value(node)[0];
    }
    return out;
}

double dataset_loss(const Model &model, const MatrixXd &x, const VectorXd &y,
                    const VectorXd &params, const std::optional<NoiseConfig> &noise) {
    double acc = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Tape tape(params, false, noise);
        const int loss =
            sample_loss_node(model, tape, x.row(i).transpose(), y[i], model.config().task);
        acc += tape.value(loss)[0];
    }
    return acc / double(x.rows());
}

RunRecord train(const Model &model, const ProcessedData &data, const TrainConfig &tc,
                std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.architecture = arch_to_string(model.config().architecture);
    rec.seed = seed;
    rec.epochs_requested = tc.epochs;
    rec.train_subsample = tc.train_subsample;
    rec.noise_p_d = tc.noise ? tc.noise->p_d : -1.0;
    rec.params = model.breakdown();

    MatrixXd x_train = data.x_train;
    VectorXd y_train = data.y_train;
    if (tc.train_subsample > 0 && tc.train_subsample < x_train.rows()) {
        x_train = data.x_train.topRows(tc.train_subsample);
        y_train = data.y_train.head(tc.train_subsample);
    }

    VectorXd params = model.init_params(seed);
    AdamState adam(params.size(), tc.learning_rate);

    // epoch 0: validation loss of the initialized parameters
    double val0 = dataset_loss(model, data.x_val, data.y_val, params, tc.noise);
    rec.val_loss.push_back(val0);
    VectorXd best_params = params;
    rec.best_epoch = 0;
    rec.best_val_loss = val0;
    if (!std::isfinite(val0)) {
        rec.early_stop = true;
        rec.early_stop_epoch = 0;
    }

    for (int epoch = 1; epoch <= tc.epochs && !rec.early_stop; ++epoch) {
        BatchResult batch = batch_pass(model, x_train, y_train, params, tc, true);
        rec.train_loss.push_back(batch.loss);
        if (!std::isfinite(batch.loss) || !batch.grad.allFinite()) {
            rec.early_stop = true;
            rec.early_stop_epoch = epoch;
            rec.epochs_run = epoch;
            break;
        }
        clip_global_norm(batch.grad, tc.clip_norm);
        adam_step(params, batch.grad, adam);

        const double val = dataset_loss(model, data.x_val, data.y_val, params, tc.noise);
        rec.val_loss.push_back(val);
        if (!std::isfinite(val)) {
            rec.early_stop = true;
            rec.early_stop_epoch = epoch;
            rec.epochs_run = epoch;
            break;
        }
        if (val < rec.best_val_loss) {
            rec.best_val_loss = val;
            rec.best_epoch = epoch;
            best_params = params;
        }
        rec.epochs_run = epoch;
    }

    rec.test_metrics = test_metrics_from(model, data, best_params, tc);
    rec.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

Aggregate aggregate_records(std::vector<RunRecord> records) {
    Aggregate agg;
    agg.records = std::move(records);
    auto collect = [&](auto field) {
        VectorXd v(Eigen::Index(agg.records.size()));
        for (std::size_t i = 0; i < agg.records.size(); ++i)
            v[Eigen::Index(i)] = field(agg.records[i].test_metrics);
        return v;
    };
    auto mean_std = [](const VectorXd &v, double &mean, double &sd) {
        mean = v.size() > 0 ? v.mean() : 0.0;
        sd = v.size() > 1
                 ? std::sqrt((v.array() - mean).square().sum() / double(v.size() - 1))
                 : 0.0;
    };
    mean_std(collect([](const Metrics &m) { return m.r2; }), agg.mean.r2, agg.stddev.r2);
    mean_std(collect([](const Metrics &m) { return m.rmse; }), agg.mean.rmse, agg.stddev.rmse);
    mean_std(collect([](const Metrics &m) { return m.mae; }), agg.mean.mae, agg.stddev.mae);
    mean_std(collect([](const Metrics &m) { return m.accuracy; }), agg.mean.accuracy,
             agg.stddev.accuracy);
    mean_std(collect([](const Metrics &m) { return m.macro_f1; }), agg.mean.macro_f1,
             agg.stddev.macro_f1);
    return agg;
}

Aggregate multi_seed(const Model &model, const ProcessedData &data, const TrainConfig &tc,
                     const std::vector<std::uint64_t> &seeds) {
    if (seeds.size() < 2) throw ConfigError("multi_seed: need at least 2 seeds");
    std::vector<RunRecord> records;
    for (std::uint64_t s : seeds) records.push_back(train(model, data, tc, s));
    return aggregate_records(std::move(records));
}

nlohmann::ordered_json run_record_to_json(const RunRecord &r) {
    nlohmann::ordered_json j;
    j["schema"] = "vqcbench.run/1";
    j["dataset"] = r.dataset;
    j["architecture"] = r.architecture;
    j["config"] = r.config_text;
    j["seed"] = r.seed;
    j["epochs_requested"] = r.epochs_requested;
    j["epochs_run"] = r.epochs_run;
    j["train_subsample"] = r.train_subsample;
    j["noise_p_d"] = r.noise_p_d;
    j["train_loss"] = r.train_loss;
    j["val_loss"] = r.val_loss;
    j["best_epoch"] = r.best_epoch;
    j["best_val_loss"] = r.best_val_loss;
    j["early_stop"] = r.early_stop;
    j["early_stop_epoch"] = r.early_stop_epoch;
    nlohmann::ordered_json m;
    m["r2"] = r.test_metrics.r2;
    m["rmse"] = r.test_metrics.rmse;
    m["mae"] = r.test_metrics.mae;
    m["accuracy"] = r.test_metrics.accuracy;
    m["macro_f1"] = r.test_metrics.macro_f1;
    j["test_metrics"] = m;
    nlohmann::ordered_json p;
    p["vqc"] = r.params.vqc_params;
    p["attention"] = r.params.attention_params;
    p["ln_proj"] = r.params.ln_proj_params;
    p["total"] = r.params.total;
    j["param_breakdown"] = p;
    return j;
}

nlohmann::ordered_json aggregate_to_json(const Aggregate &a) {
    nlohmann::ordered_json j;
    j["schema"] = "vqcbench.aggregate/1";
    j["n_seeds"] = a.records.size();
    auto metrics_json = [](const Metrics &m) {
        nlohmann::ordered_json x;
        x["r2"] = m.r2;
        x["rmse"] = m.rmse;
        x["mae"] = m.mae;
        x["accuracy"] = m.accuracy;
        x["macro_f1"] = m.macro_f1;
        return x;
    };
    j["metrics_mean"] = metrics_json(a.mean);
    j["metrics_std"] = metrics_json(a.stddev);
    j["runs"] = nlohmann::ordered_json::array();
    for (const RunRecord &r : a.records) j["runs"].push_back(run_record_to_json(r));
    return j;
}

} // namespace vqc
