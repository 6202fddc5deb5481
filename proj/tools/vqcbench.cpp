#include "vqc/config.hpp"
#include "vqc/expressibility.hpp"
#include "vqc/fetch.hpp"
#include "vqc/report.hpp"
#include "vqc/trainer.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

namespace fs = std::filesystem;
using vqc::ConfigError;
using vqc::DataError;

namespace {

struct Overrides {
    std::string out;
    std::string seeds;
    int epochs = -1;
    int threads = -1;
};

void apply_overrides(vqc::ExperimentConfig &cfg, const Overrides &ov) {
    if (!ov.out.empty()) cfg.out_dir = ov.out;
    if (ov.epochs >= 0) cfg.train.epochs = ov.epochs;
    if (ov.threads >= 1) cfg.train.threads = ov.threads;
    if (!ov.seeds.empty()) {
        cfg.seeds.clear();
        std::stringstream ss(ov.seeds);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
        if (cfg.seeds.empty()) throw ConfigError("--seeds: empty list");
    }
}

void write_text(const fs::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path &path, const nlohmann::ordered_json &j) {
    write_text(path, j.dump(2) + "\n");
}

/// Build the model for a config against a loaded dataset (fills task and
/// class count from the data).
vqc::Model build_model(const vqc::ExperimentConfig &cfg, const vqc::Dataset &ds,
                       const vqc::ProcessedData &data) {
    vqc::ModelConfig mc = cfg.model;
    mc.task = ds.task;
    mc.n_classes = data.n_classes;
    return vqc::Model::build(mc, int(data.x_train.cols()));
}

std::string slurp(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

vqc::RunRecord run_one_seed(const vqc::ExperimentConfig &cfg, const vqc::Dataset &ds,
                            std::uint64_t seed, std::optional<vqc::NoiseConfig> noise,
                            const std::string &config_text) {
    const vqc::SplitIndices idx = vqc::split(int(ds.n()), seed);
    const vqc::ProcessedData data = vqc::preprocess(ds, idx);
    const vqc::Model model = build_model(cfg, ds, data);
    vqc::TrainConfig tc = cfg.train;
    tc.noise = noise;
    vqc::RunRecord rec = vqc::train(model, data, tc, seed);
    rec.dataset = ds.name;
    rec.config_text = config_text;
    return rec;
}

int cmd_train(const std::string &config_path, const Overrides &ov) {
    vqc::ExperimentConfig cfg = vqc::load_config(config_path);
    apply_overrides(cfg, ov);
    cfg.validate();
    const std::string config_text = slurp(config_path);
    const vqc::Dataset ds = vqc::load_dataset(cfg.dataset, cfg.data_dir);
    const fs::path dir = fs::path(cfg.out_dir) / cfg.name;
    fs::create_directories(dir);

    std::vector<vqc::RunRecord> records;
    for (std::uint64_t seed : cfg.seeds) {
        vqc::RunRecord rec = run_one_seed(cfg, ds, seed, std::nullopt, config_text);
        write_json(dir / (std::to_string(seed) + ".json"), vqc::run_record_to_json(rec));
        nlohmann::ordered_json t;
        t["seed"] = seed;
        t["wall_clock_seconds"] = rec.wall_clock_seconds;
        write_json(dir / (std::to_string(seed) + ".time.json"), t);
        // loss curves as plot-ready CSV
        std::string curves = "epoch,train_loss,val_loss\r\n";
        char row[96];
        for (std::size_t e = 0; e < rec.val_loss.size(); ++e) {
            if (e == 0)
                std::snprintf(row, sizeof(row), "0,,%.10g\r\n", rec.val_loss[0]);
            else
                std::snprintf(row, sizeof(row), "%zu,%.10g,%.10g\r\n", e,
                              rec.train_loss[e - 1], rec.val_loss[e]);
            curves += row;
        }
        write_text(dir / (std::to_string(seed) + ".loss.csv"), curves);
        std::printf("seed %llu: best_val %.6f (epoch %d)%s\n",
                    (unsigned long long)seed, rec.best_val_loss, rec.best_epoch,
                    rec.early_stop ? " [early stop]" : "");
        records.push_back(std::move(rec));
    }
    if (records.size() >= 2) {
        const vqc::Aggregate agg = vqc::aggregate_records(std::move(records));
        write_json(dir / "aggregate.json", vqc::aggregate_to_json(agg));
        std::printf("aggregate: r2 %s accuracy %s\n",
                    vqc::format_mean_std(agg.mean.r2, agg.stddev.r2).c_str(),
                    vqc::format_mean_std(agg.mean.accuracy, agg.stddev.accuracy).c_str());
    }
    return 0;
}

int cmd_noise_sweep(const std::string &config_path, const Overrides &ov) {
    vqc::ExperimentConfig cfg = vqc::load_config(config_path);
    apply_overrides(cfg, ov);
    cfg.validate();
    if (cfg.model.architecture != vqc::Arch::Qt && cfg.model.architecture != vqc::Arch::Fqt)
        throw ConfigError("noise-sweep: model.architecture must be qt or fqt");
    if (cfg.noise_levels.empty())
        throw ConfigError("noise-sweep: config key 'noise.p_d' is required");
    const vqc::Dataset ds = vqc::load_dataset(cfg.dataset, cfg.data_dir);
    const fs::path dir = fs::path(cfg.out_dir) / cfg.name;
    fs::create_directories(dir);

    const std::string config_text = slurp(config_path);
    const std::uint64_t seed = cfg.seeds.front(); // same initialization per level
    std::string csv = "model,p_d,r2,early_stop,early_stop_epoch\r\n";
    char buf[160];
    for (double p : cfg.noise_levels) {
        vqc::RunRecord rec = run_one_seed(cfg, ds, seed, vqc::NoiseConfig(p), config_text);
        char ptag[32];
        std::snprintf(ptag, sizeof(ptag), "%g", p);
        std::string tag = vqc::arch_to_string(cfg.model.architecture) + "_p" + ptag;
        write_json(dir / (tag + ".json"), vqc::run_record_to_json(rec));
        std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%s,%d\r\n",
                      vqc::arch_to_string(cfg.model.architecture).c_str(), p,
                      rec.test_metrics.r2, rec.early_stop ? "true" : "false",
                      rec.early_stop_epoch);
        csv += buf;
        std::printf("%s p_d=%g: r2=%.4f%s\n",
                    vqc::arch_to_string(cfg.model.architecture).c_str(), p,
                    rec.test_metrics.r2, rec.early_stop ? " [early stop]" : "");
    }
    write_text(dir / "noise_sweep.csv", csv);
    return 0;
}

void write_histogram_csv(const fs::path &path, const vqc::ExpressibilityReport &rep) {
    std::string csv = "bin_lo,bin_hi,empirical_mass,haar_mass\r\n";
    char buf[128];
    for (int b = 0; b < rep.n_bins; ++b) {
        std::snprintf(buf, sizeof(buf), "%.8g,%.8g,%.10g,%.10g\r\n",
                      double(b) / rep.n_bins, double(b + 1) / rep.n_bins,
                      rep.histogram[std::size_t(b)], rep.haar_histogram[std::size_t(b)]);
        csv += buf;
    }
    write_text(path, csv);
}

int cmd_expressibility(int n, const std::string &depths_csv, int samples, int bins,
                       std::uint64_t seed, const std::string &out_dir) {
    std::vector<int> depths;
    std::stringstream ss(depths_csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) depths.push_back(std::stoi(item));
    if (depths.empty()) throw ConfigError("expressibility: --depths must be non-empty");
    fs::create_directories(out_dir);
    std::string csv = "circuit,depth,kl\r\n";
    char buf[96];
    for (int d : depths) {
        const auto rep = vqc::expressibility_report(n, d, samples, bins, seed);
        write_json(fs::path(out_dir) / ("vqc_d" + std::to_string(d) + ".json"),
                   vqc::expressibility_report_to_json(rep));
        write_histogram_csv(fs::path(out_dir) / ("vqc_d" + std::to_string(d) + "_hist.csv"),
                            rep);
        std::snprintf(buf, sizeof(buf), "vqc,%d,%.6f\r\n", d, rep.kl);
        csv += buf;
        std::printf("vqc depth=%d: KL = %.4f\n", d, rep.kl);
    }
    const auto lin = vqc::linear_baseline_report(n, samples, bins, seed);
    write_json(fs::path(out_dir) / "linear_baseline.json",
               vqc::expressibility_report_to_json(lin));
    write_histogram_csv(fs::path(out_dir) / "linear_baseline_hist.csv", lin);
    std::snprintf(buf, sizeof(buf), "linear,0,%.6f\r\n", lin.kl);
    csv += buf;
    std::printf("linear baseline: KL = %.4f\n", lin.kl);
    write_text(fs::path(out_dir) / "expressibility.csv", csv);
    return 0;
}

int cmd_params(const std::string &config_path) {
    vqc::ExperimentConfig cfg = vqc::load_config(config_path);
    vqc::ModelConfig mc = cfg.model;
    int n_feat = 0;
    bool resolved = false;
    try {
        // exact route: the loaded dataset fixes feature count and classes
        const vqc::Dataset ds = vqc::load_dataset(cfg.dataset, cfg.data_dir);
        const vqc::SplitIndices idx = vqc::split(int(ds.n()), cfg.seeds.front());
        const vqc::ProcessedData data = vqc::preprocess(ds, idx);
        mc.task = ds.task;
        mc.n_classes = data.n_classes;
        n_feat = int(data.x_train.cols());
        resolved = true;
    } catch (const DataError &) {
        // snapshot absent: parameter accounting from manifest metadata alone
        for (const auto &m : vqc::load_manifest(cfg.data_dir + "/MANIFEST.json")) {
            if (m.name != cfg.dataset) continue;
            n_feat = m.cols - 1;
            mc.task = m.task == "classification" ? vqc::Task::Classification
                                                 : vqc::Task::Regression;
            mc.n_classes = m.n_classes;
            resolved = true;
            break;
        }
        if (!resolved) throw;
        std::fprintf(stderr, "note: %s snapshot absent; counting from manifest schema\n",
                     cfg.dataset.c_str());
    }
    const vqc::Model model = vqc::Model::build(mc, n_feat);
    const vqc::ParamBreakdown b = model.breakdown();
    std::printf("| component | params |\n|---|---|\n");
    std::printf("| vqc | %ld |\n| attention | %ld |\n| ln_proj | %ld |\n| total | %ld |\n",
                b.vqc_params, b.attention_params, b.ln_proj_params, b.total);
    return 0;
}

int cmd_report(const std::string &dir) {
    const auto rows = vqc::collect_report_rows(dir);
    if (rows.empty())
        std::fprintf(stderr, "warning: no aggregate.json files under %s\n", dir.c_str());
    const std::string md = vqc::render_markdown_table(rows);
    const std::string csv = vqc::render_csv_table(rows);
    if (fs::is_directory(dir)) {
        write_text(fs::path(dir) / "table.md", md);
        write_text(fs::path(dir) / "table.csv", csv);
    }
    std::fputs(md.c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"vqcbench: variational quantum circuit architectures on tabular benchmarks"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path;

    auto *train = app.add_subcommand("train", "train one experiment config across seeds");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--out", ov.out, "output directory override");
    train->add_option("--seeds", ov.seeds, "comma-separated seed override");
    train->add_option("--epochs", ov.epochs, "epoch count override");
    train->add_option("--threads", ov.threads, "worker thread override");

    auto *noise = app.add_subcommand("noise-sweep", "train at each depolarizing noise level");
    noise->add_option("--config", config_path, "experiment config file")->required();
    noise->add_option("--out", ov.out, "output directory override");
    noise->add_option("--seeds", ov.seeds, "comma-separated seed override");
    noise->add_option("--epochs", ov.epochs, "epoch count override");
    noise->add_option("--threads", ov.threads, "worker thread override");

    int ex_n = 3, ex_samples = 10000, ex_bins = 75;
    std::uint64_t ex_seed = 7;
    std::string ex_depths = "1,2,3,4,5", ex_out = "runs/expressibility";
    auto *expr = app.add_subcommand("expressibility", "fidelity-KL expressibility reports");
    expr->add_option("--qubits", ex_n, "qubit count (default 3)");
    expr->add_option("--depths", ex_depths, "comma-separated depths (default 1..5)");
    expr->add_option("--samples", ex_samples, "parameter pairs per report (default 10000)");
    expr->add_option("--bins", ex_bins, "histogram bins (default 75)");
    expr->add_option("--seed", ex_seed, "rng seed");
    expr->add_option("--out", ex_out, "output directory");

    auto *params = app.add_subcommand("params", "print the parameter breakdown of a config");
    params->add_option("--config", config_path, "experiment config file")->required();

    std::string report_dir = "runs";
    auto *report = app.add_subcommand("report", "render tables from run records");
    report->add_option("--dir", report_dir, "directory holding experiment outputs");

    std::string manifest = "data/MANIFEST.json", data_dir = "data";
    bool pin = false;
    auto *fetch = app.add_subcommand("fetch-data", "download dataset snapshots");
    fetch->add_option("--manifest", manifest, "manifest path");
    fetch->add_option("--data-dir", data_dir, "snapshot directory");
    fetch->add_flag("--pin", pin, "write computed checksums into the manifest");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(config_path, ov);
        if (noise->parsed()) return cmd_noise_sweep(config_path, ov);
        if (expr->parsed())
            return cmd_expressibility(ex_n, ex_depths, ex_samples, ex_bins, ex_seed, ex_out);
        if (params->parsed()) return cmd_params(config_path);
        if (report->parsed()) return cmd_report(report_dir);
        if (fetch->parsed()) return vqc::fetch_all(manifest, data_dir, pin) == 0 ? 0 : 3;
    } catch (const ConfigError &e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError &e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
