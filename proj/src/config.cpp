#include "vqc/config.hpp"

#include <fstream>
#include <sstream>

namespace vqc {

namespace {

std::string trim(const std::string &s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string &key, const std::string &v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    throw ConfigError("config key '" + key + "': expected on/off, got '" + v + "'");
}

long parse_int(const std::string &key, const std::string &v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception &) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
    }
}

double parse_double(const std::string &key, const std::string &v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception &) {
        throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string &v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    if (dataset.empty()) throw ConfigError("config key 'experiment.dataset' is required");
    if (seeds.empty()) throw ConfigError("config key 'train.seeds' must be non-empty");
    for (double p : noise_levels)
        if (p < 0 || p > 0.75)
            throw ConfigError("config key 'noise.p_d': values must lie in [0, 0.75]");
    model.validate();
    if (train.epochs < 0) throw ConfigError("config key 'train.epochs' must be >= 0");
    if (train.threads < 1) throw ConfigError("config key 'train.threads' must be >= 1");
}

ExperimentConfig parse_config_text(const std::string &text) {
    ExperimentConfig cfg;
    std::string section;
    std::stringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "model" && section != "train" &&
                section != "noise")
                throw ConfigError("unknown config section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const std::string full = section + "." + key;

        if (full == "experiment.name") cfg.name = value;
        else if (full == "experiment.dataset") cfg.dataset = value;
        else if (full == "experiment.data_dir") cfg.data_dir = value;
        else if (full == "experiment.out") cfg.out_dir = value;
        else if (full == "model.architecture") cfg.model.architecture = arch_from_string(value);
        else if (full == "model.depth") cfg.model.depth = int(parse_int(full, value));
        else if (full == "model.heads") cfg.model.heads = int(parse_int(full, value));
        else if (full == "model.ffn_connectivity") {
            if (value == "type4") cfg.model.ffn_connectivity = FfnConnectivity::Type4;
            else if (value == "type3") cfg.model.ffn_connectivity = FfnConnectivity::Type3;
            else throw ConfigError("config key '" + full + "': expected type4 or type3");
        }
        else if (full == "model.attention") cfg.model.attention_enabled = parse_bool(full, value);
        else if (full == "model.layernorm") cfg.model.layernorm_enabled = parse_bool(full, value);
        else if (full == "model.stem_stages") cfg.model.stem_stages = int(parse_int(full, value));
        else if (full == "model.ffn_rounds") cfg.model.ffn_rounds = int(parse_int(full, value));
        else if (full == "model.readout_depth")
            cfg.model.readout_depth = int(parse_int(full, value));
        else if (full == "model.skip_projection")
            cfg.model.skip_projection = parse_bool(full, value);
        else if (full == "model.mlp_hidden") {
            cfg.model.mlp_hidden.clear();
            for (const auto &h : split_list(value))
                cfg.model.mlp_hidden.push_back(int(parse_int(full, h)));
        }
        else if (full == "model.mlp_target_params")
            cfg.model.mlp_target_params = int(parse_int(full, value));
        else if (full == "train.epochs") cfg.train.epochs = int(parse_int(full, value));
        else if (full == "train.lr") cfg.train.learning_rate = parse_double(full, value);
        else if (full == "train.clip_norm") cfg.train.clip_norm = parse_double(full, value);
        else if (full == "train.subsample")
            cfg.train.train_subsample = int(parse_int(full, value));
        else if (full == "train.threads") cfg.train.threads = int(parse_int(full, value));
        else if (full == "train.seeds") {
            cfg.seeds.clear();
            for (const auto &s : split_list(value))
                cfg.seeds.push_back(std::uint64_t(parse_int(full, s)));
        }
        else if (full == "noise.p_d") {
            cfg.noise_levels.clear();
            for (const auto &p : split_list(value))
                cfg.noise_levels.push_back(parse_double(full, p));
        }
        else throw ConfigError("unknown config key '" + full + "'");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config_text(ss.str());
    cfg.validate();
    return cfg;
}

} // namespace vqc
