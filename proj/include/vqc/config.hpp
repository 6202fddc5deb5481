#pragma once

#include "vqc/models.hpp"
#include "vqc/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vqc {

/// One experiment: dataset + model + training protocol (+ optional noise
/// sweep levels). Parsed from flat `key = value` files with [sections].
struct ExperimentConfig {
    std::string name = "experiment";
    std::string dataset;
    std::string data_dir = "data";
    std::string out_dir = "runs";
    ModelConfig model;
    TrainConfig train;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> noise_levels; // noise-sweep runs only

    void validate() const;
};

/// Parse the documented config grammar; throws ConfigError naming the
/// offending section/key on any unknown or malformed entry.
ExperimentConfig parse_config_text(const std::string &text);
ExperimentConfig load_config(const std::string &path);

} // namespace vqc
