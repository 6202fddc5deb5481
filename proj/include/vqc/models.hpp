#pragma once

#include "vqc/autodiff.hpp"
#include "vqc/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vqc {

enum class Arch { FcVqc, ResnetVqc, Qt, Fqt, Mlp };
enum class Task { Regression, Classification };
enum class FfnConnectivity { Type4, Type3 };

Arch arch_from_string(const std::string &s);
std::string arch_to_string(Arch a);

/// Number of 3-wide tokens for a feature count: T = ceil(n_feat / 3).
int token_count(int n_feat);

/// Zero-pad x to 3T and reshape row-major into T tokens of width 3.
MatrixXd tokenize(const VectorXd &x, int n_feat);

/// Parameter-free all-to-all mixing: stack tokens (T,3), transpose,
/// flatten row-major, re-chunk into T groups of 3.
MatrixXd type4_mix(const MatrixXd &tokens);

/// Parameter-free circular-shift routing: row t takes element 2 of token
/// t-1, keeps its own element 1, takes element 0 of token t+1 (mod T).
MatrixXd type3_shift(const MatrixXd &tokens);

/// Flat-vector index tables for the same permutations (tape wiring).
std::vector<int> type4_perm(int T);
std::vector<int> type4_perm_inverse(int T);
std::vector<int> type3_perm(int T);

struct ModelConfig {
    Arch architecture = Arch::FcVqc;
    Task task = Task::Regression;
    int n_classes = 0; // classification only
    int depth = 3;
    int heads = 1;
    FfnConnectivity ffn_connectivity = FfnConnectivity::Type4;
    bool layernorm_enabled = false; // FQT +LN variant; QT always normalizes
    bool attention_enabled = true;  // false reproduces the -attn ablation
    int stem_stages = 4;            // FC/ResNet cascade stages
    int ffn_rounds = -1;            // -1: per-arch default (QT 4, FQT 3)
    int readout_depth = -1;         // -1: per-arch default (QT 1, else depth)
    bool skip_projection = false;   // ResNet width-changing skip path
    std::vector<int> mlp_hidden;    // empty: search to match mlp_target_params
    int mlp_target_params = 720;

    void validate() const;
};

struct ParamBreakdown {
    long vqc_params = 0;
    long attention_params = 0;
    long ln_proj_params = 0;
    long total = 0;
};

/// A built model: deterministic parameter layout plus tape wiring for the
/// chosen architecture. Forward passes are pure given the parameter vector.
class Model {
  public:
    struct Slice {
        enum class Cat { Vqc, Attn, LnProj };
        enum class Init { VqcAngle, FanIn, LnGain, LnBias, Zero };
        std::string name;
        int offset = 0;
        int len = 0;
        Cat cat = Cat::Vqc;
        Init init = Init::VqcAngle;
        int fan_in = 0;
    };

    static Model build(const ModelConfig &cfg, int n_feat);

    const ModelConfig &config() const { return cfg_; }
    int n_feat() const { return n_feat_; }
    int tokens() const { return T_; }
    Eigen::Index n_params() const { return total_; }
    int output_dim() const;
    const std::vector<Slice> &slices() const { return slices_; }

    ParamBreakdown breakdown() const;

    /// Deterministic per-seed initialization: VQC angles uniform [0, 2pi),
    /// classical weights uniform [-1/sqrt(fan_in), +1/sqrt(fan_in)].
    VectorXd init_params(std::uint64_t seed) const;

    /// Wire the forward graph onto a tape; returns the output node id
    /// (scalar for regression, logits for classification).
    int forward(Tape &tape, const VectorXd &x) const;

  private:
    struct Layout; // declare/replay cursor over slices_
    int wire(Tape *tape, const VectorXd *x, Layout &layout) const;

    ModelConfig cfg_;
    int n_feat_ = 0;
    int T_ = 0;
    Eigen::Index total_ = 0;
    std::vector<Slice> slices_;
    std::vector<int> mlp_hidden_resolved_;
};

/// Exact per-component parameter accounting for a configuration.
ParamBreakdown count_params(const ModelConfig &cfg, int n_feat);

/// Smallest-deviation MLP hidden sizes for a parameter budget (1 hidden
/// layer preferred when it lands within 5%, else best of 1-2 layers).
std::vector<int> mlp_hidden_search(int n_feat, int out_dim, int target_params);

} // namespace vqc
