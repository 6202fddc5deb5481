#pragma once

#include "vqc/common.hpp"
#include "vqc/density_matrix.hpp"
#include "vqc/gradients.hpp"

#include <optional>
#include <vector>

namespace vqc {

/// Reverse-mode tape over vector-valued nodes. Classical ops carry exact
/// backward rules; vqc nodes cache the full analytic Jacobian computed by
/// the adjoint method (or parameter-shift on the noisy simulator) and the
/// tape chain-rules through it -- no circuit re-simulation in backward.
///
/// Nodes are appended in topological order; `backward` runs one reverse
/// sweep, accumulating parameter gradients into a caller-owned flat vector.
class Tape {
  public:
    enum class Kind {
        Input,
        Constant,
        Pad,
        Slice,
        Gather,
        Concat,
        Add,
        Dense,
        LayerNorm,
        Attention,
        Tanh,
        VqcBlock,
        MseLoss,
        CrossEntropyLoss,
    };

    struct Node {
        Kind kind;
        VectorXd value;
        VectorXd grad;
        std::vector<int> inputs;
        int p_off = -1, p_len = 0; // parameter slice, if any
        // kind-specific payloads
        std::vector<int> indices;  // Gather
        MatrixXd cache_a;          // Attention alpha / VqcBlock d_params
        MatrixXd cache_b;          // VqcBlock d_inputs
        VectorXd cache_v;          // LayerNorm x_hat / CE probs / MSE target
        double aux = 0.0;          // LayerNorm inv_std
        int i0 = 0, i1 = 0;        // Slice off/len, Attention T/dim, Vqc n/d
    };

    Tape(const VectorXd &params, bool with_grad, std::optional<NoiseConfig> noise = {})
        : params_(&params), with_grad_(with_grad), noise_(noise) {}

    int input(const VectorXd &x);
    int constant(VectorXd v);
    /// Zero-pad to `out_len`.
    int pad(int in, int out_len);
    int slice(int in, int offset, int len);
    /// y[i] = x[indices[i]].
    int gather(int in, std::vector<int> indices);
    int concat(const std::vector<int> &ins);
    int add(int a, int b);
    /// y = W x (+ b). W is row-major (out x in) at p_off, bias follows.
    int dense(int in, int p_off, int out_dim, bool bias);
    /// y = gain * (x - mean)/sqrt(var + 1e-5) + shift; gain then shift at p_off.
    int layer_norm(int in, int p_off);
    /// Scaled dot-product attention over T tokens of width `dim`;
    /// q/k/v nodes are flattened row-major (token-major) T*dim vectors.
    int attention(int q, int k, int v, int T, int dim);
    int tanh_op(int in);
    /// Ansatz block: embeds the input node's angles, runs depth-d layers on
    /// n qubits, outputs all <Z_i>. Noisy when the tape has a NoiseConfig.
    int vqc_block(int in, int p_off, int n_qubits, int depth);
    int mse_loss(int pred, VectorXd target);
    int cross_entropy_loss(int logits, int label);

    const VectorXd &value(int id) const { return nodes_[id].value; }
    const Node &node(int id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep from a scalar node; adds parameter gradients (scaled by
    /// `seed`) into param_grad.
    void backward(int loss_id, VectorXd &param_grad, double seed = 1.0);

    static constexpr double layer_norm_epsilon = 1e-5;

  private:
    int push(Node n);
    const VectorXd &p() const { return *params_; }

    const VectorXd *params_;
    bool with_grad_;
    std::optional<NoiseConfig> noise_;
    std::vector<Node> nodes_;
};

} // namespace vqc
