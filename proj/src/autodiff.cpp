#include "vqc/autodiff.hpp"

#include <cmath>

namespace vqc {

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
}

int Tape::input(const VectorXd &x) {
    Node n;
    n.kind = Kind::Input;
    n.value = x;
    return push(std::move(n));
}

int Tape::constant(VectorXd v) {
    Node n;
    n.kind = Kind::Constant;
    n.value = std::move(v);
    return push(std::move(n));
}

int Tape::pad(int in, int out_len) {
    Node n;
    n.kind = Kind::Pad;
    n.inputs = {in};
    n.value = VectorXd::Zero(out_len);
    n.value.head(nodes_[in].value.size()) = nodes_[in].value;
    return push(std::move(n));
}

int Tape::slice(int in, int offset, int len) {
    Node n;
    n.kind = Kind::Slice;
    n.inputs = {in};
    n.i0 = offset;
    n.i1 = len;
    n.value = nodes_[in].value.segment(offset, len);
    return push(std::move(n));
}

int Tape::gather(int in, std::vector<int> indices) {
    Node n;
    n.kind = Kind::Gather;
    n.inputs = {in};
    n.value.resize(Eigen::Index(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i)
        n.value[Eigen::Index(i)] = nodes_[in].value[indices[i]];
    n.indices = std::move(indices);
    return push(std::move(n));
}

int Tape::concat(const std::vector<int> &ins) {
    Node n;
    n.kind = Kind::Concat;
    n.inputs = ins;
    Eigen::Index total = 0;
    for (int id : ins) total += nodes_[id].value.size();
    n.value.resize(total);
    Eigen::Index at = 0;
    for (int id : ins) {
        n.value.segment(at, nodes_[id].value.size()) = nodes_[id].value;
        at += nodes_[id].value.size();
    }
    return push(std::move(n));
}

int Tape::add(int a, int b) {
    if (nodes_[a].value.size() != nodes_[b].value.size())
        throw ConfigError("Tape::add: operand lengths differ");
    Node n;
    n.kind = Kind::Add;
    n.inputs = {a, b};
    n.value = nodes_[a].value + nodes_[b].value;
    return push(std::move(n));
}

int Tape::dense(int in, int p_off, int out_dim, bool bias) {
    const Eigen::Index in_dim = nodes_[in].value.size();
    Node n;
    n.kind = Kind::Dense;
    n.inputs = {in};
    n.p_off = p_off;
    n.p_len = int(out_dim * in_dim) + (bias ? out_dim : 0);
    n.i0 = int(in_dim);
    n.i1 = bias ? 1 : 0;
    Eigen::Map<const MatrixXd> w(p().data() + p_off, in_dim, out_dim); // column-per-output
    n.value = w.transpose() * nodes_[in].value;
    if (bias) n.value += p().segment(p_off + out_dim * in_dim, out_dim);
    return push(std::move(n));
}

int Tape::layer_norm(int in, int p_off) {
    const Eigen::Index len = nodes_[in].value.size();
    if (len < 2) throw ConfigError("Tape::layer_norm: input length must be >= 2");
    Node n;
    n.kind = Kind::LayerNorm;
    n.inputs = {in};
    n.p_off = p_off;
    n.p_len = int(2 * len);
    const VectorXd &x = nodes_[in].value;
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    const double inv_std = 1.0 / std::sqrt(var + layer_norm_epsilon);
    n.cache_v = (x.array() - mean).matrix() * inv_std;
    n.aux = inv_std;
    n.value = p().segment(p_off, len).cwiseProduct(n.cache_v) + p().segment(p_off + len, len);
    return push(std::move(n));
}

int Tape::attention(int q, int k, int v, int T, int dim) {
    Node n;
    n.kind = Kind::Attention;
    n.inputs = {q, k, v};
    n.i0 = T;
    n.i1 = dim;
    Eigen::Map<const MatrixXd> qm(nodes_[q].value.data(), dim, T);
    Eigen::Map<const MatrixXd> km(nodes_[k].value.data(), dim, T);
    Eigen::Map<const MatrixXd> vm(nodes_[v].value.data(), dim, T);
    MatrixXd scores = qm.transpose() * km / std::sqrt(double(dim)); // (i,j) = q_i . k_j
    MatrixXd alpha(T, T);
    for (int i = 0; i < T; ++i) {
        const double m = scores.row(i).maxCoeff();
        alpha.row(i) = (scores.row(i).array() - m).exp();
        alpha.row(i) /= alpha.row(i).sum();
    }
    MatrixXd out = vm * alpha.transpose(); // column i = sum_j alpha_ij v_j
    n.cache_a = std::move(alpha);
    n.value = Eigen::Map<VectorXd>(out.data(), Eigen::Index(T) * dim);
    return push(std::move(n));
}

int Tape::tanh_op(int in) {
    Node n;
    n.kind = Kind::Tanh;
    n.inputs = {in};
    n.value = nodes_[in].value.array().tanh();
    return push(std::move(n));
}

int Tape::vqc_block(int in, int p_off, int n_qubits, int depth) {
    Node n;
    n.kind = Kind::VqcBlock;
    n.inputs = {in};
    n.p_off = p_off;
    n.p_len = 3 * n_qubits * depth;
    n.i0 = n_qubits;
    n.i1 = depth;
    ParamBlock<double> block(depth, n_qubits, p().segment(p_off, n.p_len));
    const EntanglerSchedule sched = EntanglerSchedule::ring_shift(n_qubits, depth);
    const VectorXd &x = nodes_[in].value;
    if (x.size() != n_qubits) throw ConfigError("Tape::vqc_block: input width != qubit count");
    if (noise_) {
        if (with_grad_) {
            VectorXd val;
            Jacobian<double> jac = noisy_jacobian(x, block, sched, *noise_, &val);
            n.value = std::move(val);
            n.cache_a = std::move(jac.d_params);
            n.cache_b = std::move(jac.d_inputs);
        } else {
            n.value = run_block_noisy(x, block, sched, *noise_);
        }
    } else {
        if (with_grad_) {
            VectorXd val;
            Jacobian<double> jac = adjoint_jacobian(x, block, sched, &val);
            n.value = std::move(val);
            n.cache_a = std::move(jac.d_params);
            n.cache_b = std::move(jac.d_inputs);
        } else {
            n.value = run_block(x, block, sched);
        }
    }
    return push(std::move(n));
}

int Tape::mse_loss(int pred, VectorXd target) {
    if (nodes_[pred].value.size() != target.size())
        throw ConfigError("Tape::mse_loss: prediction/target lengths differ");
    Node n;
    n.kind = Kind::MseLoss;
    n.inputs = {pred};
    n.cache_v = nodes_[pred].value - target;
    n.value = VectorXd::Constant(1, n.cache_v.squaredNorm() / double(target.size()));
    return push(std::move(n));
}

int Tape::cross_entropy_loss(int logits, int label) {
    const VectorXd &z = nodes_[logits].value;
    if (label < 0 || label >= z.size())
        throw ConfigError("Tape::cross_entropy_loss: label out of range");
    Node n;
    n.kind = Kind::CrossEntropyLoss;
    n.inputs = {logits};
    n.i0 = label;
    const double m = z.maxCoeff();
    VectorXd e = (z.array() - m).exp();
    const double s = e.sum();
    n.cache_v = e / s; // softmax probabilities
    n.value = VectorXd::Constant(1, std::log(s) + m - z[label]);
    return push(std::move(n));
}

void Tape::backward(int loss_id, VectorXd &param_grad, double seed) {
    if (nodes_[loss_id].value.size() != 1)
        throw ConfigError("Tape::backward: loss node must be scalar");
    for (Node &n : nodes_) n.grad = VectorXd::Zero(n.value.size());
    nodes_[loss_id].grad[0] = seed;

    for (int id = loss_id; id >= 0; --id) {
        Node &n = nodes_[id];
        if (n.grad.isZero(0.0)) continue;
        const VectorXd &g = n.grad;
        switch (n.kind) {
        case Kind::Input:
        case Kind::Constant:
            break;
        case Kind::Pad:
            nodes_[n.inputs[0]].grad += g.head(nodes_[n.inputs[0]].value.size());
            break;
        case Kind::Slice:
            nodes_[n.inputs[0]].grad.segment(n.i0, n.i1) += g;
            break;
        case Kind::Gather: {
            VectorXd &gi = nodes_[n.inputs[0]].grad;
            for (std::size_t i = 0; i < n.indices.size(); ++i)
                gi[n.indices[i]] += g[Eigen::Index(i)];
            break;
        }
        case Kind::Concat: {
            Eigen::Index at = 0;
            for (int in : n.inputs) {
                nodes_[in].grad += g.segment(at, nodes_[in].value.size());
                at += nodes_[in].value.size();
            }
            break;
        }
        case Kind::Add:
            nodes_[n.inputs[0]].grad += g;
            nodes_[n.inputs[1]].grad += g;
            break;
        case Kind::Dense: {
            const Eigen::Index in_dim = n.i0, out_dim = n.value.size();
            const VectorXd &x = nodes_[n.inputs[0]].value;
            Eigen::Map<const MatrixXd> w(p().data() + n.p_off, in_dim, out_dim);
            Eigen::Map<MatrixXd> gw(param_grad.data() + n.p_off, in_dim, out_dim);
            gw.noalias() += x * g.transpose();
            if (n.i1) param_grad.segment(n.p_off + in_dim * out_dim, out_dim) += g;
            nodes_[n.inputs[0]].grad.noalias() += w * g;
            break;
        }
        case Kind::LayerNorm: {
            const Eigen::Index len = n.value.size();
            const VectorXd gain = p().segment(n.p_off, len);
            param_grad.segment(n.p_off, len) += g.cwiseProduct(n.cache_v);
            param_grad.segment(n.p_off + len, len) += g;
            const VectorXd gx_hat = g.cwiseProduct(gain);
            const double m1 = gx_hat.mean();
            const double m2 = gx_hat.cwiseProduct(n.cache_v).mean();
            nodes_[n.inputs[0]].grad +=
                n.aux * (gx_hat.array() - m1 - n.cache_v.array() * m2).matrix();
            break;
        }
        case Kind::Attention: {
            const int T = n.i0, dim = n.i1;
            Eigen::Map<const MatrixXd> qm(nodes_[n.inputs[0]].value.data(), dim, T);
            Eigen::Map<const MatrixXd> km(nodes_[n.inputs[1]].value.data(), dim, T);
            Eigen::Map<const MatrixXd> vm(nodes_[n.inputs[2]].value.data(), dim, T);
            Eigen::Map<const MatrixXd> go(g.data(), dim, T);
            const MatrixXd &alpha = n.cache_a;
            // d v
            Eigen::Map<MatrixXd> gv(nodes_[n.inputs[2]].grad.data(), dim, T);
            gv.noalias() += go * alpha;
            // d scores through softmax rows
            MatrixXd gs = go.transpose() * vm; // (i,j) = g_o_i . v_j
            for (int i = 0; i < T; ++i) {
                const double dot = alpha.row(i).dot(gs.row(i));
                gs.row(i) = alpha.row(i).cwiseProduct((gs.row(i).array() - dot).matrix());
            }
            gs /= std::sqrt(double(dim));
            Eigen::Map<MatrixXd> gq(nodes_[n.inputs[0]].grad.data(), dim, T);
            Eigen::Map<MatrixXd> gk(nodes_[n.inputs[1]].grad.data(), dim, T);
            gq.noalias() += km * gs.transpose();
            gk.noalias() += qm * gs;
            break;
        }
        case Kind::Tanh:
            nodes_[n.inputs[0]].grad +=
                g.cwiseProduct((1.0 - n.value.array().square()).matrix());
            break;
        case Kind::VqcBlock:
            if (n.cache_a.size() == 0)
                throw ConfigError("Tape::backward: vqc node built without gradients");
            param_grad.segment(n.p_off, n.p_len) += n.cache_a.transpose() * g;
            nodes_[n.inputs[0]].grad += n.cache_b.transpose() * g;
            break;
        case Kind::MseLoss:
            nodes_[n.inputs[0]].grad +=
                (2.0 * g[0] / double(n.cache_v.size())) * n.cache_v;
            break;
        case Kind::CrossEntropyLoss: {
            VectorXd gz = n.cache_v * g[0];
            gz[n.i0] -= g[0];
            nodes_[n.inputs[0]].grad += gz;
            break;
        }
        }
    }
}

} // namespace vqc
