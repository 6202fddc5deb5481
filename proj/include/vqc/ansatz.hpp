#pragma once

#include "vqc/common.hpp"
#include "vqc/state_vector.hpp"

#include <vector>

namespace vqc {

/// Trainable angles of one circuit block: theta[layer][qubit][k] with the
/// RZ-RY-RZ triple k in {0,1,2}, stored flat; exactly 3*n*d parameters.
template <typename Scalar = double>
struct ParamBlock {
    int depth = 0;
    int n_qubits = 0;
    RealVector<Scalar> angles; // length 3*n_qubits*depth

    ParamBlock() = default;
    ParamBlock(int d, int n) : depth(d), n_qubits(n) {
        if (d < 1 || n < 1)
            throw ConfigError("ParamBlock: depth and n_qubits must be >= 1");
        angles = RealVector<Scalar>::Zero(size());
    }
    ParamBlock(int d, int n, RealVector<Scalar> a) : depth(d), n_qubits(n), angles(std::move(a)) {
        if (angles.size() != size())
            throw ConfigError("ParamBlock: angle vector length must be 3*n*d");
    }

    Eigen::Index size() const { return Eigen::Index(3) * n_qubits * depth; }

    Scalar &at(int layer, int qubit, int k) {
        return angles[(Eigen::Index(layer) * n_qubits + qubit) * 3 + k];
    }
    Scalar at(int layer, int qubit, int k) const {
        return angles[(Eigen::Index(layer) * n_qubits + qubit) * 3 + k];
    }
};

/// CNOT ring offsets per layer. Default schedule shifts by one position per
/// layer: offsets[l] = (l mod (n-1)) + 1; empty for single-qubit blocks.
struct EntanglerSchedule {
    std::vector<int> offsets;

    static EntanglerSchedule ring_shift(int n_qubits, int depth) {
        EntanglerSchedule s;
        if (n_qubits >= 2) {
            s.offsets.resize(depth);
            for (int l = 0; l < depth; ++l) s.offsets[l] = (l % (n_qubits - 1)) + 1;
        }
        return s;
    }
};

/// One gate in a flattened circuit description. `param_index` addresses the
/// unified trainable space [0, 3nd) for block angles and [3nd, 3nd+n) for
/// the embedding angles; -1 marks a fixed gate.
struct GateOp {
    enum class Kind { RY, RZ, CNOT };
    Kind kind;
    int qubit = 0;
    int control = -1;
    int param_index = -1;
    double angle = 0.0;
};

/// Flatten embedding + block into a gate list (embedding first).
template <typename Scalar = double>
std::vector<GateOp> build_circuit_ops(const RealVector<Scalar> &x,
                                      const ParamBlock<Scalar> &params,
                                      const EntanglerSchedule &schedule) {
    const int n = params.n_qubits, d = params.depth;
    if (x.size() != n)
        throw ConfigError("build_circuit_ops: input length must equal qubit count");
    if (n >= 2 && int(schedule.offsets.size()) != d)
        throw ConfigError("build_circuit_ops: schedule length must equal depth");
    const int p_embed = 3 * n * d;
    std::vector<GateOp> ops;
    ops.reserve(std::size_t(n) * (3 * d + 1) + std::size_t(n) * d);
    for (int q = 0; q < n; ++q)
        ops.push_back({GateOp::Kind::RY, q, -1, p_embed + q, double(x[q])});
    for (int l = 0; l < d; ++l) {
        for (int q = 0; q < n; ++q) {
            const int base = (l * n + q) * 3;
            ops.push_back({GateOp::Kind::RZ, q, -1, base + 0, double(params.at(l, q, 0))});
            ops.push_back({GateOp::Kind::RY, q, -1, base + 1, double(params.at(l, q, 1))});
            ops.push_back({GateOp::Kind::RZ, q, -1, base + 2, double(params.at(l, q, 2))});
        }
        if (n >= 2) {
            const int off = schedule.offsets[l];
            if (off < 1 || off > n - 1)
                throw ConfigError("EntanglerSchedule: offset out of [1, n-1]");
            for (int q = 0; q < n; ++q)
                ops.push_back({GateOp::Kind::CNOT, (q + off) % n, q, -1, 0.0});
        }
    }
    return ops;
}

template <typename Scalar>
void apply_op(StateVector<Scalar> &state, const GateOp &op) {
    switch (op.kind) {
    case GateOp::Kind::RY: state.apply_ry(op.qubit, Scalar(op.angle)); break;
    case GateOp::Kind::RZ: state.apply_rz(op.qubit, Scalar(op.angle)); break;
    case GateOp::Kind::CNOT: state.apply_cnot(op.control, op.qubit); break;
    }
}

template <typename Scalar>
void apply_op_adjoint(StateVector<Scalar> &state, const GateOp &op) {
    switch (op.kind) {
    case GateOp::Kind::RY: state.apply_ry(op.qubit, Scalar(-op.angle)); break;
    case GateOp::Kind::RZ: state.apply_rz(op.qubit, Scalar(-op.angle)); break;
    case GateOp::Kind::CNOT: state.apply_cnot(op.control, op.qubit); break;
    }
}

/// Angle embedding: RY(x_i) on qubit i applied to |0...0>.
template <typename Scalar = double>
StateVector<Scalar> embed_input(const RealVector<Scalar> &x) {
    StateVector<Scalar> state(int(x.size()));
    for (int q = 0; q < int(x.size()); ++q) state.apply_ry(q, x[q]);
    return state;
}

/// Layered ansatz: per layer, RZ-RY-RZ on every qubit then the CNOT ring
/// with that layer's offset (ascending control index).
template <typename Scalar = double>
StateVector<Scalar> apply_block(StateVector<Scalar> state, const ParamBlock<Scalar> &params,
                                const EntanglerSchedule &schedule) {
    if (params.n_qubits != state.n_qubits())
        throw ConfigError("apply_block: qubit count mismatch between state and params");
    const int n = params.n_qubits, d = params.depth;
    if (n >= 2 && int(schedule.offsets.size()) != d)
        throw ConfigError("apply_block: schedule length must equal depth");
    for (int l = 0; l < d; ++l) {
        for (int q = 0; q < n; ++q) {
            state.apply_rz(q, params.at(l, q, 0));
            state.apply_ry(q, params.at(l, q, 1));
            state.apply_rz(q, params.at(l, q, 2));
        }
        if (n >= 2) {
            const int off = schedule.offsets[l];
            if (off < 1 || off > n - 1)
                throw ConfigError("EntanglerSchedule: offset out of [1, n-1]");
            for (int q = 0; q < n; ++q) state.apply_cnot(q, (q + off) % n);
        }
    }
    return state;
}

/// <Z_i> for every qubit.
template <typename Scalar = double>
RealVector<Scalar> measure_z_all(const StateVector<Scalar> &state) {
    RealVector<Scalar> z(state.n_qubits());
    for (int q = 0; q < state.n_qubits(); ++q) z[q] = state.expval_z(q);
    return z;
}

/// F = |<s1|s2>|^2.
template <typename Scalar = double>
Scalar fidelity(const StateVector<Scalar> &s1, const StateVector<Scalar> &s2) {
    if (s1.n_qubits() != s2.n_qubits())
        throw ConfigError("fidelity: qubit count mismatch");
    const std::complex<Scalar> ip = s1.amplitudes().dot(s2.amplitudes());
    return std::norm(ip);
}

/// Convenience forward pass: embed, run the block, measure all qubits.
template <typename Scalar = double>
RealVector<Scalar> run_block(const RealVector<Scalar> &x, const ParamBlock<Scalar> &params,
                             const EntanglerSchedule &schedule) {
    return measure_z_all(apply_block(embed_input(x), params, schedule));
}

} // namespace vqc
