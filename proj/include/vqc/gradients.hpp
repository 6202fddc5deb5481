#pragma once

#include "vqc/ansatz.hpp"
#include "vqc/common.hpp"
#include "vqc/density_matrix.hpp"

#include <vector>

namespace vqc {

/// d<Z_i>/d(theta, x): rows are the n qubit expectations, columns the 3nd
/// block angles followed by the n embedding angles.
template <typename Scalar = double>
struct Jacobian {
    RealMatrix<Scalar> d_params; // n x 3nd
    RealMatrix<Scalar> d_inputs; // n x n
};

namespace detail {

constexpr double kHalfPi = 1.5707963267948966192313216916398;

template <typename Scalar>
RealVector<Scalar> eval_ops(int n_qubits, const std::vector<GateOp> &ops) {
    StateVector<Scalar> state(n_qubits);
    for (const GateOp &op : ops) apply_op(state, op);
    return measure_z_all(state);
}

} // namespace detail

/// Exact parameter-shift rule for rotation-gate circuits:
///   d<Z_i>/dt = [f(t + pi/2) - f(t - pi/2)] / 2,
/// applied to every block angle and every embedding angle.
template <typename Scalar = double>
Jacobian<Scalar> parameter_shift_jacobian(const RealVector<Scalar> &x,
                                          const ParamBlock<Scalar> &params,
                                          const EntanglerSchedule &schedule) {
    const int n = params.n_qubits;
    const int n_params = int(params.size());
    std::vector<GateOp> ops = build_circuit_ops(x, params, schedule);
    Jacobian<Scalar> jac;
    jac.d_params = RealMatrix<Scalar>::Zero(n, n_params);
    jac.d_inputs = RealMatrix<Scalar>::Zero(n, n);
    for (GateOp &op : ops) {
        if (op.param_index < 0) continue;
        const double saved = op.angle;
        op.angle = saved + detail::kHalfPi;
        const RealVector<Scalar> plus = detail::eval_ops<Scalar>(n, ops);
        op.angle = saved - detail::kHalfPi;
        const RealVector<Scalar> minus = detail::eval_ops<Scalar>(n, ops);
        op.angle = saved;
        const RealVector<Scalar> grad = (plus - minus) / Scalar(2);
        if (op.param_index < n_params)
            jac.d_params.col(op.param_index) = grad;
        else
            jac.d_inputs.col(op.param_index - n_params) = grad;
    }
    return jac;
}

/// Adjoint-method Jacobian of all <Z_i> in a single backward sweep.
/// One forward pass, then per gate: un-apply, contract the derivative state
/// against every observable bra. Exact for rotation gates; O(P * 2^n).
template <typename Scalar = double>
Jacobian<Scalar> adjoint_jacobian(const RealVector<Scalar> &x, const ParamBlock<Scalar> &params,
                                  const EntanglerSchedule &schedule,
                                  RealVector<Scalar> *value_out = nullptr) {
    using Complex = std::complex<Scalar>;
    const int n = params.n_qubits;
    const int n_params = int(params.size());
    const std::vector<GateOp> ops = build_circuit_ops(x, params, schedule);

    StateVector<Scalar> ket(n);
    for (const GateOp &op : ops) apply_op(ket, op);
    if (value_out) *value_out = measure_z_all(ket);

    // bras: lambda_i = Z_i |psi>
    std::vector<StateVector<Scalar>> bras;
    bras.reserve(n);
    for (int q = 0; q < n; ++q) {
        bras.push_back(ket);
        bras.back().apply_pauli_z(q);
    }

    Jacobian<Scalar> jac;
    jac.d_params = RealMatrix<Scalar>::Zero(n, n_params);
    jac.d_inputs = RealMatrix<Scalar>::Zero(n, n);

    StateVector<Scalar> mu(n);
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        const GateOp &op = *it;
        apply_op_adjoint(ket, op); // ket = state before this gate
        if (op.param_index >= 0) {
            // dG/dt = -(i/2) P G(t), P = Y for RY, Z for RZ
            mu = ket;
            apply_op(mu, op);
            if (op.kind == GateOp::Kind::RY)
                mu.apply_pauli_y(op.qubit);
            else
                mu.apply_pauli_z(op.qubit);
            for (int q = 0; q < n; ++q) {
                const Complex ip = bras[q].amplitudes().dot(mu.amplitudes());
                // <b| (-i/2 P G) |ket> + c.c. = Im(<b|PG|ket>)
                const Scalar g = ip.imag();
                if (op.param_index < n_params)
                    jac.d_params(q, op.param_index) = g;
                else
                    jac.d_inputs(q, op.param_index - n_params) = g;
            }
        }
        for (int q = 0; q < n; ++q) apply_op_adjoint(bras[q], op);
    }
    return jac;
}

/// Parameter-shift on the density-matrix simulator; exact for rotation
/// gates under Pauli channels.
template <typename Scalar = double>
Jacobian<Scalar> noisy_jacobian(const RealVector<Scalar> &x, const ParamBlock<Scalar> &params,
                                const EntanglerSchedule &schedule, const NoiseConfig &noise,
                                RealVector<Scalar> *value_out = nullptr) {
    const int n = params.n_qubits, d = params.depth;
    const int n_params = int(params.size());
    std::vector<GateOp> ops = build_circuit_ops(x, params, schedule);
    if (value_out) *value_out = run_ops_noisy<Scalar>(n, d, ops, noise);
    Jacobian<Scalar> jac;
    jac.d_params = RealMatrix<Scalar>::Zero(n, n_params);
    jac.d_inputs = RealMatrix<Scalar>::Zero(n, n);
    for (GateOp &op : ops) {
        if (op.param_index < 0) continue;
        const double saved = op.angle;
        op.angle = saved + detail::kHalfPi;
        const RealVector<Scalar> plus = run_ops_noisy<Scalar>(n, d, ops, noise);
        op.angle = saved - detail::kHalfPi;
        const RealVector<Scalar> minus = run_ops_noisy<Scalar>(n, d, ops, noise);
        op.angle = saved;
        const RealVector<Scalar> grad = (plus - minus) / Scalar(2);
        if (op.param_index < n_params)
            jac.d_params.col(op.param_index) = grad;
        else
            jac.d_inputs.col(op.param_index - n_params) = grad;
    }
    return jac;
}

} // namespace vqc
