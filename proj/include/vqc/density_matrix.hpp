#pragma once

#include "vqc/ansatz.hpp"
#include "vqc/common.hpp"

#include <cmath>

namespace vqc {

/// Per-layer single-qubit depolarizing noise, applied after the complete
/// layer (rotations + entanglers) on every qubit.
struct NoiseConfig {
    double p_d = 0.0;

    explicit NoiseConfig(double p = 0.0) : p_d(p) {
        if (p < 0.0 || p > 0.75)
            throw ConfigError("NoiseConfig: p_d must lie in [0, 0.75]");
    }
};

/// Mixed n-qubit state: 2^n x 2^n density matrix, same little-endian basis
/// convention as StateVector.
template <typename Scalar = double>
class DensityMatrix {
  public:
    using Complex = std::complex<Scalar>;

    explicit DensityMatrix(int n_qubits)
        : n_(n_qubits), rho_(ComplexMatrix<Scalar>::Zero(std::size_t(1) << n_qubits,
                                                          std::size_t(1) << n_qubits)) {
        if (n_qubits < 1)
            throw ConfigError("DensityMatrix: n_qubits must be >= 1");
        rho_(0, 0) = Complex(1, 0);
    }

    static DensityMatrix from_pure(const StateVector<Scalar> &psi) {
        DensityMatrix rho(psi.n_qubits());
        rho.rho_ = psi.amplitudes() * psi.amplitudes().adjoint();
        return rho;
    }

    int n_qubits() const { return n_; }
    const ComplexMatrix<Scalar> &matrix() const { return rho_; }
    ComplexMatrix<Scalar> &matrix() { return rho_; }

    Scalar trace_real() const { return rho_.trace().real(); }

    /// rho <- (U x I) rho (U x I)^dagger for a 2x2 gate U on `qubit`.
    void apply_1q(int qubit, const Complex &u00, const Complex &u01, const Complex &u10,
                  const Complex &u11) {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = rho_.rows();
        // left multiply: rows
        for (std::size_t c = 0; c < dim; ++c)
            for (std::size_t r = 0; r < dim; ++r) {
                if (r & mask) continue;
                const std::size_t r1 = r | mask;
                const Complex a0 = rho_(r, c), a1 = rho_(r1, c);
                rho_(r, c) = u00 * a0 + u01 * a1;
                rho_(r1, c) = u10 * a0 + u11 * a1;
            }
        // right multiply by U^dagger: columns
        const Complex v00 = std::conj(u00), v01 = std::conj(u01);
        const Complex v10 = std::conj(u10), v11 = std::conj(u11);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) {
                if (c & mask) continue;
                const std::size_t c1 = c | mask;
                const Complex a0 = rho_(r, c), a1 = rho_(r, c1);
                rho_(r, c) = a0 * v00 + a1 * v01;
                rho_(r, c1) = a0 * v10 + a1 * v11;
            }
    }

    void apply_ry(int qubit, Scalar theta) {
        const Scalar c = std::cos(theta / 2), s = std::sin(theta / 2);
        apply_1q(qubit, Complex(c, 0), Complex(-s, 0), Complex(s, 0), Complex(c, 0));
    }

    void apply_rz(int qubit, Scalar theta) {
        const Complex p0(std::cos(theta / 2), -std::sin(theta / 2));
        apply_1q(qubit, p0, Complex(0, 0), Complex(0, 0), std::conj(p0));
    }

    void apply_cnot(int control, int target) {
        const std::size_t cm = std::size_t(1) << control;
        const std::size_t tm = std::size_t(1) << target;
        const std::size_t dim = rho_.rows();
        auto flip = [&](std::size_t k) { return (k & cm) ? (k ^ tm) : k; };
        ComplexMatrix<Scalar> out(dim, dim);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) out(flip(r), flip(c)) = rho_(r, c);
        rho_.swap(out);
    }

    Scalar expval_z(int qubit) const {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = rho_.rows();
        Scalar acc = 0;
        for (std::size_t k = 0; k < dim; ++k) {
            const Scalar p = rho_(k, k).real();
            acc += (k & mask) ? -p : p;
        }
        return acc;
    }

  private:
    int n_;
    ComplexMatrix<Scalar> rho_;
};

/// Single-qubit depolarizing channel on `qubit`:
///   E(rho) = (1 - p) rho + p/3 (X rho X + Y rho Y + Z rho Z).
/// Closed form per 2x2 sub-block in the target qubit's indices:
/// populations mix with weight 2p/3, coherences contract by (1 - 4p/3).
template <typename Scalar = double>
void depolarize_qubit(DensityMatrix<Scalar> &rho, int qubit, Scalar p_d) {
    if (p_d < 0 || p_d > Scalar(0.75))
        throw ConfigError("depolarize_qubit: p_d must lie in [0, 0.75]");
    if (qubit < 0 || qubit >= rho.n_qubits())
        throw ConfigError("depolarize_qubit: qubit index out of range");
    if (p_d == Scalar(0)) return;
    using Complex = std::complex<Scalar>;
    const Scalar keep = 1 - 2 * p_d / 3;
    const Scalar swap = 2 * p_d / 3;
    const Scalar coh = 1 - 4 * p_d / 3;
    auto &m = rho.matrix();
    const std::size_t mask = std::size_t(1) << qubit;
    const std::size_t dim = m.rows();
    for (std::size_t r = 0; r < dim; ++r) {
        if (r & mask) continue;
        const std::size_t r1 = r | mask;
        for (std::size_t c = 0; c < dim; ++c) {
            if (c & mask) continue;
            const std::size_t c1 = c | mask;
            const Complex b00 = m(r, c), b01 = m(r, c1);
            const Complex b10 = m(r1, c), b11 = m(r1, c1);
            m(r, c) = keep * b00 + swap * b11;
            m(r1, c1) = keep * b11 + swap * b00;
            m(r, c1) = coh * b01;
            m(r1, c) = coh * b10;
        }
    }
}

/// Density-matrix evolution of the ansatz with depolarizing noise on every
/// qubit after each layer; returns <Z_i> for all qubits.
template <typename Scalar = double>
RealVector<Scalar> run_block_noisy(const RealVector<Scalar> &x, const ParamBlock<Scalar> &params,
                                   const EntanglerSchedule &schedule, const NoiseConfig &noise) {
    const int n = params.n_qubits, d = params.depth;
    if (x.size() != n)
        throw ConfigError("run_block_noisy: input length must equal qubit count");
    if (n >= 2 && int(schedule.offsets.size()) != d)
        throw ConfigError("run_block_noisy: schedule length must equal depth");
    auto rho = DensityMatrix<Scalar>::from_pure(embed_input(x));
    for (int l = 0; l < d; ++l) {
        for (int q = 0; q < n; ++q) {
            rho.apply_rz(q, params.at(l, q, 0));
            rho.apply_ry(q, params.at(l, q, 1));
            rho.apply_rz(q, params.at(l, q, 2));
        }
        if (n >= 2) {
            const int off = schedule.offsets[l];
            for (int q = 0; q < n; ++q) rho.apply_cnot(q, (q + off) % n);
        }
        for (int q = 0; q < n; ++q) depolarize_qubit(rho, q, Scalar(noise.p_d));
    }
    RealVector<Scalar> z(n);
    for (int q = 0; q < n; ++q) z[q] = rho.expval_z(q);
    return z;
}

/// Same evolution driven by a flat gate list (used by parameter-shift on the
/// noisy simulator). Noise is inserted after each layer's final CNOT (or
/// after each rotation triple when n = 1), i.e. wherever the layer ends.
template <typename Scalar = double>
RealVector<Scalar> run_ops_noisy(int n_qubits, int depth, const std::vector<GateOp> &ops,
                                 const NoiseConfig &noise) {
    DensityMatrix<Scalar> rho(n_qubits);
    // embedding gates are the first n ops
    std::size_t idx = 0;
    for (; idx < ops.size() && ops[idx].param_index >= 3 * n_qubits * depth; ++idx) {
        rho.apply_ry(ops[idx].qubit, Scalar(ops[idx].angle));
    }
    const std::size_t per_layer = (ops.size() - idx) / std::size_t(depth);
    for (int l = 0; l < depth; ++l) {
        for (std::size_t k = 0; k < per_layer; ++k, ++idx) {
            const GateOp &op = ops[idx];
            switch (op.kind) {
            case GateOp::Kind::RY: rho.apply_ry(op.qubit, Scalar(op.angle)); break;
            case GateOp::Kind::RZ: rho.apply_rz(op.qubit, Scalar(op.angle)); break;
            case GateOp::Kind::CNOT: rho.apply_cnot(op.control, op.qubit); break;
            }
        }
        for (int q = 0; q < n_qubits; ++q) depolarize_qubit(rho, q, Scalar(noise.p_d));
    }
    RealVector<Scalar> z(n_qubits);
    for (int q = 0; q < n_qubits; ++q) z[q] = rho.expval_z(q);
    return z;
}

} // namespace vqc
