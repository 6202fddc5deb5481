#pragma once

// Independent test oracles. Everything here recomputes expected values by a
// different route than the library code under test: dense Kronecker-product
// unitaries for gate application, explicit Kraus sums for channels, central
// finite differences for gradients, and brute-force metric formulas.

#include "vqc/ansatz.hpp"
#include "vqc/common.hpp"
#include "vqc/rng.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

using vqc::MatrixXcd;
using vqc::MatrixXd;
using vqc::VectorXcd;
using vqc::VectorXd;
using cplx = std::complex<double>;

inline MatrixXcd kron(const MatrixXcd &a, const MatrixXcd &b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline MatrixXcd identity2() { return MatrixXcd::Identity(2, 2); }

inline MatrixXcd ry_matrix(double t) {
    MatrixXcd m(2, 2);
    m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
    return m;
}

inline MatrixXcd rz_matrix(double t) {
    MatrixXcd m = MatrixXcd::Zero(2, 2);
    m(0, 0) = std::exp(cplx(0, -t / 2));
    m(1, 1) = std::exp(cplx(0, t / 2));
    return m;
}

inline MatrixXcd pauli(char which) {
    MatrixXcd m = MatrixXcd::Zero(2, 2);
    switch (which) {
    case 'X': m(0, 1) = 1; m(1, 0) = 1; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1; m(1, 1) = -1; break;
    default: m = identity2();
    }
    return m;
}

/// Lift a 2x2 gate onto qubit q of an n-qubit register (little-endian:
/// qubit 0 = least significant, so it sits rightmost in the kron chain).
inline MatrixXcd lift_1q(const MatrixXcd &u, int qubit, int n) {
    MatrixXcd out = MatrixXcd::Identity(1, 1);
    for (int q = n - 1; q >= 0; --q) out = kron(out, q == qubit ? u : identity2());
    return out;
}

/// Dense CNOT built index-by-index from the bit rule target ^= control.
inline MatrixXcd cnot_matrix(int control, int target, int n) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    MatrixXcd out = MatrixXcd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        Eigen::Index dst = k;
        if (k & (Eigen::Index(1) << control)) dst = k ^ (Eigen::Index(1) << target);
        out(dst, k) = 1;
    }
    return out;
}

/// Full 2^n x 2^n unitary of the embedding + ansatz block.
inline MatrixXcd block_unitary(const VectorXd &x, const vqc::ParamBlock<double> &params,
                               const vqc::EntanglerSchedule &schedule) {
    const int n = params.n_qubits;
    const Eigen::Index dim = Eigen::Index(1) << n;
    MatrixXcd u = MatrixXcd::Identity(dim, dim);
    for (int q = 0; q < n; ++q) u = lift_1q(ry_matrix(x[q]), q, n) * u;
    for (int l = 0; l < params.depth; ++l) {
        for (int q = 0; q < n; ++q) {
            u = lift_1q(rz_matrix(params.at(l, q, 0)), q, n) * u;
            u = lift_1q(ry_matrix(params.at(l, q, 1)), q, n) * u;
            u = lift_1q(rz_matrix(params.at(l, q, 2)), q, n) * u;
        }
        if (n >= 2) {
            const int off = schedule.offsets[std::size_t(l)];
            for (int q = 0; q < n; ++q) u = cnot_matrix(q, (q + off) % n, n) * u;
        }
    }
    return u;
}

/// Kraus-sum depolarizing channel on one qubit of a dense density matrix:
/// E(rho) = (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z).
inline MatrixXcd kraus_depolarize(const MatrixXcd &rho, int qubit, double p, int n) {
    const MatrixXcd x = lift_1q(pauli('X'), qubit, n);
    const MatrixXcd y = lift_1q(pauli('Y'), qubit, n);
    const MatrixXcd z = lift_1q(pauli('Z'), qubit, n);
    return (1 - p) * rho + p / 3.0 * (x * rho * x.adjoint() + y * rho * y.adjoint() +
                                      z * rho * z.adjoint());
}

/// Dense reference for the full noisy block evolution.
inline VectorXd noisy_block_reference(const VectorXd &x, const vqc::ParamBlock<double> &params,
                                      const vqc::EntanglerSchedule &schedule, double p) {
    const int n = params.n_qubits;
    const Eigen::Index dim = Eigen::Index(1) << n;
    VectorXcd psi = VectorXcd::Zero(dim);
    psi[0] = 1;
    for (int q = 0; q < n; ++q) psi = lift_1q(ry_matrix(x[q]), q, n) * psi;
    MatrixXcd rho = psi * psi.adjoint();
    for (int l = 0; l < params.depth; ++l) {
        for (int q = 0; q < n; ++q) {
            rho = lift_1q(rz_matrix(params.at(l, q, 0)), q, n) * rho *
                  lift_1q(rz_matrix(params.at(l, q, 0)), q, n).adjoint();
            rho = lift_1q(ry_matrix(params.at(l, q, 1)), q, n) * rho *
                  lift_1q(ry_matrix(params.at(l, q, 1)), q, n).adjoint();
            rho = lift_1q(rz_matrix(params.at(l, q, 2)), q, n) * rho *
                  lift_1q(rz_matrix(params.at(l, q, 2)), q, n).adjoint();
        }
        if (n >= 2) {
            const int off = schedule.offsets[std::size_t(l)];
            for (int q = 0; q < n; ++q) {
                const MatrixXcd c = cnot_matrix(q, (q + off) % n, n);
                rho = c * rho * c.adjoint();
            }
        }
        for (int q = 0; q < n; ++q) rho = kraus_depolarize(rho, q, p, n);
    }
    VectorXd zexp(n);
    for (int q = 0; q < n; ++q) {
        const MatrixXcd zq = lift_1q(pauli('Z'), q, n);
        zexp[q] = (zq * rho).trace().real();
    }
    return zexp;
}

/// Central finite differences of a scalar function.
inline VectorXd finite_difference(const std::function<double(const VectorXd &)> &f,
                                  const VectorXd &at, double h = 1e-4) {
    VectorXd g(at.size());
    VectorXd p = at;
    for (Eigen::Index i = 0; i < at.size(); ++i) {
        p[i] = at[i] + h;
        const double fp = f(p);
        p[i] = at[i] - h;
        const double fm = f(p);
        p[i] = at[i];
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

/// Brute-force metrics written independently of vqc::evaluate_metrics.
struct BruteMetrics {
    double r2, rmse, mae, accuracy, macro_f1;
};

inline BruteMetrics brute_force_metrics(const VectorXd &pred, const VectorXd &truth) {
    BruteMetrics m{};
    const int n = int(pred.size());
    double se = 0, ae = 0, mean = 0;
    for (int i = 0; i < n; ++i) mean += truth[i];
    mean /= n;
    double tot = 0;
    for (int i = 0; i < n; ++i) {
        se += (pred[i] - truth[i]) * (pred[i] - truth[i]);
        ae += std::abs(pred[i] - truth[i]);
        tot += (truth[i] - mean) * (truth[i] - mean);
    }
    m.rmse = std::sqrt(se / n);
    m.mae = ae / n;
    m.r2 = 1.0 - se / tot;

    int correct = 0;
    std::map<long, long> tp, fp, fn;
    for (int i = 0; i < n; ++i) {
        const long p = std::lround(pred[i]);
        const long t = std::lround(truth[i]);
        if (p == t) {
            ++correct;
            ++tp[t];
        } else {
            ++fp[p];
            ++fn[t];
        }
    }
    m.accuracy = double(correct) / n;
    std::map<long, bool> classes;
    for (auto &[k, v] : tp) classes[k] = true;
    for (auto &[k, v] : fp) classes[k] = true;
    for (auto &[k, v] : fn) classes[k] = true;
    double sum = 0;
    int cnt = 0;
    for (auto &[cls, unused] : classes) {
        const double tpv = double(tp[cls]), fpv = double(fp[cls]), fnv = double(fn[cls]);
        const double prec = tpv + fpv > 0 ? tpv / (tpv + fpv) : 0;
        const double rec = tpv + fnv > 0 ? tpv / (tpv + fnv) : 0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
        ++cnt;
    }
    m.macro_f1 = cnt ? sum / cnt : 0;
    return m;
}

inline VectorXd random_vector(Eigen::Index n, vqc::CounterRng &rng, double lo, double hi) {
    VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
    return v;
}

} // namespace oracle
