#pragma once

#include "vqc/common.hpp"

#include <cmath>
#include <cstddef>

namespace vqc {

/// Pure n-qubit state: 2^n complex amplitudes, little-endian qubit order
/// (qubit 0 is the least-significant bit of the basis index).
template <typename Scalar = double>
class StateVector {
  public:
    using Complex = std::complex<Scalar>;

    explicit StateVector(int n_qubits)
        : n_(n_qubits), amp_(ComplexVector<Scalar>::Zero(std::size_t(1) << n_qubits)) {
        if (n_qubits < 1)
            throw ConfigError("StateVector: n_qubits must be >= 1");
        amp_[0] = Complex(1, 0);
    }

    int n_qubits() const { return n_; }
    Eigen::Index size() const { return amp_.size(); }
    const ComplexVector<Scalar> &amplitudes() const { return amp_; }
    ComplexVector<Scalar> &amplitudes() { return amp_; }

    Scalar norm_sq() const { return amp_.squaredNorm(); }

    /// RY(theta) on `qubit`: real 2x2 rotation [[c,-s],[s,c]], c=cos(t/2).
    void apply_ry(int qubit, Scalar theta) {
        const Scalar c = std::cos(theta / 2), s = std::sin(theta / 2);
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            const std::size_t j = i | mask;
            const Complex a0 = amp_[i], a1 = amp_[j];
            amp_[i] = c * a0 - s * a1;
            amp_[j] = s * a0 + c * a1;
        }
    }

    /// RZ(theta) on `qubit`: diag(e^{-i t/2}, e^{+i t/2}).
    void apply_rz(int qubit, Scalar theta) {
        const Complex p0(std::cos(theta / 2), -std::sin(theta / 2));
        const Complex p1 = std::conj(p0);
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        for (std::size_t i = 0; i < dim; ++i)
            amp_[i] *= (i & mask) ? p1 : p0;
    }

    void apply_cnot(int control, int target) {
        const std::size_t cm = std::size_t(1) << control;
        const std::size_t tm = std::size_t(1) << target;
        const std::size_t dim = amp_.size();
        for (std::size_t i = 0; i < dim; ++i)
            if ((i & cm) && !(i & tm)) std::swap(amp_[i], amp_[i | tm]);
    }

    /// Pauli on `qubit` (X, Y or Z), used by adjoint gradients.
    void apply_pauli_x(int qubit) {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        for (std::size_t i = 0; i < dim; ++i)
            if (!(i & mask)) std::swap(amp_[i], amp_[i | mask]);
    }

    void apply_pauli_y(int qubit) {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        const Complex im(0, 1);
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & mask) continue;
            const std::size_t j = i | mask;
            const Complex a0 = amp_[i], a1 = amp_[j];
            amp_[i] = -im * a1;
            amp_[j] = im * a0;
        }
    }

    void apply_pauli_z(int qubit) {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        for (std::size_t i = 0; i < dim; ++i)
            if (i & mask) amp_[i] = -amp_[i];
    }

    /// <Z_q> = sum_k (-1)^{bit_q(k)} |a_k|^2.
    Scalar expval_z(int qubit) const {
        const std::size_t mask = std::size_t(1) << qubit;
        const std::size_t dim = amp_.size();
        Scalar acc = 0;
        for (std::size_t i = 0; i < dim; ++i) {
            const Scalar p = std::norm(amp_[i]);
            acc += (i & mask) ? -p : p;
        }
        return acc;
    }

  private:
    int n_;
    ComplexVector<Scalar> amp_;
};

} // namespace vqc
