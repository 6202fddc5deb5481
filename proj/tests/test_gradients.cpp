#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "vqc/gradients.hpp"
#include "vqc/rng.hpp"

#include <cmath>

using namespace vqc;

namespace {

ParamBlock<double> random_block(int d, int n, std::uint64_t seed) {
    ParamBlock<double> b(d, n);
    CounterRng rng(seed);
    for (Eigen::Index i = 0; i < b.angles.size(); ++i)
        b.angles[i] = rng.uniform(0.0, 6.2831853071795864769);
    return b;
}

/// Finite-difference Jacobian of <Z_i> w.r.t. block angles and inputs.
Jacobian<double> fd_jacobian(const VectorXd &x, const ParamBlock<double> &params,
                             const EntanglerSchedule &sched, double h = 1e-4) {
    const int n = params.n_qubits;
    Jacobian<double> jac;
    jac.d_params.resize(n, params.size());
    jac.d_inputs.resize(n, n);
    for (int q = 0; q < n; ++q) {
        auto fq_params = [&](const VectorXd &theta) {
            ParamBlock<double> b(params.depth, n, theta);
            return run_block(x, b, sched)[q];
        };
        jac.d_params.row(q) =
            oracle::finite_difference(fq_params, params.angles, h).transpose();
        auto fq_inputs = [&](const VectorXd &xin) { return run_block(xin, params, sched)[q]; };
        jac.d_inputs.row(q) = oracle::finite_difference(fq_inputs, x, h).transpose();
    }
    return jac;
}

Jacobian<double> fd_noisy_jacobian(const VectorXd &x, const ParamBlock<double> &params,
                                   const EntanglerSchedule &sched, const NoiseConfig &noise,
                                   double h = 1e-4) {
    const int n = params.n_qubits;
    Jacobian<double> jac;
    jac.d_params.resize(n, params.size());
    jac.d_inputs.resize(n, n);
    for (int q = 0; q < n; ++q) {
        auto fq_params = [&](const VectorXd &theta) {
            ParamBlock<double> b(params.depth, n, theta);
            return run_block_noisy(x, b, sched, noise)[q];
        };
        jac.d_params.row(q) =
            oracle::finite_difference(fq_params, params.angles, h).transpose();
        auto fq_inputs = [&](const VectorXd &xin) {
            return run_block_noisy(xin, params, sched, noise)[q];
        };
        jac.d_inputs.row(q) = oracle::finite_difference(fq_inputs, x, h).transpose();
    }
    return jac;
}

double max_abs_diff(const MatrixXd &a, const MatrixXd &b) {
    return (a - b).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("single RY angle: d<Z>/da = -sin(a) via both differentiators") {
    for (double a : {0.0, 0.4, 1.3, 2.7, -1.1}) {
        ParamBlock<double> block(1, 1);
        block.at(0, 0, 1) = a;
        const auto sched = EntanglerSchedule::ring_shift(1, 1);
        const VectorXd x = VectorXd::Zero(1);
        const auto shift = parameter_shift_jacobian(x, block, sched);
        const auto adj = adjoint_jacobian(x, block, sched);
        CHECK(shift.d_params(0, 1) == doctest::Approx(-std::sin(a)).epsilon(1e-12));
        CHECK(adj.d_params(0, 1) == doctest::Approx(-std::sin(a)).epsilon(1e-12));
        // RZ angles do not move <Z> here
        CHECK(std::abs(shift.d_params(0, 0)) < 1e-12);
        CHECK(std::abs(shift.d_params(0, 2)) < 1e-12);
    }
}

TEST_CASE("at theta = 0 the last-layer RY gradients vanish") {
    ParamBlock<double> block(2, 3);
    const auto sched = EntanglerSchedule::ring_shift(3, 2);
    const VectorXd x = VectorXd::Zero(3);
    const auto jac = adjoint_jacobian(x, block, sched);
    for (int q = 0; q < 3; ++q) {
        const int idx = ((2 - 1) * 3 + q) * 3 + 1; // last layer, qubit q, RY
        CHECK(std::abs(jac.d_params(q, idx)) < 1e-12);
    }
}

TEST_CASE("adjoint equals parameter-shift to 1e-10 on random instances") {
    CounterRng rng(21);
    for (int n : {1, 2, 3}) {
        for (int d : {1, 2, 3}) {
            const auto block = random_block(d, n, rng.next_u64());
            const auto sched = EntanglerSchedule::ring_shift(n, d);
            const VectorXd x = oracle::random_vector(n, rng, -2.0, 2.0);
            const auto shift = parameter_shift_jacobian(x, block, sched);
            const auto adj = adjoint_jacobian(x, block, sched);
            CHECK(max_abs_diff(shift.d_params, adj.d_params) < 1e-10);
            CHECK(max_abs_diff(shift.d_inputs, adj.d_inputs) < 1e-10);
        }
    }
}

TEST_CASE("parameter-shift agrees with central finite differences") {
    CounterRng rng(22);
    const auto block = random_block(3, 3, rng.next_u64());
    const auto sched = EntanglerSchedule::ring_shift(3, 3);
    const VectorXd x = oracle::random_vector(3, rng, -2.0, 2.0);
    const auto shift = parameter_shift_jacobian(x, block, sched);
    const auto fd = fd_jacobian(x, block, sched);
    CHECK(max_abs_diff(shift.d_params, fd.d_params) < 1e-5);
    CHECK(max_abs_diff(shift.d_inputs, fd.d_inputs) < 1e-5);
}

TEST_CASE("adjoint = shift = finite differences across n in {1,3,5}, d in {1,2,3}") {
    CounterRng rng(23);
    for (int n : {1, 3, 5}) {
        for (int d : {1, 2, 3}) {
            const auto block = random_block(d, n, rng.next_u64());
            const auto sched = EntanglerSchedule::ring_shift(n, d);
            const VectorXd x = oracle::random_vector(n, rng, -2.0, 2.0);
            const auto adj = adjoint_jacobian(x, block, sched);
            const auto shift = parameter_shift_jacobian(x, block, sched);
            const auto fd = fd_jacobian(x, block, sched);
            CHECK(max_abs_diff(adj.d_params, shift.d_params) < 1e-10);
            CHECK(max_abs_diff(adj.d_params, fd.d_params) < 1e-5);
            CHECK(max_abs_diff(adj.d_inputs, fd.d_inputs) < 1e-5);
            CHECK(shift.d_params.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("input-angle gradient of a bare embedding is -sin(x)") {
    ParamBlock<double> block(1, 1); // identity block
    const auto sched = EntanglerSchedule::ring_shift(1, 1);
    VectorXd x(1);
    x << 1.5707963267948966;
    const auto adj = adjoint_jacobian(x, block, sched);
    CHECK(adj.d_inputs(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("adjoint_jacobian also returns the forward value") {
    CounterRng rng(24);
    const auto block = random_block(2, 3, rng.next_u64());
    const auto sched = EntanglerSchedule::ring_shift(3, 2);
    const VectorXd x = oracle::random_vector(3, rng, -2.0, 2.0);
    VectorXd value;
    adjoint_jacobian(x, block, sched, &value);
    CHECK((value - run_block(x, block, sched)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("noisy jacobian at p = 0 equals parameter-shift") {
    CounterRng rng(25);
    const auto block = random_block(2, 3, rng.next_u64());
    const auto sched = EntanglerSchedule::ring_shift(3, 2);
    const VectorXd x = oracle::random_vector(3, rng, -2.0, 2.0);
    const auto noisy = noisy_jacobian(x, block, sched, NoiseConfig(0.0));
    const auto shift = parameter_shift_jacobian(x, block, sched);
    CHECK(max_abs_diff(noisy.d_params, shift.d_params) < 1e-10);
    CHECK(max_abs_diff(noisy.d_inputs, shift.d_inputs) < 1e-10);
}

TEST_CASE("single-qubit noisy gradient picks up the contraction factor") {
    const double p = 0.07;
    for (double a : {0.5, 1.9, -0.8}) {
        ParamBlock<double> block(1, 1);
        block.at(0, 0, 1) = a;
        const auto sched = EntanglerSchedule::ring_shift(1, 1);
        const auto jac = noisy_jacobian(VectorXd::Zero(1).eval(), block, sched, NoiseConfig(p));
        CHECK(jac.d_params(0, 1) ==
              doctest::Approx(-(1 - 4 * p / 3) * std::sin(a)).epsilon(1e-12));
    }
}

TEST_CASE("noisy jacobian agrees with finite differences on the noisy simulator") {
    CounterRng rng(26);
    const auto block = random_block(2, 3, rng.next_u64());
    const auto sched = EntanglerSchedule::ring_shift(3, 2);
    const VectorXd x = oracle::random_vector(3, rng, -2.0, 2.0);
    const NoiseConfig noise(0.05);
    VectorXd value;
    const auto jac = noisy_jacobian(x, block, sched, noise, &value);
    CHECK((value - run_block_noisy(x, block, sched, noise)).cwiseAbs().maxCoeff() < 1e-12);
    const auto fd = fd_noisy_jacobian(x, block, sched, noise);
    CHECK(max_abs_diff(jac.d_params, fd.d_params) < 1e-5);
    CHECK(max_abs_diff(jac.d_inputs, fd.d_inputs) < 1e-5);
}
