#pragma once

#include "vqc/common.hpp"

#include <cmath>

namespace vqc {

/// Scale gradients so the global L2 norm never exceeds max_norm.
inline void clip_global_norm(VectorXd &grads, double max_norm = 1.0) {
    const double norm = grads.norm();
    if (norm > max_norm) grads *= max_norm / norm;
}

/// Bias-corrected Adam, no weight decay.
struct AdamState {
    double learning_rate = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    VectorXd m;
    VectorXd v;
    long step = 0;

    explicit AdamState(Eigen::Index n_params, double lr = 0.005)
        : learning_rate(lr), m(VectorXd::Zero(n_params)), v(VectorXd::Zero(n_params)) {}
};

inline void adam_step(VectorXd &params, const VectorXd &grads, AdamState &state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw ConfigError("adam_step: parameter/gradient/state sizes differ");
    ++state.step;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.cwiseProduct(grads);
    const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
    params -= (state.learning_rate / bc1) *
              state.m.cwiseQuotient(((state.v / bc2).cwiseSqrt().array() + state.epsilon).matrix());
}

} // namespace vqc
