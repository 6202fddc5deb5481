#pragma once

#include "vqc/common.hpp"
#include "vqc/rng.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace vqc {

/// KL divergence of the ansatz's random-parameter fidelity distribution
/// from the Haar reference P(F) = (N-1)(1-F)^{N-2}, N = 2^n.
struct ExpressibilityReport {
    int n_qubits = 0;
    int depth = 0; // 0 marks the classical linear-projection baseline
    int n_samples = 0;
    int n_bins = 0;
    std::uint64_t seed = 0;
    std::vector<double> histogram;      // empirical bin masses, sum 1
    std::vector<double> haar_histogram; // closed-form bin masses, sum 1
    double kl = 0;
};

/// Fidelities |<psi(t1)|psi(t2)>|^2 of independently drawn angle pairs,
/// uniform on [0, 2pi)^{3nd}, on the zero-input embedded state.
std::vector<double> sample_fidelities(int n_qubits, int depth, int n_samples, CounterRng rng);

/// Product-state baseline: angles come from random linear maps W1 x0, W2 x0
/// (standard-normal W entries, a fixed random probe x0 per rng stream).
std::vector<double> linear_baseline_fidelities(int n_qubits, int n_samples, CounterRng rng);

/// Exact per-bin Haar masses on [0,1] from the CDF 1 - (1-F)^{N-1}.
std::vector<double> haar_bin_masses(int n_qubits, int n_bins);

/// Natural-log KL over equal-width bins; empty empirical bins contribute 0.
double kl_vs_haar(const std::vector<double> &fidelities, int n_qubits, int n_bins = 75);

ExpressibilityReport expressibility_report(int n_qubits, int depth, int n_samples, int n_bins,
                                           std::uint64_t seed);
ExpressibilityReport linear_baseline_report(int n_qubits, int n_samples, int n_bins,
                                            std::uint64_t seed);

nlohmann::ordered_json expressibility_report_to_json(const ExpressibilityReport &r);

} // namespace vqc
