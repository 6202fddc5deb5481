#include "vqc/expressibility.hpp"

#include "vqc/ansatz.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace vqc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

StateVector<double> random_circuit_state(int n, int d, const EntanglerSchedule &sched,
                                         CounterRng &rng) {
    ParamBlock<double> block(d, n);
    for (Eigen::Index i = 0; i < block.angles.size(); ++i)
        block.angles[i] = rng.uniform(0.0, kTwoPi);
    return apply_block(embed_input(VectorXd::Zero(n).eval()), block, sched);
}

} // namespace

std::vector<double> sample_fidelities(int n_qubits, int depth, int n_samples, CounterRng rng) {
    if (n_samples < 1) throw ConfigError("sample_fidelities: n_samples must be >= 1");
    const EntanglerSchedule sched = EntanglerSchedule::ring_shift(n_qubits, depth);
    std::vector<double> out(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        CounterRng stream = rng.stream(std::uint64_t(s));
        const auto psi1 = random_circuit_state(n_qubits, depth, sched, stream);
        const auto psi2 = random_circuit_state(n_qubits, depth, sched, stream);
        out[std::size_t(s)] = fidelity(psi1, psi2);
    }
    return out;
}

std::vector<double> linear_baseline_fidelities(int n_qubits, int n_samples, CounterRng rng) {
    if (n_samples < 1) throw ConfigError("linear_baseline_fidelities: n_samples must be >= 1");
    // fixed random probe, scaled to the RMS of a standardized feature vector
    CounterRng probe_rng = rng.stream(0xFACADE);
    VectorXd x0(n_qubits);
    for (int i = 0; i < n_qubits; ++i) x0[i] = probe_rng.normal();
    x0 *= std::sqrt(double(n_qubits)) / x0.norm();
    // "random parameters" of a linear map = its conventional initialization
    const double bound = 1.0 / std::sqrt(double(n_qubits));
    std::vector<double> out(static_cast<std::size_t>(n_samples));
    for (int s = 0; s < n_samples; ++s) {
        CounterRng stream = rng.stream(std::uint64_t(s) + 1);
        auto draw_state = [&]() {
            VectorXd angles = VectorXd::Zero(n_qubits);
            for (int r = 0; r < n_qubits; ++r)
                for (int c = 0; c < n_qubits; ++c)
                    angles[r] += stream.uniform(-bound, bound) * x0[c];
            return embed_input(angles);
        };
        const auto psi1 = draw_state();
        const auto psi2 = draw_state();
        out[std::size_t(s)] = fidelity(psi1, psi2);
    }
    return out;
}

std::vector<double> haar_bin_masses(int n_qubits, int n_bins) {
    // CDF(F) = 1 - (1-F)^{N-1}
    const double nm1 = std::pow(2.0, n_qubits) - 1.0;
    std::vector<double> mass(static_cast<std::size_t>(n_bins));
    double prev = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const double hi = double(b + 1) / double(n_bins);
        const double cdf = b + 1 == n_bins ? 1.0 : 1.0 - std::pow(1.0 - hi, nm1);
        mass[std::size_t(b)] = cdf - prev;
        prev = cdf;
    }
    return mass;
}

double kl_vs_haar(const std::vector<double> &fidelities, int n_qubits, int n_bins) {
    if (fidelities.empty()) throw ConfigError("kl_vs_haar: empty fidelity sample");
    std::vector<double> p(static_cast<std::size_t>(n_bins), 0.0);
    for (double f : fidelities) {
        int b = int(f * n_bins);
        if (b >= n_bins) b = n_bins - 1;
        if (b < 0) b = 0;
        p[std::size_t(b)] += 1.0;
    }
    for (double &v : p) v /= double(fidelities.size());
    const std::vector<double> q = haar_bin_masses(n_qubits, n_bins);
    double kl = 0.0;
    for (int b = 0; b < n_bins; ++b)
        if (p[std::size_t(b)] > 0) kl += p[std::size_t(b)] * std::log(p[std::size_t(b)] / q[std::size_t(b)]);
    return kl;
}

namespace {

ExpressibilityReport make_report(int n_qubits, int depth, int n_samples, int n_bins,
                                 std::uint64_t seed, const std::vector<double> &fid) {
    ExpressibilityReport r;
    r.n_qubits = n_qubits;
    r.depth = depth;
    r.n_samples = n_samples;
    r.n_bins = n_bins;
    r.seed = seed;
    r.histogram.assign(std::size_t(n_bins), 0.0);
    for (double f : fid) {
        int b = int(f * n_bins);
        if (b >= n_bins) b = n_bins - 1;
        r.histogram[std::size_t(std::max(b, 0))] += 1.0 / double(fid.size());
    }
    r.haar_histogram = haar_bin_masses(n_qubits, n_bins);
    r.kl = kl_vs_haar(fid, n_qubits, n_bins);
    return r;
}

} // namespace

ExpressibilityReport expressibility_report(int n_qubits, int depth, int n_samples, int n_bins,
                                           std::uint64_t seed) {
    CounterRng rng = CounterRng(seed).stream(std::uint64_t(depth));
    const auto fid = sample_fidelities(n_qubits, depth, n_samples, rng);
    return make_report(n_qubits, depth, n_samples, n_bins, seed, fid);
}

ExpressibilityReport linear_baseline_report(int n_qubits, int n_samples, int n_bins,
                                            std::uint64_t seed) {
    CounterRng rng = CounterRng(seed).stream(0x11Eu);
    const auto fid = linear_baseline_fidelities(n_qubits, n_samples, rng);
    return make_report(n_qubits, 0, n_samples, n_bins, seed, fid);
}

nlohmann::ordered_json expressibility_report_to_json(const ExpressibilityReport &r) {
    nlohmann::ordered_json j;
    j["schema"] = "vqcbench.expressibility/1";
    j["circuit"] = r.depth == 0 ? "linear_baseline" : "vqc";
    j["n_qubits"] = r.n_qubits;
    j["depth"] = r.depth;
    j["n_samples"] = r.n_samples;
    j["n_bins"] = r.n_bins;
    j["seed"] = r.seed;
    j["kl"] = r.kl;
    j["histogram"] = r.histogram;
    j["haar_histogram"] = r.haar_histogram;
    return j;
}

} // namespace vqc
