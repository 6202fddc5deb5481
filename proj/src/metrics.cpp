#include "vqc/metrics.hpp"

#include <cmath>
#include <map>

namespace vqc {

Metrics evaluate_metrics(const VectorXd &preds, const VectorXd &truth, Task task) {
    if (preds.size() != truth.size())
        throw ConfigError("evaluate_metrics: prediction/truth lengths differ");
    if (preds.size() == 0) throw ConfigError("evaluate_metrics: empty input");
    Metrics m;
    const Eigen::Index n = preds.size();
    if (task == Task::Regression) {
        const double mean = truth.mean();
        const double ss_res = (preds - truth).squaredNorm();
        const double ss_tot = (truth.array() - mean).square().sum();
        m.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
        m.rmse = std::sqrt(ss_res / double(n));
        m.mae = (preds - truth).cwiseAbs().mean();
        return m;
    }
    long correct = 0;
    std::map<long, std::array<long, 3>> perclass; // class -> {tp, fp, fn}
    for (Eigen::Index i = 0; i < n; ++i) {
        const long p = std::lround(preds[i]);
        const long t = std::lround(truth[i]);
        if (p == t) {
            ++correct;
            ++perclass[t][0];
        } else {
            ++perclass[p][1];
            ++perclass[t][2];
        }
    }
    m.accuracy = double(correct) / double(n);
    double f1_sum = 0;
    long f1_count = 0;
    for (const auto &[cls, c] : perclass) {
        const auto [tp, fp, fn] = c;
        if (tp + fp + fn == 0) continue; // absent from both sides
        const double denom = double(2 * tp + fp + fn);
        f1_sum += denom > 0 ? 2.0 * double(tp) / denom : 0.0;
        ++f1_count;
    }
    m.macro_f1 = f1_count > 0 ? f1_sum / double(f1_count) : 0.0;
    return m;
}

} // namespace vqc
