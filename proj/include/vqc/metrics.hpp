#pragma once

#include "vqc/common.hpp"
#include "vqc/models.hpp"

namespace vqc {

/// Test-set metrics; regression values are in original target units.
struct Metrics {
    double r2 = 0, rmse = 0, mae = 0;        // regression
    double accuracy = 0, macro_f1 = 0;       // classification
};

/// R^2 = 1 - SS_res/SS_tot, RMSE, MAE for regression; accuracy and
/// macro-averaged F1 for classification (classes absent from both
/// predictions and truth are excluded; truth-only classes count F1 = 0).
Metrics evaluate_metrics(const VectorXd &preds, const VectorXd &truth, Task task);

} // namespace vqc
