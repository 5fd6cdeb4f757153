#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "noisespec/matrix.hpp"

namespace noisespec::metrics {

struct RegressionReport {
    double mse = 0.0;
    double mae = 0.0;
    std::optional<double> r2;  // empty when the truth has zero variance
    std::vector<double> residuals;

    nlohmann::json to_json() const;
};

RegressionReport regression_metrics(const Vector& y_true, const Vector& y_pred);

struct ClassificationReport {
    int n_classes = 3;
    double accuracy = 0.0;
    std::vector<double> precision, recall, f1;
    std::vector<bool> no_predictions;  // precision forced to 0 for that class
    std::vector<int> support;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    std::vector<std::vector<long>> confusion;          // [true][pred]
    std::vector<std::vector<double>> confusion_norm;   // rows sum to 1 for non-empty classes

    nlohmann::json to_json() const;
};

ClassificationReport classification_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                            int n_classes = 3);

} // namespace noisespec::metrics
