#include "noisespec/metrics.hpp"

#include <cmath>

#include "noisespec/error.hpp"

namespace noisespec::metrics {

RegressionReport regression_metrics(const Vector& y_true, const Vector& y_pred)
{
    if (y_true.size() != y_pred.size()) throw ShapeError("regression_metrics: length mismatch");
    if (y_true.size() < 2) throw DomainError("regression_metrics: need at least two rows");
    const auto n = static_cast<double>(y_true.size());
    RegressionReport r;
    double ss_res = 0.0, abs_sum = 0.0;
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        r.residuals.push_back(e);
        ss_res += e * e;
        abs_sum += std::abs(e);
    }
    r.mse = ss_res / n;
    r.mae = abs_sum / n;
    const double mean = y_true.mean();
    const double ss_tot = (y_true.array() - mean).square().sum();
    if (ss_tot > 0.0) r.r2 = 1.0 - ss_res / ss_tot;
    return r;
}

ClassificationReport classification_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred,
                                            int k)
{
    if (y_true.size() != y_pred.size()) throw ShapeError("classification_metrics: length mismatch");
    if (y_true.empty()) throw DomainError("classification_metrics: no rows");
    if (k < 1) throw DomainError("classification_metrics: n_classes must be >= 1");
    ClassificationReport r;
    r.n_classes = k;
    const auto uk = static_cast<std::size_t>(k);
    r.confusion.assign(uk, std::vector<long>(uk, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] < 0 || y_true[i] >= k || y_pred[i] < 0 || y_pred[i] >= k)
            throw DomainError("classification_metrics: label out of range");
        ++r.confusion[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
    }
    long diag = 0;
    for (std::size_t c = 0; c < uk; ++c) {
        long tp = r.confusion[c][c], row = 0, col = 0;
        for (std::size_t j = 0; j < uk; ++j) {
            row += r.confusion[c][j];
            col += r.confusion[j][c];
        }
        diag += tp;
        const bool empty_pred = col == 0;
        const double p = empty_pred ? 0.0 : static_cast<double>(tp) / static_cast<double>(col);
        const double rec = row == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(row);
        r.precision.push_back(p);
        r.recall.push_back(rec);
        r.f1.push_back(p + rec > 0.0 ? 2.0 * p * rec / (p + rec) : 0.0);
        r.no_predictions.push_back(empty_pred);
        r.support.push_back(static_cast<int>(row));
        std::vector<double> norm(uk, 0.0);
        if (row > 0)
            for (std::size_t j = 0; j < uk; ++j)
                norm[j] = static_cast<double>(r.confusion[c][j]) / static_cast<double>(row);
        r.confusion_norm.push_back(std::move(norm));
    }
    r.accuracy = static_cast<double>(diag) / static_cast<double>(y_true.size());
    for (std::size_t c = 0; c < uk; ++c) {
        r.macro_precision += r.precision[c] / k;
        r.macro_recall += r.recall[c] / k;
        r.macro_f1 += r.f1[c] / k;
    }
    return r;
}

nlohmann::json RegressionReport::to_json() const
{
    nlohmann::json j = {{"mse", mse}, {"mae", mae}, {"n", residuals.size()}};
    if (r2) j["r2"] = *r2;
    else j["r2"] = nullptr;
    j["r2_defined"] = r2.has_value();
    return j;
}

nlohmann::json ClassificationReport::to_json() const
{
    nlohmann::json per_class = nlohmann::json::array();
    for (int c = 0; c < n_classes; ++c) {
        const auto u = static_cast<std::size_t>(c);
        per_class.push_back({{"class", c},
                             {"precision", precision[u]},
                             {"recall", recall[u]},
                             {"f1", f1[u]},
                             {"support", support[u]},
                             {"no_predictions", static_cast<bool>(no_predictions[u])}});
    }
    return {{"accuracy", accuracy},
            {"classes", per_class},
            {"macro", {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}}},
            {"confusion", confusion},
            {"confusion_normalized", confusion_norm}};
}

} // namespace noisespec::metrics
