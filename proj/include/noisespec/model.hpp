#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "noisespec/dataset.hpp"
#include "noisespec/forest.hpp"
#include "noisespec/matrix.hpp"
#include "noisespec/metrics.hpp"
#include "noisespec/nn.hpp"
#include "noisespec/svr.hpp"

namespace noisespec::model {

enum class Kind { forest, svr, ffnn };

std::string to_string(Kind k);
Kind parse_kind(std::string_view s);

struct TrainSpec {
    Kind kind = Kind::forest;
    std::string target;  // empty: "class" for s_class, else the first target column
    forest::ForestConfig forest;
    svr::SvrConfig svr;
    nn::NetConfig net;  // layers[0] and the head width are fixed up from the data
};

/// A fitted model together with what it was trained on.
struct Artifact {
    Kind kind = Kind::forest;
    dataset::Task task = dataset::Task::eta;
    std::string target;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string dataset_digest;
    int n_features = 0;

    std::optional<forest::ForestModel> forest;
    std::optional<svr::SvrModel> svr;
    std::optional<nn::NetModel> net;

    bool is_classifier() const noexcept { return target == "class"; }

    /// Regression values, or class indices for a classifier. Throws ShapeError
    /// when the feature width does not match.
    Vector predict(const Matrix& X) const;
    /// Class probabilities (classifier only).
    Matrix predict_proba(const Matrix& X) const;

    nlohmann::json to_json() const;
    static Artifact from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static Artifact load(const std::filesystem::path& path);
};

std::string default_target(dataset::Task task);

/// Checks that `target` exists for the dataset's task and that the model kind
/// can fit it; throws TaskMismatchError otherwise.
void check_compatible(const dataset::Dataset& ds, Kind kind, const std::string& target);

/// Truth column for `target` restricted to `rows` (class indices for "class").
Vector target_vector(const dataset::Dataset& ds, const std::string& target, const std::vector<std::size_t>& rows);
Matrix feature_rows(const dataset::Dataset& ds, const std::vector<std::size_t>& rows);

struct FitInfo {
    nn::TrainLog log;     // filled for ffnn
    nlohmann::json summary;
};

/// Fits on the train split (the val split feeds the network's validation log).
Artifact fit(const dataset::Dataset& ds, const TrainSpec& spec, const nn::EpochCallback& on_epoch = {},
             FitInfo* info = nullptr);

struct Evaluation {
    std::vector<std::size_t> rows;
    Vector truth, prediction;
    Matrix probabilities;  // classifier only
    std::optional<metrics::RegressionReport> regression;
    std::optional<metrics::ClassificationReport> classification;

    nlohmann::json to_json() const;
};

/// Scores the artifact on one split; throws TaskMismatchError when the
/// dataset's task or columns do not fit the model.
Evaluation evaluate(const Artifact& a, const dataset::Dataset& ds, dataset::Split split);

} // namespace noisespec::model
