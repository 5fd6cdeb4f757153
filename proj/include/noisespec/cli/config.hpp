#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "noisespec/dataset.hpp"

namespace noisespec::cli {

/// Every field is addressable as "section.key", both from the INI file and
/// from command-line flags.
struct RunConfig {
    // [dataset]
    std::string task = "eta";
    std::string mode = "continuous";
    std::size_t n = 2000;
    std::optional<std::uint64_t> seed;

    // [physics]
    dataset::Physics physics;

    // [model]
    std::string kind = "forest";
    std::string target;  // empty: the task's primary target
    int trees = 100;
    int max_features = 0;
    int max_depth = 0;
    int min_samples_split = 2;
    std::string kernel = "rbf";
    double C = 1.0;
    double epsilon = 0.01;
    double svr_gamma = 0.0;
    int degree = 3;
    double coef0 = 1.0;
    double tol = 1e-3;
    long max_iter = 10'000'000;
    double learning_rate = 1e-4;
    int batch_size = 64;
    int epochs = 3000;

    // [train]
    unsigned workers = 0;  // 0: all available cores
    std::string split = "test";
    bool svg = false;

    // [paths]
    std::string dataset_dir = "dataset";
    std::string model_path = "model.json";
    std::string out_dir = "reports";
    std::string features_path;
    std::string predictions_path = "predictions.csv";
};

/// Parses INI text into "section.key" -> value; throws UsageError on syntax errors.
std::map<std::string, std::string> parse_ini(const std::string& text);

/// Sets one field; throws UsageError for unknown keys or malformed values.
void apply(RunConfig& cfg, const std::string& key, const std::string& value);

/// Seed from the config, else NOISESPEC_SEED, else 0.
std::uint64_t resolve_seed(const RunConfig& cfg);
unsigned resolve_workers(const RunConfig& cfg);

/// Canonical form of every setting that influences results (paths and worker
/// counts excluded), and its digest.
nlohmann::json canonical(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);

} // namespace noisespec::cli
