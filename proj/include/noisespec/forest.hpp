#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "noisespec/matrix.hpp"

namespace noisespec::forest {

struct ForestConfig {
    int n_estimators = 100;
    int min_samples_split = 2;
    int max_depth = 0;     // 0: unbounded
    int max_features = 0;  // 0: floor(sqrt(p))
    std::uint64_t seed = 0;
    unsigned workers = 1;
};

/// Preorder node list; leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(const double* x) const;
    int depth() const;
};

class ForestModel {
public:
    ForestModel() = default;
    ForestModel(std::vector<Tree> trees, int n_features, ForestConfig cfg);

    Vector predict(const Matrix& X) const;
    double predict_row(const double* x) const;

    const std::vector<Tree>& trees() const noexcept { return trees_; }
    int n_features() const noexcept { return n_features_; }
    const ForestConfig& config() const noexcept { return cfg_; }

    nlohmann::json to_json() const;
    static ForestModel from_json(const nlohmann::json& j);

private:
    std::vector<Tree> trees_;
    int n_features_ = 0;
    ForestConfig cfg_;
};

/// Bagged CART regression trees: bootstrap of N rows per tree, variance
/// reduction over max_features random candidate features per split.
ForestModel fit_forest(const Matrix& X, const Vector& y, const ForestConfig& cfg = {});

/// Fits one tree on the rows listed in `sample` (repeats allowed).
Tree fit_tree(const Matrix& X, const Vector& y, const std::vector<std::size_t>& sample,
              const ForestConfig& cfg, std::uint64_t stream);

} // namespace noisespec::forest
