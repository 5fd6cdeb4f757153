#include "noisespec/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "noisespec/error.hpp"
#include "noisespec/rng.hpp"

namespace noisespec::forest {
namespace {

struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

bool better(const Candidate& c, const Candidate& best)
{
    if (best.feature < 0) return true;
    if (c.gain != best.gain) return c.gain > best.gain;
    if (c.feature != best.feature) return c.feature < best.feature;
    return c.threshold < best.threshold;
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, const Vector& y, const ForestConfig& cfg, std::uint64_t stream)
        : X_(X), y_(y), cfg_(cfg), rng_(derive_stream(cfg.seed, stream)),
          p_(static_cast<int>(X.cols())),
          m_(cfg.max_features > 0 ? std::min(cfg.max_features, p_)
                                  : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(p_))))),
          features_(static_cast<std::size_t>(p_))
    {
        std::iota(features_.begin(), features_.end(), 0);
    }

    Tree build(std::vector<std::size_t> rows)
    {
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t>& rows, int depth)
    {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        double sum = 0.0, lo = y_[static_cast<Eigen::Index>(rows[0])], hi = lo;
        for (const auto r : rows) {
            const double v = y_[static_cast<Eigen::Index>(r)];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        tree_.nodes[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());

        const bool stop = static_cast<int>(rows.size()) < cfg_.min_samples_split || lo == hi ||
                          (cfg_.max_depth > 0 && depth >= cfg_.max_depth);
        if (stop) return id;

        const Candidate best = find_split(rows, sum);
        if (best.feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (const auto r : rows)
            (X_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        tree_.nodes[static_cast<std::size_t>(id)].feature = best.feature;
        tree_.nodes[static_cast<std::size_t>(id)].threshold = best.threshold;
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        tree_.nodes[static_cast<std::size_t>(id)].left = l;
        tree_.nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    // Draw candidate features without replacement; keep drawing past m when
    // none of the first m features admits a split.
    Candidate find_split(const std::vector<std::size_t>& rows, double total)
    {
        const auto n = static_cast<double>(rows.size());
        const double parent = total * total / n;
        Candidate best;
        int visited = 0;
        for (int k = 0; k < p_; ++k) {
            const auto j = static_cast<std::size_t>(k) +
                           uniform_index(rng_, static_cast<std::uint64_t>(p_ - k));
            std::swap(features_[static_cast<std::size_t>(k)], features_[j]);
            const int f = features_[static_cast<std::size_t>(k)];
            ++visited;
            evaluate(rows, f, total, parent, best);
            if (visited >= m_ && best.feature >= 0) break;
        }
        return best;
    }

    void evaluate(const std::vector<std::size_t>& rows, int f, double total, double parent,
                  Candidate& best)
    {
        order_.resize(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            order_[i] = {X_(static_cast<Eigen::Index>(rows[i]), f), y_[static_cast<Eigen::Index>(rows[i])]};
        std::sort(order_.begin(), order_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (order_.front().first == order_.back().first) return;

        const auto n = static_cast<double>(rows.size());
        double left = 0.0;
        for (std::size_t i = 0; i + 1 < order_.size(); ++i) {
            left += order_[i].second;
            const double a = order_[i].first, b = order_[i + 1].first;
            if (a == b) continue;
            const double nl = static_cast<double>(i + 1), nr = n - nl;
            const double right = total - left;
            const double gain = left * left / nl + right * right / nr - parent;
            if (!(gain > 0.0)) continue;
            double thr = 0.5 * (a + b);
            if (!(thr < b)) thr = a;
            const Candidate c{f, thr, gain};
            if (better(c, best)) best = c;
        }
    }

    const Matrix& X_;
    const Vector& y_;
    const ForestConfig& cfg_;
    std::mt19937_64 rng_;
    int p_;
    int m_;
    std::vector<int> features_;
    std::vector<std::pair<double, double>> order_;
    Tree tree_;
};

void check_config(const ForestConfig& cfg, int p)
{
    if (cfg.n_estimators < 1) throw DomainError("forest: n_estimators must be >= 1");
    if (cfg.min_samples_split < 2) throw DomainError("forest: min_samples_split must be >= 2");
    if (cfg.max_features < 0 || cfg.max_features > p)
        throw DomainError("forest: max_features must lie in [1, p]");
}

} // namespace

double Tree::predict(const double* x) const
{
    std::size_t i = 0;
    while (nodes[i].feature >= 0)
        i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
    return nodes[i].value;
}

int Tree::depth() const
{
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        best = std::max(best, d[i]);
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
    }
    return best;
}

ForestModel::ForestModel(std::vector<Tree> trees, int n_features, ForestConfig cfg)
    : trees_(std::move(trees)), n_features_(n_features), cfg_(cfg)
{
}

double ForestModel::predict_row(const double* x) const
{
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(x);
    return acc / static_cast<double>(trees_.size());
}

Vector ForestModel::predict(const Matrix& X) const
{
    if (X.cols() != n_features_)
        throw ShapeError("forest: expected " + std::to_string(n_features_) + " features, got " +
                         std::to_string(X.cols()));
    Vector out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = predict_row(X.row(i).data());
    return out;
}

nlohmann::json ForestModel::to_json() const
{
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const auto& n : t.nodes) {
            if (n.feature < 0)
                nodes.push_back({{"value", n.value}});
            else
                nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold},
                                 {"left", n.left}, {"right", n.right}, {"value", n.value}});
        }
        trees.push_back(std::move(nodes));
    }
    return {
        {"n_features", n_features_},
        {"config",
         {{"n_estimators", cfg_.n_estimators},
          {"min_samples_split", cfg_.min_samples_split},
          {"max_depth", cfg_.max_depth},
          {"max_features", cfg_.max_features},
          {"seed", cfg_.seed}}},
        {"trees", std::move(trees)},
    };
}

ForestModel ForestModel::from_json(const nlohmann::json& j)
{
    ForestConfig cfg;
    const auto& c = j.at("config");
    cfg.n_estimators = c.at("n_estimators");
    cfg.min_samples_split = c.at("min_samples_split");
    cfg.max_depth = c.at("max_depth");
    cfg.max_features = c.at("max_features");
    cfg.seed = c.at("seed");
    std::vector<Tree> trees;
    for (const auto& jt : j.at("trees")) {
        Tree t;
        for (const auto& jn : jt) {
            TreeNode n;
            n.value = jn.at("value");
            if (jn.contains("feature")) {
                n.feature = jn.at("feature");
                n.threshold = jn.at("threshold");
                n.left = jn.at("left");
                n.right = jn.at("right");
            }
            t.nodes.push_back(n);
        }
        if (t.nodes.empty()) throw Error("forest model: empty tree");
        trees.push_back(std::move(t));
    }
    if (trees.empty()) throw Error("forest model: no trees");
    return ForestModel(std::move(trees), j.at("n_features"), cfg);
}

Tree fit_tree(const Matrix& X, const Vector& y, const std::vector<std::size_t>& sample,
              const ForestConfig& cfg, std::uint64_t stream)
{
    if (sample.empty()) throw DomainError("fit_tree: empty sample");
    TreeBuilder builder(X, y, cfg, stream);
    return builder.build(sample);
}

ForestModel fit_forest(const Matrix& X, const Vector& y, const ForestConfig& cfg)
{
    const auto n = static_cast<std::size_t>(X.rows());
    if (n < 2) throw DomainError("fit_forest: need at least two rows");
    if (static_cast<std::size_t>(y.size()) != n) throw ShapeError("fit_forest: X and y row counts differ");
    if (!X.allFinite() || !y.allFinite()) throw DomainError("fit_forest: non-finite input");
    check_config(cfg, static_cast<int>(X.cols()));

    std::vector<Tree> trees(static_cast<std::size_t>(cfg.n_estimators));
    std::atomic<int> next{0};
    const auto work = [&] {
        for (int t = next++; t < cfg.n_estimators; t = next++) {
            // Stream 2t draws the bootstrap, 2t + 1 drives the splits.
            auto g = derive_stream(cfg.seed, 2 * static_cast<std::uint64_t>(t));
            std::vector<std::size_t> sample(n);
            for (auto& s : sample) s = uniform_index(g, n);
            trees[static_cast<std::size_t>(t)] = fit_tree(X, y, sample, cfg, 2 * static_cast<std::uint64_t>(t) + 1);
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.n_estimators)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    return ForestModel(std::move(trees), static_cast<int>(X.cols()), cfg);
}

} // namespace noisespec::forest
