#include "noisespec/model.hpp"

#include <algorithm>

#include "noisespec/error.hpp"
#include "noisespec/io.hpp"
#include "noisespec/version.hpp"

namespace noisespec::model {

using dataset::Dataset;
using dataset::Task;

std::string to_string(Kind k)
{
    switch (k) {
    case Kind::forest: return "forest";
    case Kind::svr: return "svr";
    case Kind::ffnn: return "ffnn";
    }
    return "?";
}

Kind parse_kind(std::string_view s)
{
    if (s == "forest" || s == "rfr") return Kind::forest;
    if (s == "svr") return Kind::svr;
    if (s == "ffnn" || s == "nn") return Kind::ffnn;
    throw UsageError("unknown model kind '" + std::string(s) + "' (expected forest, svr or ffnn)");
}

std::string default_target(Task task)
{
    if (task == Task::s_class) return "class";
    return dataset::target_names(task).front();
}

void check_compatible(const Dataset& ds, Kind kind, const std::string& target)
{
    const bool classify = target == "class";
    if (classify != (ds.task == Task::s_class))
        throw TaskMismatchError("target '" + target + "' does not belong to task " + dataset::to_string(ds.task));
    if (classify && kind != Kind::ffnn)
        throw TaskMismatchError(to_string(kind) + " is a regressor; the s_class task needs ffnn");
    if (!classify) {
        const auto names = dataset::target_names(ds.task);
        if (std::find(names.begin(), names.end(), target) == names.end())
            throw TaskMismatchError("task " + dataset::to_string(ds.task) + " has no target '" + target + "'");
    }
}

Matrix feature_rows(const Dataset& ds, const std::vector<std::size_t>& rows)
{
    Matrix out(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = ds.features.row(rows[i]);
    return out;
}

Vector target_vector(const Dataset& ds, const std::string& target, const std::vector<std::size_t>& rows)
{
    Vector out(static_cast<Eigen::Index>(rows.size()));
    if (target == "class") {
        if (ds.classes.empty()) throw TaskMismatchError("dataset has no class column");
        for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = ds.classes[rows[i]];
        return out;
    }
    const auto c = static_cast<Eigen::Index>(ds.target_column(target));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = ds.target_values(static_cast<Eigen::Index>(rows[i]), c);
    return out;
}

Vector Artifact::predict(const Matrix& X) const
{
    if (X.cols() != n_features)
        throw ShapeError("model expects " + std::to_string(n_features) + " features, got " +
                         std::to_string(X.cols()));
    if (X.rows() == 0) return Vector();
    switch (kind) {
    case Kind::forest: return forest->predict(X);
    case Kind::svr: return svr->predict(X);
    case Kind::ffnn: return net->predict(X);
    }
    return Vector();
}

Matrix Artifact::predict_proba(const Matrix& X) const
{
    if (!is_classifier()) throw TaskMismatchError("probabilities need a classifier");
    if (X.cols() != n_features)
        throw ShapeError("model expects " + std::to_string(n_features) + " features, got " +
                         std::to_string(X.cols()));
    if (X.rows() == 0) return Matrix(0, 3);
    return net->predict_proba(X);
}

nlohmann::json Artifact::to_json() const
{
    nlohmann::json j{{"format", "noisespec-model"},
                     {"version", kVersion},
                     {"kind", to_string(kind)},
                     {"task", dataset::to_string(task)},
                     {"target", target},
                     {"config_hash", config_hash},
                     {"seed", seed},
                     {"dataset_digest", dataset_digest},
                     {"n_features", n_features}};
    switch (kind) {
    case Kind::forest: j["model"] = forest->to_json(); break;
    case Kind::svr: j["model"] = svr->to_json(); break;
    case Kind::ffnn: j["model"] = {{"network", net->net.to_json()}, {"target_offset", net->target_offset}}; break;
    }
    return j;
}

Artifact Artifact::from_json(const nlohmann::json& j)
{
    if (j.value("format", "") != "noisespec-model") throw UsageError("not a noisespec model file");
    Artifact a;
    try {
        a.kind = parse_kind(j.at("kind").get<std::string>());
        a.task = dataset::parse_task(j.at("task").get<std::string>());
        a.target = j.at("target").get<std::string>();
        a.config_hash = j.at("config_hash").get<std::string>();
        a.seed = j.at("seed").get<std::uint64_t>();
        a.dataset_digest = j.at("dataset_digest").get<std::string>();
        a.n_features = j.at("n_features").get<int>();
        const auto& m = j.at("model");
        switch (a.kind) {
        case Kind::forest: a.forest = forest::ForestModel::from_json(m); break;
        case Kind::svr: a.svr = svr::SvrModel::from_json(m); break;
        case Kind::ffnn:
            a.net = nn::NetModel{nn::Network::from_json(m.at("network")), m.at("target_offset").get<double>()};
            break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("malformed model file: ") + e.what());
    }
    return a;
}

void Artifact::save(const std::filesystem::path& path) const { io::write_file(path, to_json().dump() + "\n"); }

Artifact Artifact::load(const std::filesystem::path& path)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(io::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

Artifact fit(const Dataset& ds, const TrainSpec& spec, const nn::EpochCallback& on_epoch, FitInfo* info)
{
    const std::string target = spec.target.empty() ? default_target(ds.task) : spec.target;
    check_compatible(ds, spec.kind, target);
    const auto train_rows = ds.rows(dataset::Split::train);
    const auto val_rows = ds.rows(dataset::Split::val);
    if (train_rows.empty()) throw DomainError("dataset has no training rows");

    const Matrix X = feature_rows(ds, train_rows);
    const Vector y = target_vector(ds, target, train_rows);

    Artifact a;
    a.kind = spec.kind;
    a.task = ds.task;
    a.target = target;
    a.config_hash = ds.config_hash;
    a.seed = ds.seed;
    a.dataset_digest = dataset::features_digest(ds);
    a.n_features = static_cast<int>(X.cols());

    nlohmann::json summary{{"kind", to_string(spec.kind)}, {"target", target}, {"n_train", train_rows.size()}};
    switch (spec.kind) {
    case Kind::forest: {
        a.forest = forest::fit_forest(X, y, spec.forest);
        int depth = 0;
        for (const auto& t : a.forest->trees()) depth = std::max(depth, t.depth());
        const auto r = metrics::regression_metrics(y, a.forest->predict(X));
        summary["trees"] = a.forest->trees().size();
        summary["max_depth_reached"] = depth;
        summary["train"] = r.to_json();
        summary["train"].erase("residuals");
        break;
    }
    case Kind::svr: {
        a.svr = svr::fit_svr(X, y, spec.svr);
        const auto r = metrics::regression_metrics(y, a.svr->predict(X));
        summary["support_vectors"] = a.svr->support_vectors().rows();
        summary["iterations"] = a.svr->iterations();
        summary["converged"] = a.svr->converged();
        summary["objective_history"] = a.svr->objective_history();
        summary["train"] = r.to_json();
        summary["train"].erase("residuals");
        break;
    }
    case Kind::ffnn: {
        nn::NetConfig cfg = spec.net;
        const bool classify = target == "class";
        cfg.task = classify ? nn::NetTask::classification : nn::NetTask::regression;
        cfg.layers.front() = static_cast<int>(X.cols());
        cfg.layers.back() = classify ? 3 : 1;
        const Matrix Xv = feature_rows(ds, val_rows);
        const Vector yv = target_vector(ds, target, val_rows);
        auto res = nn::train(X, y, Xv, yv, cfg, on_epoch);
        a.net = std::move(res.model);
        summary["epochs"] = cfg.epochs;
        summary["final_train_loss"] = res.log.train_loss.back();
        summary["final_val_loss"] = res.log.val_loss.back();
        summary["target_offset"] = a.net->target_offset;
        if (info) info->log = std::move(res.log);
        break;
    }
    }
    if (info) info->summary = std::move(summary);
    return a;
}

nlohmann::json Evaluation::to_json() const
{
    nlohmann::json j{{"n", rows.size()}};
    if (regression) {
        j["regression"] = regression->to_json();
        j["regression"].erase("residuals");
    }
    if (classification) j["classification"] = classification->to_json();
    return j;
}

Evaluation evaluate(const Artifact& a, const Dataset& ds, dataset::Split split)
{
    if (a.task != ds.task)
        throw TaskMismatchError("model was trained for task " + dataset::to_string(a.task) + " but the dataset is " +
                                dataset::to_string(ds.task));
    check_compatible(ds, a.kind, a.target);
    if (ds.features.cols() != a.n_features) throw ShapeError("dataset feature width does not match the model");

    Evaluation ev;
    ev.rows = ds.rows(split);
    const Matrix X = feature_rows(ds, ev.rows);
    ev.truth = target_vector(ds, a.target, ev.rows);
    ev.prediction = a.predict(X);
    if (ev.rows.empty()) return ev;
    if (a.is_classifier()) {
        ev.probabilities = a.predict_proba(X);
        std::vector<int> t, p;
        for (Eigen::Index i = 0; i < ev.truth.size(); ++i) {
            t.push_back(static_cast<int>(ev.truth[i]));
            p.push_back(static_cast<int>(ev.prediction[i]));
        }
        ev.classification = metrics::classification_metrics(t, p);
    } else {
        ev.regression = metrics::regression_metrics(ev.truth, ev.prediction);
    }
    return ev;
}

} // namespace noisespec::model
