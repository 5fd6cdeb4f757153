#include "noisespec/cli/commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>

#include "noisespec/cli/config.hpp"
#include "noisespec/cli/svg.hpp"
#include "noisespec/dataset.hpp"
#include "noisespec/error.hpp"
#include "noisespec/io.hpp"
#include "noisespec/model.hpp"
#include "noisespec/version.hpp"

namespace noisespec::cli {
namespace {

namespace fs = std::filesystem;

// Flag values are collected as strings and routed through the same setter
// table as the INI file, so both spellings behave identically.
struct Bindings {
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    struct Bound {
        const CLI::App* app;
        CLI::Option* opt;
        std::string key;
        bool is_flag;
    };
    std::vector<Bound> bound;

    void option(CLI::App* app, const std::string& name, const std::string& key, const std::string& help)
    {
        bound.push_back({app, app->add_option(name, values[app->get_name() + "|" + key], help), key, false});
    }
    void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help)
    {
        bound.push_back({app, app->add_flag(name, flags[app->get_name() + "|" + key], help), key, true});
    }

    void apply_to(RunConfig& cfg, const CLI::App* app) const
    {
        for (const auto& x : bound) {
            if (x.app != app || x.opt->count() == 0) continue;
            const std::string slot = app->get_name() + "|" + x.key;
            apply(cfg, x.key, x.is_flag ? (flags.at(slot) ? "true" : "false") : values.at(slot));
        }
    }
};

std::string fmt(double v) { return io::format_double(v); }

std::string stamp(const RunConfig& cfg)
{
    return "config " + config_hash(cfg) + ", seed " + std::to_string(resolve_seed(cfg));
}

std::string loss_csv(const nn::TrainLog& log, bool classify)
{
    std::ostringstream o;
    o << "epoch,train_loss,val_loss," << (classify ? "val_accuracy" : "val_mse") << '\n';
    for (std::size_t e = 0; e < log.train_loss.size(); ++e)
        o << e + 1 << ',' << fmt(log.train_loss[e]) << ',' << fmt(log.val_loss[e]) << ',' << fmt(log.val_metric[e])
          << '\n';
    return o.str();
}

// Provenance line carried by every CSV and SVG the CLI writes.
std::string csv_tag(const std::string& hash, std::uint64_t seed)
{
    return "# config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
}

std::string svg_tag(const std::string& hash, std::uint64_t seed)
{
    return "<!-- config_hash=" + hash + " seed=" + std::to_string(seed) + " -->\n";
}

fs::path sibling(const fs::path& p, const std::string& suffix)
{
    fs::path out = p;
    out.replace_extension();
    out += suffix;
    return out;
}

int cmd_generate(const RunConfig& cfg)
{
    if (cfg.n < 1) throw UsageError("--n must be at least 1");
    const auto task = dataset::parse_task(cfg.task);
    const auto mode = dataset::parse_mode(cfg.mode);
    const auto seed = resolve_seed(cfg);

    std::mutex mu;
    std::size_t last = 0;
    dataset::GenerateOptions opt{resolve_workers(cfg), [&](std::size_t done, std::size_t total) {
                                     std::lock_guard lock(mu);
                                     if (done * 20 / total == last * 20 / total && done != total) return;
                                     last = done;
                                     std::fprintf(stderr, "\rsimulating %zu/%zu", done, total);
                                     if (done == total) std::fprintf(stderr, "\n");
                                 }};
    auto ds = dataset::generate(task, mode, cfg.n, seed, cfg.physics, opt);
    dataset::split(ds, seed);
    ds.config_hash = config_hash(cfg);
    dataset::write(ds, cfg.dataset_dir);

    std::cout << "wrote " << ds.n << " rows (" << cfg.task << ", " << cfg.mode << ") to " << cfg.dataset_dir << " ["
              << stamp(cfg) << "]\n";
    for (const auto s : {dataset::Split::train, dataset::Split::val, dataset::Split::test}) {
        const auto rows = ds.rows(s);
        std::cout << "  " << dataset::to_string(s) << ": " << rows.size();
        if (!ds.classes.empty()) {
            int counts[3] = {0, 0, 0};
            for (const auto r : rows) ++counts[ds.classes[r]];
            std::cout << " (class 0/1/2: " << counts[0] << '/' << counts[1] << '/' << counts[2] << ')';
        }
        std::cout << '\n';
    }
    return 0;
}

model::TrainSpec train_spec(const RunConfig& cfg, unsigned workers)
{
    model::TrainSpec spec;
    spec.kind = model::parse_kind(cfg.kind);
    spec.target = cfg.target;
    spec.forest.n_estimators = cfg.trees;
    spec.forest.max_features = cfg.max_features;
    spec.forest.max_depth = cfg.max_depth;
    spec.forest.min_samples_split = cfg.min_samples_split;
    spec.forest.workers = workers;
    spec.svr.kernel.type = svr::parse_kernel(cfg.kernel);
    spec.svr.kernel.gamma = cfg.svr_gamma;
    spec.svr.kernel.degree = cfg.degree;
    spec.svr.kernel.coef0 = cfg.coef0;
    spec.svr.C = cfg.C;
    spec.svr.epsilon = cfg.epsilon;
    spec.svr.tol = cfg.tol;
    spec.svr.max_iter = cfg.max_iter;
    spec.net.learning_rate = cfg.learning_rate;
    spec.net.batch_size = cfg.batch_size;
    spec.net.epochs = cfg.epochs;
    const auto seed = resolve_seed(cfg);
    spec.forest.seed = seed;
    spec.net.seed = seed;
    return spec;
}

int cmd_train(RunConfig cfg)
{
    auto ds = dataset::read(cfg.dataset_dir);
    // The dataset's seed drives model randomness unless one was given explicitly.
    if (!cfg.seed) cfg.seed = ds.seed;
    const auto spec = train_spec(cfg, resolve_workers(cfg));
    const int every = std::max(1, cfg.epochs / 20);
    model::FitInfo info;
    auto artifact = model::fit(ds, spec,
                               [&](int epoch, double loss, double val_loss, double metric) {
                                   if (epoch % every == 0 || epoch == cfg.epochs)
                                       std::fprintf(stderr, "epoch %d  loss %.6g  val_loss %.6g  val_metric %.6g\n",
                                                    epoch, loss, val_loss, metric);
                               },
                               &info);
    artifact.config_hash = config_hash(cfg);
    artifact.save(cfg.model_path);

    const auto tag = csv_tag(artifact.config_hash, artifact.seed);
    const auto stag = svg_tag(artifact.config_hash, artifact.seed);
    info.summary["config_hash"] = artifact.config_hash;
    info.summary["seed"] = artifact.seed;
    info.summary["dataset_config_hash"] = ds.config_hash;
    info.summary["dataset_digest"] = artifact.dataset_digest;
    if (spec.kind == model::Kind::ffnn) {
        const bool classify = artifact.is_classifier();
        io::write_file(sibling(cfg.model_path, ".loss.csv"), tag + loss_csv(info.log, classify));
        if (cfg.svg)
            io::write_file(sibling(cfg.model_path, ".loss.svg"),
                           stag + svg::line_chart("training loss", {{"train", info.log.train_loss}, {"val", info.log.val_loss}},
                                           true));
    } else if (spec.kind == model::Kind::svr && cfg.svg) {
        io::write_file(sibling(cfg.model_path, ".objective.svg"),
                       stag + svg::line_chart("dual objective", {{"objective", artifact.svr->objective_history()}}, false));
    }
    io::write_file(sibling(cfg.model_path, ".fit.json"), info.summary.dump(2) + "\n");

    std::cout << "trained " << cfg.kind << " on " << artifact.target << " -> " << cfg.model_path << " ["
              << stamp(cfg) << "]\n";
    return 0;
}

std::string table_csv(const model::Artifact& a, const model::Evaluation& ev)
{
    std::ostringstream o;
    if (ev.classification) {
        const auto& r = *ev.classification;
        o << "class,precision,recall,f1,support\n";
        for (int c = 0; c < r.n_classes; ++c)
            o << c << ',' << fmt(r.precision[c]) << ',' << fmt(r.recall[c]) << ',' << fmt(r.f1[c]) << ','
              << r.support[c] << '\n';
        o << "macro," << fmt(r.macro_precision) << ',' << fmt(r.macro_recall) << ',' << fmt(r.macro_f1) << ','
          << ev.rows.size() << '\n';
        o << "accuracy,,,," << fmt(r.accuracy) << '\n';
    } else if (ev.regression) {
        const auto& r = *ev.regression;
        o << "target,model,mae,mse,r2\n"
          << a.target << ',' << model::to_string(a.kind) << ',' << fmt(r.mae) << ',' << fmt(r.mse) << ','
          << (r.r2 ? fmt(*r.r2) : std::string()) << '\n';
    }
    return o.str();
}

std::string predictions_csv(const model::Evaluation& ev, bool classify)
{
    std::ostringstream o;
    o << "row,truth,prediction";
    if (classify) o << ",p0,p1,p2";
    o << '\n';
    for (std::size_t i = 0; i < ev.rows.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        o << ev.rows[i] << ',' << fmt(ev.truth[k]) << ',' << fmt(ev.prediction[k]);
        if (classify)
            for (Eigen::Index c = 0; c < ev.probabilities.cols(); ++c) o << ',' << fmt(ev.probabilities(k, c));
        o << '\n';
    }
    return o.str();
}

int cmd_eval(const RunConfig& cfg)
{
    const auto artifact = model::Artifact::load(cfg.model_path);
    const auto ds = dataset::read(cfg.dataset_dir);
    const auto ev = model::evaluate(artifact, ds, dataset::parse_split(cfg.split));
    const fs::path out = cfg.out_dir;
    fs::create_directories(out);

    // Content digests rather than paths keep reports byte-identical across output locations.
    nlohmann::json report{{"model_digest", io::hex_digest(io::read_file(cfg.model_path))},
                          {"kind", model::to_string(artifact.kind)},
                          {"task", dataset::to_string(artifact.task)},
                          {"target", artifact.target},
                          {"split", cfg.split},
                          {"model_config_hash", artifact.config_hash},
                          {"config_hash", config_hash(cfg)},
                          {"seed", artifact.seed},
                          {"dataset_digest", dataset::features_digest(ds)},
                          {"trained_on_this_dataset", artifact.dataset_digest == dataset::features_digest(ds)},
                          {"metrics", ev.to_json()}};
    io::write_file(out / "report.json", report.dump(2) + "\n");
    const auto tag = csv_tag(artifact.config_hash, artifact.seed);
    const auto stag = svg_tag(artifact.config_hash, artifact.seed);
    io::write_file(out / "table.csv", tag + table_csv(artifact, ev));
    io::write_file(out / "predictions.csv", tag + predictions_csv(ev, artifact.is_classifier()));

    if (ev.classification) {
        const auto& r = *ev.classification;
        std::ostringstream raw, norm;
        raw << "true\\pred,0,1,2\n";
        norm << "true\\pred,0,1,2\n";
        for (int i = 0; i < r.n_classes; ++i) {
            raw << i;
            norm << i;
            for (int j = 0; j < r.n_classes; ++j) {
                raw << ',' << r.confusion[i][j];
                norm << ',' << fmt(r.confusion_norm[i][j]);
            }
            raw << '\n';
            norm << '\n';
        }
        io::write_file(out / "confusion.csv", tag + raw.str());
        io::write_file(out / "confusion_normalized.csv", tag + norm.str());
        if (cfg.svg) io::write_file(out / "confusion.svg", stag + svg::heatmap("normalized confusion", r.confusion_norm));
        std::cout << "accuracy " << fmt(r.accuracy) << "  macro F1 " << fmt(r.macro_f1);
    } else if (ev.regression) {
        const auto& r = *ev.regression;
        if (cfg.svg)
            io::write_file(out / "scatter.svg",
                           stag + svg::scatter(artifact.target + ": predicted vs true",
                                        std::vector<double>(ev.truth.begin(), ev.truth.end()),
                                        std::vector<double>(ev.prediction.begin(), ev.prediction.end())));
        std::cout << "mae " << fmt(r.mae) << "  mse " << fmt(r.mse) << "  r2 " << (r.r2 ? fmt(*r.r2) : "n/a");
    } else {
        std::cout << "split is empty";
    }
    std::cout << "  (" << cfg.split << ", " << ev.rows.size() << " rows) -> " << cfg.out_dir << " [model config "
              << artifact.config_hash << ", seed " << artifact.seed << "]\n";
    return 0;
}

Matrix read_features(const std::string& text)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cells = io::split_csv_line(line);
        std::vector<double> row;
        try {
            for (const auto& c : cells) row.push_back(io::parse_double(c));
        } catch (const std::exception&) {
            if (first) {  // header row
                first = false;
                continue;
            }
            throw UsageError("features: non-numeric cell in line '" + line.substr(0, 40) + "'");
        }
        first = false;
        if (!rows.empty() && row.size() != rows.front().size()) throw ShapeError("features: ragged rows");
        rows.push_back(std::move(row));
    }
    Matrix X(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return X;
}

int cmd_predict(const RunConfig& cfg)
{
    if (cfg.features_path.empty()) throw UsageError("predict needs --features");
    const auto artifact = model::Artifact::load(cfg.model_path);
    const Matrix X = read_features(io::read_file(cfg.features_path));
    if (X.rows() == 0) {
        io::write_file(cfg.predictions_path, "");
        std::cout << "no rows in " << cfg.features_path << "\n";
        return 0;
    }
    const Vector y = artifact.predict(X);
    std::ostringstream o;
    o << csv_tag(artifact.config_hash, artifact.seed) << "row,prediction";
    Matrix P;
    if (artifact.is_classifier()) {
        P = artifact.predict_proba(X);
        o << ",p0,p1,p2";
    }
    o << '\n';
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        o << i << ',' << fmt(y[i]);
        for (Eigen::Index c = 0; c < P.cols(); ++c) o << ',' << fmt(P(i, c));
        o << '\n';
    }
    io::write_file(cfg.predictions_path, o.str());
    std::cout << "predicted " << y.size() << " rows -> " << cfg.predictions_path << " [model config "
              << artifact.config_hash << ", seed " << artifact.seed << "]\n";
    return 0;
}

int cmd_verify(const RunConfig& cfg)
{
    const auto stored = dataset::read(cfg.dataset_dir);
    auto fresh = dataset::generate(stored.task, stored.mode, stored.n, stored.seed, stored.physics,
                                   {resolve_workers(cfg), {}});
    dataset::split(fresh, stored.seed);
    fresh.config_hash = stored.config_hash;
    const auto digests = dataset::file_digests(fresh);
    bool ok = true;
    for (const auto& [file, digest] : digests) {
        const auto on_disk = io::hex_digest(io::read_file(fs::path(cfg.dataset_dir) / file));
        const bool same = on_disk == digest;
        ok = ok && same;
        std::cout << (same ? "match    " : "MISMATCH ") << file << "  " << on_disk << (same ? "" : " vs " + digest)
                  << '\n';
    }
    std::cout << (ok ? "dataset reproduces" : "dataset does not reproduce") << " [config " << stored.config_hash
              << ", seed " << stored.seed << "]\n";
    return ok ? 0 : 1;
}

} // namespace

int run(int argc, char** argv)
{
    CLI::App app{"Dissipative qubit dynamics datasets and bath-parameter learning"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "INI file with [dataset] [physics] [model] [train] [paths] sections")
        ->check(CLI::ExistingFile);

    Bindings b;
    auto* gen = app.add_subcommand("generate", "simulate a dataset");
    b.option(gen, "--task", "dataset.task", "s_class | eta | alpha");
    b.option(gen, "--mode", "dataset.mode", "separated | continuous");
    b.option(gen, "--n", "dataset.n", "number of rows");
    b.option(gen, "--seed", "dataset.seed", "master seed (default NOISESPEC_SEED, else 0)");
    b.option(gen, "--out", "paths.dataset", "output directory");
    b.option(gen, "--workers", "train.workers", "worker threads (0: all cores)");
    b.option(gen, "--gamma", "physics.gamma", "spin-boson damping gamma");
    b.option(gen, "--alpha-min", "physics.alpha_min", "lower alpha bound");
    b.option(gen, "--alpha-max", "physics.alpha_max", "upper alpha bound");
    b.option(gen, "--reference-alpha", "physics.reference_alpha", "reference alpha for sigma");
    b.option(gen, "--kT-over-delta", "physics.kT_over_delta", "temperature in units of Delta");
    b.option(gen, "--heom-depth", "physics.heom_depth", "hierarchy depth");
    b.option(gen, "--t-max", "physics.dephasing_t_max", "dephasing time window");
    b.option(gen, "--ohmic-band", "physics.ohmic_band", "half-width of the Ohmic class band");
    bool full = false;
    gen->add_flag("--full", full, "full-size dataset (10000 rows)");

    auto* tr = app.add_subcommand("train", "fit a model on a dataset's train split");
    b.option(tr, "--dataset", "paths.dataset", "dataset directory");
    b.option(tr, "--model", "model.kind", "forest | svr | ffnn");
    b.option(tr, "--target", "model.target", "target column (default: the task's primary target)");
    b.option(tr, "--out", "paths.model", "model file");
    b.option(tr, "--seed", "dataset.seed", "model seed (default: the dataset seed)");
    b.option(tr, "--workers", "train.workers", "worker threads (0: all cores)");
    b.option(tr, "--trees", "model.trees", "forest size");
    b.option(tr, "--max-features", "model.max_features", "features per split (0: sqrt)");
    b.option(tr, "--max-depth", "model.max_depth", "tree depth limit (0: none)");
    b.option(tr, "--min-samples-split", "model.min_samples_split", "minimum node size to split");
    b.option(tr, "--kernel", "model.kernel", "linear | poly | rbf");
    b.option(tr, "--C", "model.C", "SVR box constraint");
    b.option(tr, "--epsilon", "model.epsilon", "SVR tube half-width");
    b.option(tr, "--svr-gamma", "model.svr_gamma", "kernel gamma (0: auto)");
    b.option(tr, "--degree", "model.degree", "poly kernel degree");
    b.option(tr, "--coef0", "model.coef0", "poly kernel offset");
    b.option(tr, "--tol", "model.tol", "SMO stopping tolerance");
    b.option(tr, "--max-iter", "model.max_iter", "SMO iteration cap");
    b.option(tr, "--lr", "model.learning_rate", "Adam learning rate");
    b.option(tr, "--batch-size", "model.batch_size", "mini-batch size");
    b.option(tr, "--epochs", "model.epochs", "training epochs");
    b.flag(tr, "--svg", "train.svg", "also write SVG plots");

    auto* ev = app.add_subcommand("eval", "score a model on one split");
    b.option(ev, "--model", "paths.model", "model file");
    b.option(ev, "--dataset", "paths.dataset", "dataset directory");
    b.option(ev, "--split", "train.split", "train | val | test");
    b.option(ev, "--out", "paths.out", "report directory");
    b.flag(ev, "--svg", "train.svg", "also write SVG plots");

    auto* pr = app.add_subcommand("predict", "predict from a features CSV");
    b.option(pr, "--model", "paths.model", "model file");
    b.option(pr, "--features", "paths.features", "CSV with one row of features per line");
    b.option(pr, "--out", "paths.predictions", "output CSV");

    auto* ver = app.add_subcommand("verify", "regenerate a dataset and compare digests");
    b.option(ver, "--dataset", "paths.dataset", "dataset directory");
    b.option(ver, "--workers", "train.workers", "worker threads (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty())
            for (const auto& [key, value] : parse_ini(io::read_file(config_path))) apply(cfg, key, value);
        for (auto* sub : app.get_subcommands()) {
            b.apply_to(cfg, sub);
            if (sub == gen) {
                if (full) cfg.n = 10000;
                return cmd_generate(cfg);
            }
            if (sub == tr) return cmd_train(cfg);
            if (sub == ev) return cmd_eval(cfg);
            if (sub == pr) return cmd_predict(cfg);
            if (sub == ver) return cmd_verify(cfg);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace noisespec::cli
