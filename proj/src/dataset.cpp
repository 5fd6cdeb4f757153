#include "noisespec/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "noisespec/dephasing.hpp"
#include "noisespec/error.hpp"
#include "noisespec/heom.hpp"
#include "noisespec/io.hpp"
#include "noisespec/nonmarkov.hpp"
#include "noisespec/rng.hpp"
#include "noisespec/version.hpp"

namespace noisespec::dataset {
namespace {

using json = nlohmann::json;

constexpr double kTraceBudget = 1e-8;

// Draw in the open interval (lo, hi).
double open_uniform(std::mt19937_64& g, double lo, double hi)
{
    double v = lo;
    while (v <= lo || v >= hi) v = uniform(g, lo, hi);
    return v;
}

double log_uniform(std::mt19937_64& g, double lo, double hi, bool open)
{
    const double a = std::log(lo), b = std::log(hi);
    const double u = open ? open_uniform(g, a, b) : uniform(g, a, b);
    return std::clamp(std::exp(u), lo, hi);
}

std::string join(const std::vector<std::string>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
    }
    return out;
}

std::string features_csv(const Dataset& ds)
{
    std::string out;
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
        if (j) out += ',';
        out += "t" + std::to_string(j);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
            if (j) out += ',';
            out += io::format_double(ds.features(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string targets_csv(const Dataset& ds)
{
    std::vector<std::string> head{"row_id"};
    head.insert(head.end(), ds.targets.begin(), ds.targets.end());
    head.push_back("class");
    head.push_back("split");
    std::string out = join(head) + '\n';
    for (std::size_t i = 0; i < ds.n; ++i) {
        std::vector<std::string> row{std::to_string(i)};
        for (std::size_t k = 0; k < ds.targets.size(); ++k)
            row.push_back(io::format_double(ds.target_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k))));
        row.push_back(ds.classes.empty() ? "" : std::to_string(ds.classes[i]));
        row.push_back(ds.split.empty() ? "" : to_string(ds.split[i]));
        out += join(row) + '\n';
    }
    return out;
}

const std::vector<std::string> kParamColumns{"row_id", "stratum", "s",     "eta",
                                             "omega_c", "alpha",  "delta", "gamma",
                                             "kT",     "t_max",   "n_matsubara", "trace_error"};

std::string params_csv(const Dataset& ds)
{
    std::string out = join(kParamColumns) + '\n';
    for (std::size_t i = 0; i < ds.params.size(); ++i) {
        const Params& p = ds.params[i];
        out += join({std::to_string(i), std::to_string(p.stratum), io::format_double(p.s),
                     io::format_double(p.eta), io::format_double(p.omega_c),
                     io::format_double(p.alpha), io::format_double(p.delta),
                     io::format_double(p.gamma), io::format_double(p.kT),
                     io::format_double(p.t_max), std::to_string(p.n_matsubara),
                     io::format_double(p.trace_error)}) +
               '\n';
    }
    return out;
}

json physics_json(const Physics& p)
{
    return {
        {"dephasing_omega_c", p.dephasing_omega_c},
        {"dephasing_omega0", p.dephasing_omega0},
        {"dephasing_t_max", p.dephasing_t_max},
        {"s_class_eta", p.s_class_eta},
        {"eta_task_s", p.eta_task_s},
        {"ohmic_band", p.ohmic_band},
        {"sb_gamma", p.sb_gamma},
        {"sb_omega_c", p.sb_omega_c},
        {"sb_omega0", p.sb_omega0},
        {"kT_over_delta", p.kT_over_delta},
        {"alpha_min", p.alpha_min},
        {"alpha_max", p.alpha_max},
        {"reference_alpha", p.reference_alpha},
        {"tau_max", p.tau_max},
        {"heom_depth", p.heom_depth},
        {"heom_min_matsubara", p.heom_min_matsubara},
        {"heom_matsubara_margin", p.heom_matsubara_margin},
    };
}

Physics physics_from_json(const json& j)
{
    Physics p;
    p.dephasing_omega_c = j.at("dephasing_omega_c");
    p.dephasing_omega0 = j.at("dephasing_omega0");
    p.dephasing_t_max = j.at("dephasing_t_max");
    p.s_class_eta = j.at("s_class_eta");
    p.eta_task_s = j.at("eta_task_s");
    p.ohmic_band = j.at("ohmic_band");
    p.sb_gamma = j.at("sb_gamma");
    p.sb_omega_c = j.at("sb_omega_c");
    p.sb_omega0 = j.at("sb_omega0");
    p.kT_over_delta = j.at("kT_over_delta");
    p.alpha_min = j.at("alpha_min");
    p.alpha_max = j.at("alpha_max");
    p.reference_alpha = j.at("reference_alpha");
    p.tau_max = j.at("tau_max");
    p.heom_depth = j.at("heom_depth");
    p.heom_min_matsubara = j.at("heom_min_matsubara");
    p.heom_matsubara_margin = j.at("heom_matsubara_margin");
    return p;
}

json intervals_json(Task task, Mode mode, const Physics& p)
{
    switch (task) {
    case Task::s_class:
        if (mode == Mode::separated) return {{"s", {{0.1, 0.25}, {1.0, 1.0}, {2.0, 4.0}}}};
        return {{"s", {{0.1, 4.0}}}};
    case Task::eta:
        if (mode == Mode::separated) return {{"eta", {{0.01, 0.1}, {0.7, 1.0}}}};
        return {{"eta", {{0.001, 1.0}}}};
    case Task::alpha:
        return {{"alpha", {{p.alpha_min, p.alpha_max}}}};
    }
    return {};
}

void check_row(std::span<const double> row)
{
    for (const double v : row)
        if (!std::isfinite(v)) throw SimulationError("non-finite feature");
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    if (*lo == *hi) throw SimulationError("constant feature row");
}

} // namespace

heom::SpinBosonSpec spin_boson_spec(const Physics& ph, double alpha)
{
    heom::SpinBosonSpec spec;
    spec.omega0 = ph.sb_omega0;
    spec.delta = ph.sb_omega_c / alpha;
    spec.bath = {bath::LorentzDrude{ph.sb_gamma, ph.sb_omega_c}, ph.kT_over_delta * spec.delta};
    spec.initial = DensityMatrix2::excited();
    spec.t_max = ph.tau_max / spec.delta;
    return spec;
}

heom::Trajectory run_spin_boson(const Physics& ph, double alpha)
{
    const auto spec = spin_boson_spec(ph, alpha);
    heom::HierarchySpec h;
    h.depth = ph.heom_depth;
    h.n_matsubara = heom::matsubara_for(spec, ph.heom_min_matsubara, ph.heom_matsubara_margin);
    auto traj = heom::propagate(spec, h);
    if (traj.max_trace_error > kTraceBudget) {
        std::ostringstream msg;
        msg << "trace drifted by " << traj.max_trace_error << " (budget " << kTraceBudget << ")";
        throw SimulationError(msg.str());
    }
    return traj;
}

std::string to_string(Task t)
{
    switch (t) {
    case Task::s_class: return "s_class";
    case Task::eta: return "eta";
    case Task::alpha: return "alpha";
    }
    return "?";
}

std::string to_string(Mode m) { return m == Mode::separated ? "separated" : "continuous"; }

std::string to_string(Split s)
{
    switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "?";
}

Task parse_task(std::string_view name)
{
    std::string s(name);
    std::replace(s.begin(), s.end(), '-', '_');
    if (s == "s_class") return Task::s_class;
    if (s == "eta") return Task::eta;
    if (s == "alpha" || s == "log_alpha" || s == "sigma_alpha") return Task::alpha;
    throw UsageError("unknown task '" + s + "' (s_class, eta, alpha)");
}

Mode parse_mode(std::string_view s)
{
    if (s == "separated") return Mode::separated;
    if (s == "continuous") return Mode::continuous;
    throw UsageError("unknown mode '" + std::string(s) + "' (separated, continuous)");
}

Split parse_split(std::string_view s)
{
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw Error("unknown split '" + std::string(s) + "'");
}

std::vector<std::string> target_names(Task t)
{
    switch (t) {
    case Task::s_class: return {"s"};
    case Task::eta: return {"eta"};
    case Task::alpha: return {"alpha", "log_alpha", "sigma_alpha"};
    }
    return {};
}

std::vector<Params> sample_parameters(Task task, Mode mode, std::size_t n, std::uint64_t seed,
                                      const Physics& ph)
{
    if (n < 1) throw DomainError("sample_parameters: n must be >= 1");
    if (task == Task::alpha && mode == Mode::separated)
        throw DomainError("sample_parameters: the alpha task has no separated mode");
    if (task == Task::alpha && !(ph.alpha_min > 0.0 && ph.alpha_max >= ph.alpha_min))
        throw DomainError("sample_parameters: invalid alpha interval");

    std::vector<Params> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto g = derive_stream(seed, i);
        Params& p = out[i];
        switch (task) {
        case Task::s_class:
            p.eta = ph.s_class_eta;
            p.omega_c = ph.dephasing_omega_c;
            p.t_max = ph.dephasing_t_max;
            if (mode == Mode::separated) {
                p.stratum = static_cast<int>(i % 3);
                p.s = p.stratum == 0 ? open_uniform(g, 0.1, 0.25)
                    : p.stratum == 1 ? 1.0
                                     : open_uniform(g, 2.0, 4.0);
            } else {
                p.s = open_uniform(g, 0.1, 4.0);
            }
            break;
        case Task::eta:
            p.s = ph.eta_task_s;
            p.omega_c = ph.dephasing_omega_c;
            p.t_max = ph.dephasing_t_max;
            if (mode == Mode::separated) {
                p.stratum = static_cast<int>(i % 2);
                p.eta = p.stratum == 0 ? log_uniform(g, 0.01, 0.1, true)
                                       : log_uniform(g, 0.7, 1.0, true);
            } else {
                p.eta = log_uniform(g, 1e-3, 1.0, true);
            }
            break;
        case Task::alpha:
            p.alpha = log_uniform(g, ph.alpha_min, ph.alpha_max, false);
            p.omega_c = ph.sb_omega_c;
            p.gamma = ph.sb_gamma;
            p.delta = ph.sb_omega_c / p.alpha;
            p.kT = ph.kT_over_delta * p.delta;
            p.t_max = ph.tau_max / p.delta;
            break;
        }
    }
    return out;
}

int label_s_class(double s, double band)
{
    if (!(s > 0.0)) throw DomainError("label_s_class: s must be > 0");
    if (s < 1.0 - band) return 0;
    if (s > 1.0 + band) return 2;
    return 1;
}

std::size_t Dataset::target_column(std::string_view name) const
{
    for (std::size_t k = 0; k < targets.size(); ++k)
        if (targets[k] == name) return k;
    throw TaskMismatchError("dataset (task " + to_string(task) + ") has no target '" +
                            std::string(name) + "'");
}

std::vector<std::size_t> Dataset::rows(Split s) const
{
    if (split.size() != n) throw Error("dataset has no split assignment");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

Dataset generate(Task task, Mode mode, std::size_t n, std::uint64_t seed, const Physics& ph,
                 const GenerateOptions& opt)
{
    Dataset ds;
    ds.task = task;
    ds.mode = mode;
    ds.n = n;
    ds.seed = seed;
    ds.physics = ph;
    ds.params = sample_parameters(task, mode, n, seed, ph);
    ds.targets = target_names(task);
    ds.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dephasing::kGridSize));
    ds.target_values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(ds.targets.size()));

    dephasing::GammaCache cache;
    const auto dephasing_grid = dephasing::uniform_grid(ph.dephasing_t_max);
    // Dimensionless grid shared by every spin-boson run.
    const auto tau = dephasing::uniform_grid(ph.tau_max);
    std::vector<DensityMatrix2> reference;
    if (task == Task::alpha) reference = run_spin_boson(ph, ph.reference_alpha).states;

    std::vector<std::string> failures(n);
    std::atomic<std::size_t> next{0}, done{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            Params& p = ds.params[i];
            const auto row_index = static_cast<Eigen::Index>(i);
            try {
                std::vector<double> row;
                if (task == Task::alpha) {
                    const auto traj = run_spin_boson(ph, p.alpha);
                    row = traj.population_difference;
                    p.n_matsubara = traj.n_matsubara;
                    p.trace_error = traj.max_trace_error;
                    const auto labels = nonmarkov::sigma_alpha_labels(
                        {{p.alpha, traj.states}, {ph.reference_alpha, reference}}, ph.reference_alpha, tau);
                    ds.target_values(row_index, 0) = p.alpha;
                    ds.target_values(row_index, 1) = std::log(p.alpha);
                    ds.target_values(row_index, 2) = labels.at(p.alpha).sigma;
                } else {
                    dephasing::DephasingRun run;
                    run.sd = {p.eta, p.s, p.omega_c};
                    run.omega0 = ph.dephasing_omega0;
                    run.time_grid = dephasing_grid;
                    row = dephasing::coherence_feature(dephasing::evolve_dephasing(run, &cache));
                    ds.target_values(row_index, 0) = task == Task::s_class ? p.s : p.eta;
                }
                check_row(row);
                for (std::size_t j = 0; j < row.size(); ++j)
                    ds.features(row_index, static_cast<Eigen::Index>(j)) = row[j];
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
            const std::size_t d = ++done;
            if (opt.progress) opt.progress(d, n);
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(n)));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    std::ostringstream report;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty()) {
            if (failed < 20) report << "\n  row " << i << ": " << failures[i];
            ++failed;
        }
    if (failed) {
        std::ostringstream msg;
        msg << "dataset rejected: " << failed << " of " << n << " rows failed" << report.str();
        throw SimulationError(msg.str());
    }

    if (task == Task::s_class) {
        ds.classes.resize(n);
        for (std::size_t i = 0; i < n; ++i) ds.classes[i] = label_s_class(ds.params[i].s, ph.ohmic_band);
    }
    return ds;
}

void split(Dataset& ds, std::uint64_t seed)
{
    const std::size_t n = ds.n;
    if (n < 1) throw DomainError("split: empty dataset");
    auto g = derive_stream(splitmix64(seed ^ 0x73706c6974ULL), 0);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order.begin(), order.end(), g);
    if (!ds.classes.empty())
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return ds.classes[a] < ds.classes[b]; });
    // A repeating train,val,train,test,train pattern over class-grouped rows
    // keeps every class, and any truncated final block, within one row of 3:1:1.
    static constexpr Split kPattern[5] = {Split::train, Split::val, Split::train, Split::test, Split::train};
    ds.split.assign(n, Split::train);
    for (std::size_t p = 0; p < n; ++p) ds.split[order[p]] = kPattern[p % 5];
}

std::string features_digest(const Dataset& ds) { return io::hex_digest(features_csv(ds)); }

std::map<std::string, std::string> file_digests(const Dataset& ds)
{
    return {{"features.csv", io::hex_digest(features_csv(ds))},
            {"targets.csv", io::hex_digest(targets_csv(ds))},
            {"params.csv", io::hex_digest(params_csv(ds))}};
}

void write(const Dataset& ds, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    const std::string feats = features_csv(ds);
    const std::string targs = targets_csv(ds);
    const std::string pars = params_csv(ds);
    const bool spin_boson_task = ds.task == Task::alpha;
    json meta = {
        {"format", "noisespec-dataset"},
        {"version", kVersion},
        {"task", to_string(ds.task)},
        {"mode", to_string(ds.mode)},
        {"n", ds.n},
        {"seed", ds.seed},
        {"config_hash", ds.config_hash},
        {"physics", physics_json(ds.physics)},
        {"intervals", intervals_json(ds.task, ds.mode, ds.physics)},
        {"grid",
         {{"samples", dephasing::kGridSize},
          {"t_max", spin_boson_task ? ds.physics.tau_max : ds.physics.dephasing_t_max},
          {"time_unit", spin_boson_task ? "1/delta" : "1/omega0"},
          {"feature", spin_boson_task ? "population_difference" : "re_rho01"}}},
        {"targets", ds.targets},
        {"has_classes", !ds.classes.empty()},
        {"split_seed", ds.seed},
        {"digests", {{"features", io::hex_digest(feats)}, {"targets", io::hex_digest(targs)},
                     {"params", io::hex_digest(pars)}}},
    };
    io::write_file(dir / "features.csv", feats);
    io::write_file(dir / "targets.csv", targs);
    io::write_file(dir / "params.csv", pars);
    io::write_file(dir / "meta.json", meta.dump(2) + "\n");
}

Dataset read(const std::filesystem::path& dir)
{
    Dataset ds;
    json meta;
    try {
        meta = json::parse(io::read_file(dir / "meta.json"));
    } catch (const json::exception& e) {
        throw Error("dataset " + dir.string() + ": bad meta.json: " + e.what());
    }
    if (meta.value("format", "") != "noisespec-dataset")
        throw Error("dataset " + dir.string() + ": not a noisespec dataset");
    ds.task = parse_task(meta.at("task").get<std::string>());
    ds.mode = parse_mode(meta.at("mode").get<std::string>());
    ds.n = meta.at("n").get<std::size_t>();
    ds.seed = meta.at("seed").get<std::uint64_t>();
    ds.config_hash = meta.at("config_hash").get<std::string>();
    ds.physics = physics_from_json(meta.at("physics"));
    ds.targets = meta.at("targets").get<std::vector<std::string>>();
    const bool has_classes = meta.at("has_classes").get<bool>();

    const auto feats = io::parse_csv(io::read_file(dir / "features.csv"));
    if (feats.rows.size() != ds.n) throw ShapeError("features.csv row count does not match meta.json");
    const auto width = static_cast<Eigen::Index>(feats.header.size());
    ds.features.resize(static_cast<Eigen::Index>(ds.n), width);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (feats.rows[i].size() != feats.header.size())
            throw ShapeError("features.csv row " + std::to_string(i) + " has the wrong width");
        for (Eigen::Index j = 0; j < width; ++j)
            ds.features(static_cast<Eigen::Index>(i), j) = io::parse_double(feats.rows[i][static_cast<std::size_t>(j)]);
    }

    const auto targs = io::parse_csv(io::read_file(dir / "targets.csv"));
    if (targs.rows.size() != ds.n) throw ShapeError("targets.csv row count does not match meta.json");
    ds.target_values.resize(static_cast<Eigen::Index>(ds.n), static_cast<Eigen::Index>(ds.targets.size()));
    const std::size_t class_col = targs.column("class");
    const std::size_t split_col = targs.column("split");
    bool any_split = false;
    for (std::size_t i = 0; i < ds.n; ++i) {
        const auto& row = targs.rows[i];
        for (std::size_t k = 0; k < ds.targets.size(); ++k)
            ds.target_values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                io::parse_double(row.at(targs.column(ds.targets[k])));
        if (has_classes) ds.classes.push_back(std::stoi(row.at(class_col)));
        if (!row.at(split_col).empty()) {
            any_split = true;
            ds.split.push_back(parse_split(row.at(split_col)));
        }
    }
    if (any_split && ds.split.size() != ds.n) throw ShapeError("targets.csv: incomplete split column");

    const auto pars = io::parse_csv(io::read_file(dir / "params.csv"));
    for (const auto& row : pars.rows) {
        Params p;
        p.stratum = std::stoi(row.at(pars.column("stratum")));
        p.s = io::parse_double(row.at(pars.column("s")));
        p.eta = io::parse_double(row.at(pars.column("eta")));
        p.omega_c = io::parse_double(row.at(pars.column("omega_c")));
        p.alpha = io::parse_double(row.at(pars.column("alpha")));
        p.delta = io::parse_double(row.at(pars.column("delta")));
        p.gamma = io::parse_double(row.at(pars.column("gamma")));
        p.kT = io::parse_double(row.at(pars.column("kT")));
        p.t_max = io::parse_double(row.at(pars.column("t_max")));
        p.n_matsubara = std::stoi(row.at(pars.column("n_matsubara")));
        p.trace_error = io::parse_double(row.at(pars.column("trace_error")));
        ds.params.push_back(p);
    }
    if (ds.params.size() != ds.n) throw ShapeError("params.csv row count does not match meta.json");
    return ds;
}

} // namespace noisespec::dataset
