// Acceptance checks. Each criterion prints one line:
//   criterion N: PASS|FAIL <measurements>
// Usage: acceptance [--criterion N]... (all criteria when none is given)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "../unit/helpers.hpp"
#include "noisespec/cli/commands.hpp"
#include "noisespec/dataset.hpp"
#include "noisespec/dephasing.hpp"
#include "noisespec/error.hpp"
#include "noisespec/heom.hpp"
#include "noisespec/io.hpp"
#include "noisespec/model.hpp"
#include "noisespec/nn.hpp"
#include "noisespec/nonmarkov.hpp"

using namespace noisespec;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

dataset::Dataset make_dataset(dataset::Task task, dataset::Mode mode, std::size_t n)
{
    dataset::GenerateOptions opt;
    opt.workers = std::max(1u, std::thread::hardware_concurrency());
    auto ds = dataset::generate(task, mode, n, kSeed, {}, opt);
    dataset::split(ds, kSeed);
    return ds;
}

model::Evaluation fit_and_score(const dataset::Dataset& ds, model::Kind kind, const std::string& target,
                                int epochs = 3000)
{
    model::TrainSpec spec;
    spec.kind = kind;
    spec.target = target;
    spec.forest.seed = kSeed;
    spec.net.seed = kSeed;
    spec.net.epochs = epochs;
    return model::evaluate(model::fit(ds, spec), ds, dataset::Split::test);
}

// P(t) of the isolated two-level system by diagonalizing H_S.
std::vector<double> closed_system_p(const heom::SpinBosonSpec& s, const std::vector<double>& times)
{
    Eigen::Matrix2cd H;
    H << -0.5 * s.omega0, s.delta, s.delta, 0.5 * s.omega0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
    std::vector<double> out;
    for (const double t : times) {
        Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
        for (int k = 0; k < 2; ++k) phase(k, k) = std::exp(cplx(0.0, -es.eigenvalues()[k] * t));
        const Eigen::Matrix2cd U = es.eigenvectors() * phase * es.eigenvectors().adjoint();
        const Eigen::Matrix2cd rho = U * s.initial.matrix() * U.adjoint();
        out.push_back((rho(1, 1) - rho(0, 0)).real());
    }
    return out;
}

Outcome dephasing_oracle()
{
    double worst = 0.0;
    for (const double eta : {0.1, 0.25, 0.9}) {
        dephasing::DephasingRun run;
        run.sd = {eta, 1.0, 0.5};
        run.temperature_kT = 0.0;
        const auto states = dephasing::evolve_dephasing(run);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double t = run.time_grid[i];
            const double exact = 0.5 * std::exp(-2.0 * eta * std::log1p(0.25 * t * t));
            worst = std::max(worst, std::abs(std::abs(states[i].rho01()) - exact) / exact);
        }
    }
    return {worst < 1e-5, "max relative error " + fmt("%.3e", worst) + " (< 1e-5)"};
}

Outcome heom_cross_validation()
{
    heom::SpinBosonSpec s;
    s.delta = 0.5;
    s.bath = {bath::LorentzDrude{1e-8, 0.5}, 0.25};
    auto t0 = Clock::now();
    const auto traj = heom::propagate(s, heom::HierarchySpec{});
    double slowest = seconds_since(t0);
    const auto ref = closed_system_p(s, traj.time);
    double sup = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) sup = std::max(sup, std::abs(ref[i] - traj.population_difference[i]));

    // Trace drift on dataset runs spanning the alpha interval, both ends included.
    const dataset::Physics ph;
    std::vector<double> alphas{ph.alpha_min, ph.reference_alpha};
    const auto rows = dataset::sample_parameters(dataset::Task::alpha, dataset::Mode::continuous, 20, kSeed, ph);
    for (const auto& p : rows) alphas.push_back(p.alpha);
    double drift = traj.max_trace_error;
    for (const double a : alphas) {
        t0 = Clock::now();
        try {
            drift = std::max(drift, dataset::run_spin_boson(ph, a).max_trace_error);
        } catch (const SimulationError&) {
            drift = std::max(drift, 1.0);
        }
        slowest = std::max(slowest, seconds_since(t0));
    }
    const bool pass = sup < 1e-4 && drift < 1e-8 && slowest < 60.0;
    return {pass, "unitary sup " + fmt("%.3e", sup) + " (< 1e-4), max trace drift " + fmt("%.3e", drift) +
                      " over " + std::to_string(alphas.size() + 1) + " runs (< 1e-8), slowest run " +
                      fmt("%.1f", slowest) + " s"};
}

Outcome heom_convergence()
{
    heom::SpinBosonSpec s;
    s.delta = 0.5;
    s.bath = {bath::LorentzDrude{0.25, 0.5}, 0.5 * s.delta};
    heom::HierarchySpec h;
    h.depth = 4;
    h.n_matsubara = 2;
    const auto r = heom::convergence_check(s, h);
    const bool pass = r.delta_L < 1e-4 && r.delta_K < 1e-4;
    return {pass, "sup|P(L=4)-P(L=5)| " + fmt("%.3e", r.delta_L) + ", sup|P(K=2)-P(K=3)| " +
                      fmt("%.3e", r.delta_K) + " (both < 1e-4)"};
}

Outcome trace_distance_axioms()
{
    std::mt19937_64 g(kSeed);
    int violations = 0;
    double worst_oracle = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto a = testing::random_state(g), b = testing::random_state(g), c = testing::random_state(g);
        const double ab = nonmarkov::trace_distance(a, b), ba = nonmarkov::trace_distance(b, a);
        const double ac = nonmarkov::trace_distance(a, c), cb = nonmarkov::trace_distance(c, b);
        if (ab != ba) ++violations;
        if (ab < 0.0 || ab > 1.0) ++violations;
        if (ab > ac + cb + 1e-15) ++violations;
        if (nonmarkov::trace_distance(a, a) != 0.0) ++violations;
        if (!(a == b) && ab <= 0.0) ++violations;
        worst_oracle = std::max(worst_oracle, std::abs(ab - testing::eigen_trace_distance(a.matrix(), b.matrix())));
    }
    const double known =
        std::abs(nonmarkov::trace_distance(DensityMatrix2::plus(), DensityMatrix2::ground()) - 1.0 / std::sqrt(2.0));
    const bool pass = violations == 0 && known < 1e-12 && worst_oracle < 1e-12;
    return {pass, std::to_string(violations) + " axiom violations on 1000 triples, |D(+,0) - 1/sqrt2| " +
                      fmt("%.1e", known) + ", max deviation from eigensolver " + fmt("%.1e", worst_oracle)};
}

Outcome sigma_labels()
{
    const dataset::Physics ph;
    std::map<double, std::vector<DensityMatrix2>> runs;
    const int count = 12;
    for (int i = 0; i < count; ++i) {
        const double a = i == count - 1 ? ph.reference_alpha
                                        : ph.alpha_min * std::pow(ph.alpha_max / ph.alpha_min, i / double(count - 1));
        runs[a] = dataset::run_spin_boson(ph, a).states;
    }
    const auto tau = dephasing::uniform_grid(ph.tau_max);
    const auto labels = nonmarkov::sigma_alpha_labels(runs, ph.reference_alpha, tau);
    const double at_ref = labels.at(ph.reference_alpha).sigma;
    const auto best = std::max_element(labels.begin(), labels.end(),
                                       [](const auto& x, const auto& y) { return x.second.sigma < y.second.sigma; });
    const bool pass = at_ref == 0.0 && best->first == runs.begin()->first;
    return {pass, "sigma(alpha=10) = " + fmt("%g", at_ref) + ", argmax at alpha " + fmt("%.3f", best->first) +
                      " (sweep minimum " + fmt("%.3f", runs.begin()->first) + "), max sigma " +
                      fmt("%.4f", best->second.sigma)};
}

Outcome ohmicity_classification()
{
    const auto t0 = Clock::now();
    const auto sep = make_dataset(dataset::Task::s_class, dataset::Mode::separated, 2000);
    const auto a = fit_and_score(sep, model::Kind::ffnn, "class", 500);
    const auto cont = make_dataset(dataset::Task::s_class, dataset::Mode::continuous, 2000);
    const auto b = fit_and_score(cont, model::Kind::ffnn, "class", 3000);
    const auto& ra = *a.classification;
    const auto& rb = *b.classification;
    const double min_f1 = *std::min_element(rb.f1.begin(), rb.f1.end());
    const double runtime = seconds_since(t0);
    const bool pass = ra.accuracy == 1.0 && rb.accuracy >= 0.95 && min_f1 >= 0.93 && runtime <= 900.0;
    return {pass, "separated accuracy " + fmt("%.4f", ra.accuracy) + " (= 1 at 500 epochs), continuous accuracy " +
                      fmt("%.4f", rb.accuracy) + " (>= 0.95), F1 " + fmt("%.3f", rb.f1[0]) + "/" +
                      fmt("%.3f", rb.f1[1]) + "/" + fmt("%.3f", rb.f1[2]) + " (>= 0.93), " + fmt("%.0f", runtime) +
                      " s"};
}

Outcome eta_regression()
{
    const auto ds = make_dataset(dataset::Task::eta, dataset::Mode::continuous, 2000);
    const auto rfr = fit_and_score(ds, model::Kind::forest, "eta");
    const auto svr = fit_and_score(ds, model::Kind::svr, "eta");
    const auto net = fit_and_score(ds, model::Kind::ffnn, "eta");
    const double r_rfr = *rfr.regression->r2, r_svr = *svr.regression->r2, m_net = net.regression->mse;
    const bool pass = r_rfr >= 0.99 && m_net <= 1e-4 && r_svr >= 0.90 && r_svr <= 1.0;
    return {pass, "RFR R2 " + fmt("%.5f", r_rfr) + " (>= 0.99), FFNN MSE " + fmt("%.3e", m_net) +
                      " (<= 1e-4), SVR R2 " + fmt("%.5f", r_svr) + " (in [0.90, 1])"};
}

Outcome alpha_regression()
{
    const auto t0 = Clock::now();
    const auto ds = make_dataset(dataset::Task::alpha, dataset::Mode::continuous, 1000);
    const double gen = seconds_since(t0);
    bool pass = true;
    std::string detail;
    std::map<std::string, std::map<model::Kind, double>> r2;
    for (const std::string target : {"alpha", "log_alpha", "sigma_alpha"}) {
        for (const auto kind : {model::Kind::forest, model::Kind::svr, model::Kind::ffnn})
            r2[target][kind] = *fit_and_score(ds, kind, target).regression->r2;
        const auto& r = r2[target];
        pass = pass && r.at(model::Kind::forest) >= 0.99 && r.at(model::Kind::ffnn) >= 0.99;
        if (target != "sigma_alpha") pass = pass && r.at(model::Kind::svr) >= 0.90;
        detail += target + " R2 RFR/SVR/FFNN " + fmt("%.5f", r.at(model::Kind::forest)) + "/" +
                  fmt("%.5f", r.at(model::Kind::svr)) + "/" + fmt("%.5f", r.at(model::Kind::ffnn)) + "; ";
    }
    const auto& s = r2["sigma_alpha"];
    const bool ordered = std::min(s.at(model::Kind::forest), s.at(model::Kind::ffnn)) > s.at(model::Kind::svr);
    const double runtime = seconds_since(t0);
    pass = pass && ordered && runtime <= 2700.0;
    return {pass, detail + "sigma ordering FFNN/RFR > SVR " + (ordered ? "holds" : "broken") + "; generation " +
                      fmt("%.0f", gen) + " s, total " + fmt("%.0f", runtime) + " s"};
}

Matrix random_matrix(int n, int p, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = d(g);
    return X;
}

// Largest relative error over 100 sampled parameters.
double gradient_error(nn::Network& net, const Matrix& X, const Matrix& T, std::uint64_t seed)
{
    const auto g = net.backward(X, T);
    std::vector<double> flat;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (Eigen::Index i = 0; i < g.dW[l].size(); ++i) flat.push_back(g.dW[l].data()[i]);
        for (Eigen::Index i = 0; i < g.db[l].size(); ++i) flat.push_back(g.db[l][i]);
    }
    std::mt19937_64 gen(seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, flat.size() - 1)(gen);
        double& w = net.parameter(k);
        const double keep = w;
        w = keep + h;
        const double up = net.loss(X, T);
        w = keep - h;
        const double down = net.loss(X, T);
        w = keep;
        const double numeric = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(flat[k] - numeric) / (std::abs(flat[k]) + 1e-8));
    }
    return worst;
}

Outcome gradient_check()
{
    nn::Network reg({20, 32, 16, 1}, nn::NetTask::regression, kSeed);
    const Matrix X = random_matrix(16, 20, 1);
    const double e_mse = gradient_error(reg, X, random_matrix(16, 1, 2).cwiseAbs(), 3);

    nn::Network cls({20, 32, 16, 3}, nn::NetTask::classification, kSeed);
    Matrix T = Matrix::Zero(16, 3);
    for (int i = 0; i < 16; ++i) T(i, i % 3) = 1.0;
    const double e_ce = gradient_error(cls, X, T, 4);
    return {e_mse < 1e-4 && e_ce < 1e-4,
            "max relative error MSE " + fmt("%.2e", e_mse) + ", cross-entropy " + fmt("%.2e", e_ce) + " (< 1e-4)"};
}

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "noisespec");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

// Every file under `dir`, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return out;
}

void pipeline(const fs::path& dir, const std::string& workers)
{
    const auto p = [&](const char* s) { return (dir / s).string(); };
    const std::vector<std::vector<std::string>> steps{
        {"generate", "--task", "eta", "--n", "150", "--seed", "5", "--workers", workers, "--out", p("eta")},
        {"generate", "--task", "s-class", "--n", "150", "--seed", "5", "--workers", workers, "--out", p("cls")},
        {"generate", "--task", "alpha", "--n", "10", "--seed", "5", "--workers", workers, "--out", p("alpha")},
        {"train", "--dataset", p("eta"), "--model", "forest", "--workers", workers, "--out", p("forest.json")},
        {"train", "--dataset", p("eta"), "--model", "svr", "--svg", "--out", p("svr.json")},
        {"train", "--dataset", p("eta"), "--model", "ffnn", "--epochs", "40", "--svg", "--out", p("net.json")},
        {"train", "--dataset", p("cls"), "--model", "ffnn", "--epochs", "40", "--lr", "1e-3", "--out", p("cls.json")},
        {"train", "--dataset", p("alpha"), "--model", "forest", "--target", "sigma_alpha", "--out", p("a.json")},
        {"eval", "--model", p("forest.json"), "--dataset", p("eta"), "--svg", "--out", p("r_forest")},
        {"eval", "--model", p("svr.json"), "--dataset", p("eta"), "--out", p("r_svr")},
        {"eval", "--model", p("net.json"), "--dataset", p("eta"), "--out", p("r_net")},
        {"eval", "--model", p("cls.json"), "--dataset", p("cls"), "--svg", "--out", p("r_cls")},
        {"eval", "--model", p("a.json"), "--dataset", p("alpha"), "--split", "train", "--out", p("r_alpha")},
        {"predict", "--model", p("cls.json"), "--features", p("cls/features.csv"), "--out", p("pred.csv")},
    };
    for (const auto& s : steps)
        if (cli(s) != 0) throw std::runtime_error("pipeline step failed: " + s[0]);
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / "noisespec_acceptance_determinism";
    fs::remove_all(root);
    pipeline(root / "a", "1");
    pipeline(root / "b", "1");
    pipeline(root / "c", "3");
    const auto a = snapshot(root / "a"), b = snapshot(root / "b"), c = snapshot(root / "c");
    int differing = 0;
    std::string first;
    for (const auto& [name, bytes] : a) {
        const bool same = b.count(name) && c.count(name) && b.at(name) == bytes && c.at(name) == bytes;
        if (!same) {
            ++differing;
            if (first.empty()) first = name;
        }
    }
    const bool pass = differing == 0 && a.size() == b.size() && a.size() == c.size() && !a.empty();
    fs::remove_all(root);
    return {pass, std::to_string(a.size()) + " artifacts compared across 3 runs (1, 1, 3 workers), " +
                      std::to_string(differing) + " differ" + (first.empty() ? "" : " (first: " + first + ")")};
}

} // namespace

int main(int argc, char** argv)
{
    const std::map<int, std::function<Outcome()>> criteria{
        {1, dephasing_oracle},       {2, heom_cross_validation},   {3, heom_convergence},
        {4, trace_distance_axioms},  {5, sigma_labels},            {6, ohmicity_classification},
        {7, eta_regression},         {8, alpha_regression},        {9, gradient_check},
        {10, determinism},
    };
    CLI::App app{"Acceptance checks"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criterion number (repeatable); all when omitted")
        ->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty())
        for (const auto& [k, _] : criteria) selected.push_back(k);

    int failures = 0;
    for (const int k : selected) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria.at(k)();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("criterion %d: %s %s [%.1f s]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
