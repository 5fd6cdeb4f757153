#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "noisespec/bath.hpp"
#include "noisespec/cli/commands.hpp"
#include "noisespec/dataset.hpp"
#include "noisespec/dephasing.hpp"
#include "noisespec/error.hpp"
#include "noisespec/heom.hpp"
#include "noisespec/model.hpp"
#include "noisespec/nonmarkov.hpp"
#include "noisespec/version.hpp"

namespace py = pybind11;
using namespace noisespec;

namespace {

DensityMatrix2 to_state(const Eigen::Matrix2cd& m) { return DensityMatrix2::from_matrix(m, 1e-9, 1e-9, 1e-9); }

Eigen::MatrixXcd states_array(const std::vector<DensityMatrix2>& states)
{
    // one row per time: rho00, rho01, rho10, rho11
    Eigen::MatrixXcd out(static_cast<Eigen::Index>(states.size()), 4);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& m = states[i].matrix();
        const auto r = static_cast<Eigen::Index>(i);
        out(r, 0) = m(0, 0);
        out(r, 1) = m(0, 1);
        out(r, 2) = m(1, 0);
        out(r, 3) = m(1, 1);
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Dissipative qubit simulators, dataset generation and from-scratch regressors";
    m.attr("__version__") = kVersion;

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
    py::register_exception<SimulationError>(m, "SimulationError", base.ptr());
    py::register_exception<TaskMismatchError>(m, "TaskMismatchError", base.ptr());
    py::register_exception<UsageError>(m, "UsageError", base.ptr());

    // bath
    m.def("ohmic_sd", [](double omega, double eta, double s, double omega_c) {
        return bath::evaluate_sd(bath::OhmicFamily{eta, s, omega_c}, omega);
    }, py::arg("omega"), py::arg("eta"), py::arg("s"), py::arg("omega_c"));
    m.def("lorentz_drude_sd", [](double omega, double gamma, double omega_c) {
        return bath::evaluate_sd(bath::LorentzDrude{gamma, omega_c}, omega);
    }, py::arg("omega"), py::arg("gamma"), py::arg("omega_c"));
    m.def("lorentz_drude_correlation", [](double t, double gamma, double omega_c, double kT) {
        return bath::correlation({bath::LorentzDrude{gamma, omega_c}, kT}, t);
    }, py::arg("t"), py::arg("gamma"), py::arg("omega_c"), py::arg("kT"));
    m.def("ohmic_correlation", [](double t, double eta, double s, double omega_c, double kT) {
        return bath::correlation({bath::OhmicFamily{eta, s, omega_c}, kT}, t);
    }, py::arg("t"), py::arg("eta"), py::arg("s"), py::arg("omega_c"), py::arg("kT"));
    m.def("matsubara_terms", [](double gamma, double omega_c, double kT, int n_matsubara) {
        const auto d = bath::matsubara_decompose({bath::LorentzDrude{gamma, omega_c}, kT}, n_matsubara);
        std::vector<std::pair<std::complex<double>, double>> out;
        for (const auto& t : d.terms) out.emplace_back(t.amplitude, t.rate);
        return out;
    }, py::arg("gamma"), py::arg("omega_c"), py::arg("kT"), py::arg("n_matsubara"),
       "(amplitude, rate) pairs of the exponential expansion.");
    m.def("decoherence_gamma", [](double t, double eta, double s, double omega_c, double kT) {
        return bath::decoherence_gamma(bath::OhmicFamily{eta, s, omega_c}, kT, t);
    }, py::arg("t"), py::arg("eta"), py::arg("s"), py::arg("omega_c"), py::arg("kT") = 0.0);

    // dephasing
    m.def("dephasing_coherence", [](double eta, double s, double omega_c, double kT, double omega0, double t_max) {
        dephasing::DephasingRun run;
        run.sd = {eta, s, omega_c};
        run.temperature_kT = kT;
        run.omega0 = omega0;
        run.time_grid = dephasing::uniform_grid(t_max);
        const auto states = dephasing::evolve_dephasing(run);
        std::vector<std::complex<double>> rho01;
        for (const auto& st : states) rho01.push_back(st.rho01());
        return py::make_tuple(run.time_grid, rho01);
    }, py::arg("eta"), py::arg("s") = 1.0, py::arg("omega_c") = 0.5, py::arg("kT") = 0.0, py::arg("omega0") = 1.0,
       py::arg("t_max") = dephasing::kDefaultTmax, "(times, rho01) on the 200-point grid from |+>.");

    // hierarchy
    m.def("spin_boson", [](double delta, double gamma, double omega_c, double kT, double omega0, int depth,
                           int n_matsubara, double t_max) {
        heom::SpinBosonSpec spec;
        spec.delta = delta;
        spec.omega0 = omega0;
        spec.bath = {bath::LorentzDrude{gamma, omega_c}, kT};
        spec.t_max = t_max;
        heom::HierarchySpec h;
        h.depth = depth;
        h.n_matsubara = n_matsubara > 0 ? n_matsubara : heom::matsubara_for(spec);
        heom::Trajectory tr;
        {
            py::gil_scoped_release release;
            tr = heom::propagate(spec, h);
        }
        py::dict out;
        out["time"] = tr.time;
        out["P"] = tr.population_difference;
        out["states"] = states_array(tr.states);
        out["max_trace_error"] = tr.max_trace_error;
        out["n_ados"] = tr.n_ados;
        out["n_matsubara"] = tr.n_matsubara;
        return out;
    }, py::arg("delta") = 0.5, py::arg("gamma") = 0.25, py::arg("omega_c") = 0.5, py::arg("kT") = 0.25,
       py::arg("omega0") = 1.0, py::arg("depth") = 5, py::arg("n_matsubara") = 0, py::arg("t_max") = 0.0);

    // trace distance
    m.def("trace_distance", [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
        return nonmarkov::trace_distance(to_state(a), to_state(b));
    }, py::arg("a"), py::arg("b"));

    // datasets
    py::class_<dataset::Dataset>(m, "Dataset")
        .def_property_readonly("task", [](const dataset::Dataset& d) { return dataset::to_string(d.task); })
        .def_property_readonly("mode", [](const dataset::Dataset& d) { return dataset::to_string(d.mode); })
        .def_readonly("n", &dataset::Dataset::n)
        .def_readonly("seed", &dataset::Dataset::seed)
        .def_readonly("config_hash", &dataset::Dataset::config_hash)
        .def_readonly("features", &dataset::Dataset::features)
        .def_readonly("target_names", &dataset::Dataset::targets)
        .def_readonly("targets", &dataset::Dataset::target_values)
        .def_readonly("classes", &dataset::Dataset::classes)
        .def_property_readonly("split", [](const dataset::Dataset& d) {
            std::vector<std::string> out;
            for (const auto s : d.split) out.push_back(dataset::to_string(s));
            return out;
        })
        .def("rows", [](const dataset::Dataset& d, const std::string& s) { return d.rows(dataset::parse_split(s)); })
        .def("digest", &dataset::features_digest)
        .def("write", [](const dataset::Dataset& d, const std::filesystem::path& p) { dataset::write(d, p); });

    m.def("generate", [](const std::string& task, const std::string& mode, std::size_t n, std::uint64_t seed,
                         unsigned workers) {
        auto ds = dataset::generate(dataset::parse_task(task), dataset::parse_mode(mode), n, seed, {}, {workers, {}});
        dataset::split(ds, seed);
        return ds;
    }, py::arg("task"), py::arg("mode") = "continuous", py::arg("n") = 100, py::arg("seed") = 0,
       py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("read_dataset", [](const std::filesystem::path& p) { return dataset::read(p); }, py::arg("path"));

    // models
    py::class_<model::Artifact>(m, "Model")
        .def_property_readonly("kind", [](const model::Artifact& a) { return model::to_string(a.kind); })
        .def_property_readonly("task", [](const model::Artifact& a) { return dataset::to_string(a.task); })
        .def_readonly("target", &model::Artifact::target)
        .def_readonly("n_features", &model::Artifact::n_features)
        .def("predict", &model::Artifact::predict, py::arg("X"))
        .def("predict_proba", &model::Artifact::predict_proba, py::arg("X"))
        .def("save", [](const model::Artifact& a, const std::filesystem::path& p) { a.save(p); })
        .def_static("load", [](const std::filesystem::path& p) { return model::Artifact::load(p); });

    m.def("fit", [](const dataset::Dataset& ds, const std::string& kind, const std::string& target, int trees,
                    double C, double epsilon, int epochs, double learning_rate, std::uint64_t seed) {
        model::TrainSpec spec;
        spec.kind = model::parse_kind(kind);
        spec.target = target;
        spec.forest.n_estimators = trees;
        spec.forest.seed = seed;
        spec.svr.C = C;
        spec.svr.epsilon = epsilon;
        spec.net.epochs = epochs;
        spec.net.learning_rate = learning_rate;
        spec.net.seed = seed;
        return model::fit(ds, spec);
    }, py::arg("dataset"), py::arg("kind") = "forest", py::arg("target") = "", py::arg("trees") = 100,
       py::arg("C") = 1.0, py::arg("epsilon") = 0.01, py::arg("epochs") = 3000, py::arg("learning_rate") = 1e-4,
       py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());

    m.def("evaluate", [](const model::Artifact& a, const dataset::Dataset& ds, const std::string& split) {
        const auto ev = model::evaluate(a, ds, dataset::parse_split(split));
        return ev.to_json().dump();
    }, py::arg("model"), py::arg("dataset"), py::arg("split") = "test", "Metrics as a JSON string.");

    m.def("cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "noisespec");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        return cli::run(static_cast<int>(argv.size()), argv.data());
    }, py::arg("args"), "Runs a CLI subcommand in-process and returns its exit code.");
}
