#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "noisespec/heom.hpp"
#include "noisespec/matrix.hpp"

namespace noisespec::dataset {

enum class Task { s_class, eta, alpha };
enum class Mode { separated, continuous };
enum class Split : std::uint8_t { train, val, test };

std::string to_string(Task t);
std::string to_string(Mode m);
std::string to_string(Split s);
/// Accepts the generation tasks plus the alpha-dataset targets log_alpha and sigma_alpha.
Task parse_task(std::string_view s);
Mode parse_mode(std::string_view s);
Split parse_split(std::string_view s);

/// Regression targets stored for each task (the s_class task also stores s).
std::vector<std::string> target_names(Task t);

/// Fixed physics and sampling intervals. Defaults reproduce the reference setup.
struct Physics {
    // Pure dephasing tasks.
    double dephasing_omega_c = 0.5;
    double dephasing_omega0 = 1.0;
    double dephasing_t_max = 20.0;
    double s_class_eta = 0.25;   // coupling held fixed while s varies
    double eta_task_s = 1.0;     // Ohmicity held fixed while eta varies
    double ohmic_band = 0.1;     // |s - 1| <= band labels class 1

    // Spin-boson task.
    double sb_gamma = 0.25;
    double sb_omega_c = 0.5;
    double sb_omega0 = 1.0;
    double kT_over_delta = 0.5;
    double alpha_min = 0.166;
    double alpha_max = 10.0;
    double reference_alpha = 10.0;
    double tau_max = 20.0;  // T_max = tau_max / delta
    int heom_depth = 5;
    int heom_min_matsubara = 2;
    int heom_matsubara_margin = 2;
};

/// Physics of one row. Unused fields stay 0.
struct Params {
    int stratum = -1;
    double s = 0.0;
    double eta = 0.0;
    double omega_c = 0.0;
    double alpha = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double kT = 0.0;
    double t_max = 0.0;
    int n_matsubara = 0;
    double trace_error = 0.0;
};

/// Per-row draws from independent streams of `seed`. Separated mode assigns
/// strata round-robin, so any three consecutive s_class rows cover all three.
std::vector<Params> sample_parameters(Task task, Mode mode, std::size_t n, std::uint64_t seed,
                                      const Physics& physics = {});

/// 0 sub-Ohmic, 1 Ohmic (|s - 1| <= band), 2 super-Ohmic.
int label_s_class(double s, double band = 0.1);

struct Dataset {
    Task task = Task::eta;
    Mode mode = Mode::continuous;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    Physics physics;
    std::string config_hash;
    Matrix features;                   // n x 200
    std::vector<std::string> targets;  // column names
    Matrix target_values;              // n x targets.size()
    std::vector<int> classes;          // empty for regression tasks
    std::vector<Split> split;          // empty until split() runs
    std::vector<Params> params;

    std::size_t target_column(std::string_view name) const;
    std::vector<std::size_t> rows(Split s) const;
};

struct GenerateOptions {
    unsigned workers = 1;
    /// Called from worker threads with (rows done, total).
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Spin-boson setup of an alpha row: delta = omega_c / alpha, with the
/// temperature and horizon scaled by delta.
heom::SpinBosonSpec spin_boson_spec(const Physics& ph, double alpha);

/// HEOM run of an alpha row with the dataset's hierarchy policy. Throws
/// SimulationError when the trace drifts beyond 1e-8.
heom::Trajectory run_spin_boson(const Physics& ph, double alpha);

/// Runs the simulators for every sampled row. A failing row aborts the whole
/// dataset; the error lists every failed row.
Dataset generate(Task task, Mode mode, std::size_t n, std::uint64_t seed,
                 const Physics& physics = {}, const GenerateOptions& opt = {});

/// 3/5 train, 1/5 val, 1/5 test of a seeded permutation, stratified by class
/// when classes are present.
void split(Dataset& ds, std::uint64_t seed);

/// Directory with features.csv, targets.csv, params.csv and meta.json.
void write(const Dataset& ds, const std::filesystem::path& dir);
Dataset read(const std::filesystem::path& dir);

/// FNV digest of the serialized feature matrix.
std::string features_digest(const Dataset& ds);

/// Digest of each serialized file ("features.csv", "targets.csv", "params.csv").
std::map<std::string, std::string> file_digests(const Dataset& ds);

} // namespace noisespec::dataset
