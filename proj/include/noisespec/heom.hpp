#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "noisespec/bath.hpp"
#include "noisespec/density_matrix.hpp"

namespace noisespec::heom {

/// H_S = (omega0 / 2) sigma_z + delta sigma_x, coupled to the bath through sigma_z / 2.
struct SpinBosonSpec {
    double omega0 = 1.0;
    double delta = 0.5;
    bath::BathSpec bath{bath::LorentzDrude{0.25, 0.5}, 0.25};
    DensityMatrix2 initial = DensityMatrix2::excited();
    /// Output horizon; 0 selects 20 / delta.
    double t_max = 0.0;

    double horizon() const;
};

void validate(const SpinBosonSpec& spec);

struct HierarchySpec {
    int depth = 5;          // L
    int n_matsubara = 2;    // K
    double dt = 0.0;        // 0: derived from the fastest rate
    int n_steps_internal = 0;  // RK4 steps per output sample; 0: derived from dt
    /// Fold the Matsubara terms beyond K into a delta-correlated correction.
    bool markovian_residual = true;
    std::size_t max_ados = 500000;
};

/// Matsubara count that keeps every discarded rate above the Drude pole:
/// max(min_k, ceil(wc / (2 pi kT)) + margin). Low temperatures need more terms.
int matsubara_for(const SpinBosonSpec& spec, int min_k = 2, int margin = 2);

/// Number of multi-indices n in N^modes with |n| <= depth.
std::uint64_t ado_count(int depth, int modes);

/// Linear HEOM generator acting on the stacked, scaled ADOs (4 entries each,
/// row-major). ADO 0 is the physical reduced density matrix.
class Hierarchy {
public:
    Hierarchy(const SpinBosonSpec& spec, const HierarchySpec& h);

    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t modes() const noexcept { return amplitudes_.size(); }
    const std::vector<std::uint8_t>& multi_index(std::size_t ado) const { return indices_[ado]; }
    /// Number of distinct ADOs that ADO `ado` couples to (raise + lower links).
    std::size_t neighbour_count(std::size_t ado) const;
    double max_rate() const noexcept { return max_rate_; }
    const bath::ExponentialDecomposition& decomposition() const noexcept { return decomposition_; }

    /// out = L(in); both spans hold 4 * size() entries.
    void apply(std::span<const cplx> in, std::span<cplx> out) const;

private:
    struct Link {
        std::uint32_t target;
        std::uint32_t mode;  // modes() means a raising link
        double coef;
    };

    std::vector<std::vector<std::uint8_t>> indices_;
    std::vector<double> damping_;
    std::vector<std::uint32_t> link_begin_;
    std::vector<Link> links_;
    std::vector<cplx> amplitudes_;
    std::vector<std::array<cplx, 4>> lower_factor_;
    std::array<cplx, 4> raise_factor_{};
    std::array<cplx, 4> residual_factor_{};
    Eigen::Matrix2cd hamiltonian_;
    bath::ExponentialDecomposition decomposition_;
    double max_rate_ = 0.0;
};

struct Trajectory {
    std::vector<double> time;
    std::vector<double> population_difference;  // P(t) = rho11 - rho00
    std::vector<DensityMatrix2> states;
    int depth = 0;
    int n_matsubara = 0;
    int n_steps_internal = 0;
    double dt = 0.0;
    std::size_t n_ados = 0;
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    std::vector<std::string> warnings;
};

/// 200 output samples over [0, spec.horizon()].
Trajectory propagate(const SpinBosonSpec& spec, const HierarchySpec& h);

struct ConvergenceReport {
    double delta_L = 0.0;  // sup |P_L - P_{L+1}|
    double delta_K = 0.0;  // sup |P_K - P_{K+1}|
};

ConvergenceReport convergence_check(const SpinBosonSpec& spec, const HierarchySpec& h);

struct ConvergedRun {
    Trajectory trajectory;
    HierarchySpec hierarchy;
    ConvergenceReport report;
    bool converged = false;
};

/// Raises depth and Matsubara count until both deltas fall below `tol`.
ConvergedRun propagate_converged(const SpinBosonSpec& spec, HierarchySpec h, double tol = 1e-4,
                                 int max_depth = 10, int max_matsubara = 10);

} // namespace noisespec::heom
