#include "noisespec/heom.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "noisespec/dephasing.hpp"
#include "noisespec/error.hpp"

namespace noisespec::heom {
namespace {

constexpr cplx kI{0.0, 1.0};
// Eigenvalues of the coupling operator sigma_z / 2 in the {|0>, |1>} basis.
constexpr std::array<double, 2> kCoupling{-0.5, 0.5};
constexpr double kDivergenceNorm = 1e8;

double sup_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

double SpinBosonSpec::horizon() const { return t_max > 0.0 ? t_max : 20.0 / delta; }

void validate(const SpinBosonSpec& spec)
{
    if (!(spec.delta > 0.0)) throw DomainError("spin-boson: delta must be > 0");
    if (!std::holds_alternative<bath::LorentzDrude>(spec.bath.sd))
        throw DomainError("spin-boson: the hierarchy requires a Lorentz-Drude bath");
    if (!(spec.bath.temperature_kT > 0.0)) throw DomainError("spin-boson: kT must be > 0");
    if (!std::isfinite(spec.omega0)) throw DomainError("spin-boson: omega0 must be finite");
    bath::validate(spec.bath.sd);
}

int matsubara_for(const SpinBosonSpec& spec, int min_k, int margin)
{
    validate(spec);
    const double wc = std::get<bath::LorentzDrude>(spec.bath.sd).omega_c;
    const double ratio = wc / (2.0 * std::numbers::pi * spec.bath.temperature_kT);
    return std::max(min_k, static_cast<int>(std::ceil(ratio - 1e-12)) + margin);
}

std::uint64_t ado_count(int depth, int modes)
{
    // C(depth + modes, modes)
    std::uint64_t c = 1;
    for (int i = 1; i <= modes; ++i) {
        c = c * static_cast<std::uint64_t>(depth + i) / static_cast<std::uint64_t>(i);
        if (c > (1ULL << 40)) return c;
    }
    return c;
}

Hierarchy::Hierarchy(const SpinBosonSpec& spec, const HierarchySpec& h)
{
    validate(spec);
    if (h.depth < 1) throw DomainError("hierarchy depth must be >= 1");
    if (h.n_matsubara < 0) throw DomainError("Matsubara count must be >= 0");
    const int modes = h.n_matsubara + 1;
    const std::uint64_t count = ado_count(h.depth, modes);
    if (count > h.max_ados) {
        std::ostringstream msg;
        msg << "hierarchy needs " << count << " ADOs (L=" << h.depth << ", K=" << h.n_matsubara
            << "), above the budget of " << h.max_ados;
        throw Error(msg.str());
    }

    decomposition_ = bath::matsubara_decompose(spec.bath, h.n_matsubara);
    for (const auto& term : decomposition_.terms) {
        amplitudes_.push_back(term.amplitude);
        max_rate_ = std::max(max_rate_, term.rate);
    }

    hamiltonian_ << cplx(-0.5 * spec.omega0), cplx(spec.delta), cplx(spec.delta),
        cplx(0.5 * spec.omega0);

    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double gap = kCoupling[a] - kCoupling[b];
            raise_factor_[2 * a + b] = -kI * gap;
            residual_factor_[2 * a + b] =
                h.markovian_residual ? cplx(-decomposition_.residual_weight * gap * gap) : cplx(0.0);
        }
    for (const cplx c : amplitudes_) {
        std::array<cplx, 4> f{};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                f[2 * a + b] = -kI * (c * kCoupling[a] - std::conj(c) * kCoupling[b]);
        lower_factor_.push_back(f);
    }

    // Enumerate tier by tier so that ADO 0 is the physical state.
    std::map<std::vector<std::uint8_t>, std::uint32_t> lookup;
    std::vector<std::uint8_t> zero(static_cast<std::size_t>(modes), 0);
    indices_.push_back(zero);
    lookup.emplace(zero, 0);
    std::size_t tier_begin = 0;
    for (int tier = 1; tier <= h.depth; ++tier) {
        const std::size_t tier_end = indices_.size();
        for (std::size_t i = tier_begin; i < tier_end; ++i) {
            for (int j = 0; j < modes; ++j) {
                auto next = indices_[i];
                ++next[static_cast<std::size_t>(j)];
                if (lookup.emplace(next, static_cast<std::uint32_t>(indices_.size())).second)
                    indices_.push_back(std::move(next));
            }
        }
        tier_begin = tier_end;
    }

    // Scaled ADOs: rho_n = rho~_n * prod_j sqrt(n_j! |c_j|^n_j).
    std::vector<double> scale;
    for (const cplx c : amplitudes_) scale.push_back(std::abs(c) > 1e-300 ? std::abs(c) : 1.0);

    damping_.resize(indices_.size());
    link_begin_.reserve(indices_.size() + 1);
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        link_begin_.push_back(static_cast<std::uint32_t>(links_.size()));
        const auto& n = indices_[i];
        double damp = 0.0;
        int tier = 0;
        for (int j = 0; j < modes; ++j) {
            damp += n[static_cast<std::size_t>(j)] * decomposition_.terms[static_cast<std::size_t>(j)].rate;
            tier += n[static_cast<std::size_t>(j)];
        }
        damping_[i] = damp;
        for (int j = 0; j < modes; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double nj = n[ju];
            if (tier < h.depth) {
                auto up = n;
                ++up[ju];
                links_.push_back({lookup.at(up), static_cast<std::uint32_t>(modes),
                                  std::sqrt((nj + 1.0) * scale[ju])});
            }
            if (n[ju] > 0) {
                auto down = n;
                --down[ju];
                links_.push_back({lookup.at(down), static_cast<std::uint32_t>(j),
                                  std::sqrt(nj / scale[ju])});
            }
        }
    }
    link_begin_.push_back(static_cast<std::uint32_t>(links_.size()));
}

std::size_t Hierarchy::neighbour_count(std::size_t ado) const
{
    return link_begin_.at(ado + 1) - link_begin_.at(ado);
}

void Hierarchy::apply(std::span<const cplx> in, std::span<cplx> out) const
{
    const cplx h00 = hamiltonian_(0, 0), h01 = hamiltonian_(0, 1);
    const cplx h10 = hamiltonian_(1, 0), h11 = hamiltonian_(1, 1);
    const auto n_modes = static_cast<std::uint32_t>(amplitudes_.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        const cplx* x = &in[4 * i];
        cplx* y = &out[4 * i];
        // -i [H, X]
        y[0] = -kI * (h01 * x[2] - x[1] * h10);
        y[1] = -kI * (h00 * x[1] + h01 * x[3] - x[0] * h01 - x[1] * h11);
        y[2] = -kI * (h10 * x[0] + h11 * x[2] - x[2] * h00 - x[3] * h10);
        y[3] = -kI * (h10 * x[1] - x[2] * h01);
        const double damp = damping_[i];
        for (int e = 0; e < 4; ++e) y[e] += (residual_factor_[e] - damp) * x[e];
        for (std::uint32_t l = link_begin_[i]; l < link_begin_[i + 1]; ++l) {
            const Link& link = links_[l];
            const cplx* z = &in[4 * link.target];
            const auto& f = link.mode == n_modes ? raise_factor_ : lower_factor_[link.mode];
            for (int e = 0; e < 4; ++e) y[e] += link.coef * f[e] * z[e];
        }
    }
}

Trajectory propagate(const SpinBosonSpec& spec, const HierarchySpec& h)
{
    const Hierarchy hierarchy(spec, h);
    const double t_max = spec.horizon();
    const auto grid = dephasing::uniform_grid(t_max);
    const double h_out = grid[1] - grid[0];

    int n_steps = h.n_steps_internal;
    if (n_steps <= 0) {
        double dt_max = h.dt;
        if (!(dt_max > 0.0)) {
            const double system_rate =
                std::sqrt(spec.omega0 * spec.omega0 + 4.0 * spec.delta * spec.delta);
            dt_max = 0.05 / std::max(hierarchy.max_rate(), system_rate);
        }
        n_steps = static_cast<int>(std::ceil(h_out / dt_max - 1e-9));
    }
    n_steps = std::max(n_steps, 1);
    const double dt = h_out / n_steps;

    Trajectory traj;
    traj.depth = h.depth;
    traj.n_matsubara = h.n_matsubara;
    traj.n_steps_internal = n_steps;
    traj.dt = dt;
    traj.n_ados = hierarchy.size();
    traj.time = grid;
    traj.warnings = hierarchy.decomposition().warnings;

    const std::size_t dim = 4 * hierarchy.size();
    std::vector<cplx> state(dim, 0.0), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    const auto& rho0 = spec.initial.matrix();
    state[0] = rho0(0, 0);
    state[1] = rho0(0, 1);
    state[2] = rho0(1, 0);
    state[3] = rho0(1, 1);

    const auto record = [&](std::size_t sample) {
        Eigen::Matrix2cd m;
        m << state[0], state[1], state[2], state[3];
        double norm = 0.0;
        for (std::size_t a = 0; a < hierarchy.size(); ++a) {
            double s = 0.0;
            for (int e = 0; e < 4; ++e) s += std::norm(state[4 * a + static_cast<std::size_t>(e)]);
            norm = std::max(norm, s);
        }
        if (!std::isfinite(norm) || norm > kDivergenceNorm * kDivergenceNorm) {
            std::ostringstream msg;
            msg << "HEOM propagation diverged at step " << sample * static_cast<std::size_t>(n_steps)
                << " (t = " << grid[sample] << "): max ADO norm " << std::sqrt(norm);
            throw SimulationError(msg.str());
        }
        auto rho = DensityMatrix2::unchecked(m);
        traj.max_trace_error = std::max(traj.max_trace_error, std::abs(rho.trace() - cplx(1.0)));
        traj.max_hermiticity_error = std::max(traj.max_hermiticity_error, rho.hermiticity_error());
        traj.population_difference.push_back(rho.population_difference());
        traj.states.push_back(rho);
    };

    record(0);
    for (std::size_t sample = 1; sample < grid.size(); ++sample) {
        for (int step = 0; step < n_steps; ++step) {
            hierarchy.apply(state, k1);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * dt * k1[i];
            hierarchy.apply(tmp, k2);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + 0.5 * dt * k2[i];
            hierarchy.apply(tmp, k3);
            for (std::size_t i = 0; i < dim; ++i) tmp[i] = state[i] + dt * k3[i];
            hierarchy.apply(tmp, k4);
            for (std::size_t i = 0; i < dim; ++i)
                state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        record(sample);
    }
    return traj;
}

namespace {

ConvergenceReport check_against(const SpinBosonSpec& spec, const HierarchySpec& h,
                                const Trajectory& base)
{
    HierarchySpec deeper = h;
    ++deeper.depth;
    HierarchySpec wider = h;
    ++wider.n_matsubara;
    ConvergenceReport report;
    report.delta_L = sup_difference(base.population_difference, propagate(spec, deeper).population_difference);
    report.delta_K = sup_difference(base.population_difference, propagate(spec, wider).population_difference);
    return report;
}

} // namespace

ConvergenceReport convergence_check(const SpinBosonSpec& spec, const HierarchySpec& h)
{
    return check_against(spec, h, propagate(spec, h));
}

ConvergedRun propagate_converged(const SpinBosonSpec& spec, HierarchySpec h, double tol,
                                 int max_depth, int max_matsubara)
{
    while (true) {
        auto base = propagate(spec, h);
        const auto report = check_against(spec, h, base);
        const bool depth_ok = report.delta_L < tol || h.depth >= max_depth;
        const bool matsubara_ok = report.delta_K < tol || h.n_matsubara >= max_matsubara;
        if (depth_ok && matsubara_ok)
            return {std::move(base), h, report, report.delta_L < tol && report.delta_K < tol};
        if (!depth_ok) ++h.depth;
        if (!matsubara_ok) ++h.n_matsubara;
    }
}

} // namespace noisespec::heom
