#include "noisespec/dephasing.hpp"

#include <cmath>

#include "noisespec/error.hpp"

namespace noisespec::dephasing {

std::vector<double> uniform_grid(double t_max, std::size_t n)
{
    if (!(t_max > 0.0)) throw DomainError("uniform_grid: t_max must be > 0");
    if (n < 2) throw DomainError("uniform_grid: need at least two points");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

std::shared_ptr<const std::vector<double>> GammaCache::unit_gamma(double s, double omega_c,
                                                                  double kT,
                                                                  std::span<const double> grid)
{
    Key key{s, omega_c, kT, std::vector<double>(grid.begin(), grid.end())};
    {
        std::lock_guard lock(mutex_);
        if (auto it = table_.find(key); it != table_.end()) return it->second;
    }
    const bath::OhmicFamily unit{1.0, s, omega_c};
    auto values = std::make_shared<std::vector<double>>(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        (*values)[i] = bath::decoherence_gamma(unit, kT, grid[i]);
    std::lock_guard lock(mutex_);
    return table_.emplace(std::move(key), std::move(values)).first->second;
}

std::size_t GammaCache::size() const
{
    std::lock_guard lock(mutex_);
    return table_.size();
}

std::vector<DensityMatrix2> evolve_dephasing(const DephasingRun& run, GammaCache* cache)
{
    if (run.time_grid.size() != kGridSize)
        throw ShapeError("evolve_dephasing: time grid must have exactly 200 samples");
    bath::validate(run.sd);
    const Eigen::Matrix2cd& rho0 = run.initial.matrix();

    std::vector<double> gamma(run.time_grid.size());
    if (cache != nullptr) {
        const auto unit = cache->unit_gamma(run.sd.s, run.sd.omega_c, run.temperature_kT, run.time_grid);
        for (std::size_t i = 0; i < gamma.size(); ++i) gamma[i] = run.sd.eta * (*unit)[i];
    } else {
        for (std::size_t i = 0; i < gamma.size(); ++i)
            gamma[i] = bath::decoherence_gamma(run.sd, run.temperature_kT, run.time_grid[i]);
    }

    std::vector<DensityMatrix2> states;
    states.reserve(run.time_grid.size());
    for (std::size_t i = 0; i < run.time_grid.size(); ++i) {
        const double t = run.time_grid[i];
        const cplx factor = std::exp(cplx(-gamma[i], run.omega0 * t));
        Eigen::Matrix2cd m;
        m(0, 0) = rho0(0, 0);
        m(1, 1) = rho0(1, 1);
        m(0, 1) = rho0(0, 1) * factor;
        m(1, 0) = std::conj(m(0, 1));
        states.push_back(DensityMatrix2::unchecked(m));
    }
    return states;
}

std::vector<double> coherence_feature(std::span<const DensityMatrix2> states)
{
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& rho : states) out.push_back(rho.rho01().real());
    return out;
}

} // namespace noisespec::dephasing
