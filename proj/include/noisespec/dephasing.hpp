#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "noisespec/bath.hpp"
#include "noisespec/density_matrix.hpp"

namespace noisespec::dephasing {

inline constexpr std::size_t kGridSize = 200;
inline constexpr double kDefaultTmax = 20.0;

/// 200 uniformly spaced times covering [0, t_max] inclusive.
std::vector<double> uniform_grid(double t_max, std::size_t n = kGridSize);

struct DephasingRun {
    bath::OhmicFamily sd;
    double omega0 = 1.0;
    double temperature_kT = 0.0;
    DensityMatrix2 initial = DensityMatrix2::plus();
    std::vector<double> time_grid = uniform_grid(kDefaultTmax);
};

/// Gamma(t) on a grid for unit coupling, shared across runs that differ only
/// in eta (Gamma is linear in eta). Safe for concurrent use.
class GammaCache {
public:
    std::shared_ptr<const std::vector<double>> unit_gamma(double s, double omega_c, double kT,
                                                          std::span<const double> grid);
    std::size_t size() const;

private:
    using Key = std::tuple<double, double, double, std::vector<double>>;
    mutable std::mutex mutex_;
    std::map<Key, std::shared_ptr<const std::vector<double>>> table_;
};

/// rho00 frozen, rho01(t) = rho01(0) exp(-Gamma(t) + i omega0 t).
std::vector<DensityMatrix2> evolve_dephasing(const DephasingRun& run, GammaCache* cache = nullptr);

/// Re rho01 at every grid point.
std::vector<double> coherence_feature(std::span<const DensityMatrix2> states);

} // namespace noisespec::dephasing
