#pragma once

#include <map>
#include <span>
#include <vector>

#include "noisespec/density_matrix.hpp"

namespace noisespec::nonmarkov {

/// D(a, b) = 1/2 sum |lambda_i(b - a)|. Throws DomainError for inputs that
/// are not Hermitian within `herm_tol`.
double trace_distance(const DensityMatrix2& a, const DensityMatrix2& b, double herm_tol = 1e-10);

/// (1/T) int_0^T D(a(t), b(t)) dt by the trapezoidal rule on `time`.
double sigma_average(std::span<const DensityMatrix2> a, std::span<const DensityMatrix2> b,
                     std::span<const double> time);

struct SigmaLabel {
    double alpha = 0.0;
    double sigma = 0.0;
};

/// sigma of each trajectory against the one stored under `reference_alpha`.
/// All trajectories are sampled on a common dimensionless grid tau = delta * t
/// (`tau` below); runs with different delta therefore compare at equal
/// numbers of tunnelling periods.
std::map<double, SigmaLabel> sigma_alpha_labels(
    const std::map<double, std::vector<DensityMatrix2>>& trajectories, double reference_alpha,
    std::span<const double> tau);

} // namespace noisespec::nonmarkov
