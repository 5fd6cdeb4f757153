#pragma once

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "noisespec/density_matrix.hpp"

namespace testing {

// Random mixed qubit state from a Bloch vector drawn inside the unit ball.
inline noisespec::DensityMatrix2 random_state(std::mt19937_64& g)
{
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::Vector3d r(n(g), n(g), n(g));
    r *= std::cbrt(u(g)) / r.norm();
    Eigen::Matrix2cd m;
    const std::complex<double> i(0.0, 1.0);
    m << 0.5 * (1.0 + r.z()), 0.5 * (r.x() - i * r.y()), 0.5 * (r.x() + i * r.y()), 0.5 * (1.0 - r.z());
    return noisespec::DensityMatrix2::from_matrix(m);
}

// 1/2 sum |eigenvalues| through a general self-adjoint solver.
inline double eigen_trace_distance(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(a - b);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

} // namespace testing
