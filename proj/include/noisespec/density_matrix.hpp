#pragma once

#include <complex>

#include <Eigen/Dense>

namespace noisespec {

using cplx = std::complex<double>;

/// Reduced state of a two-level system in the basis {|0>, |1>}, where |0>
/// is the ground state of the bare Hamiltonian (omega0 / 2) sigma_z.
class DensityMatrix2 {
public:
    static constexpr double kTraceTolerance = 1e-12;
    static constexpr double kHermiticityTolerance = 1e-12;
    static constexpr double kPositivitySlack = 1e-10;

    /// |0><0|.
    DensityMatrix2();

    /// Validates and wraps `m`; throws DomainError when `m` is not a state.
    static DensityMatrix2 from_matrix(const Eigen::Matrix2cd& m,
                                      double trace_tol = kTraceTolerance,
                                      double herm_tol = kHermiticityTolerance,
                                      double psd_slack = kPositivitySlack);
    /// Wraps `m` without checks (integrator output).
    static DensityMatrix2 unchecked(const Eigen::Matrix2cd& m);

    static DensityMatrix2 ground();   // |0><0|
    static DensityMatrix2 excited();  // |1><1|
    static DensityMatrix2 plus();     // |+><+|, |+> = (|0> + |1>) / sqrt 2

    const Eigen::Matrix2cd& matrix() const noexcept { return m_; }
    cplx rho00() const noexcept { return m_(0, 0); }
    cplx rho01() const noexcept { return m_(0, 1); }
    cplx rho10() const noexcept { return m_(1, 0); }
    cplx rho11() const noexcept { return m_(1, 1); }

    cplx trace() const noexcept { return m_.trace(); }
    /// rho11 - rho00.
    double population_difference() const noexcept { return (m_(1, 1) - m_(0, 0)).real(); }
    double hermiticity_error() const noexcept;
    double min_eigenvalue() const noexcept;

    friend bool operator==(const DensityMatrix2& a, const DensityMatrix2& b) noexcept
    {
        return a.m_ == b.m_;
    }

private:
    explicit DensityMatrix2(const Eigen::Matrix2cd& m) : m_(m) {}
    Eigen::Matrix2cd m_;
};

} // namespace noisespec
