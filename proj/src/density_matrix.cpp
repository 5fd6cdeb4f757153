#include "noisespec/density_matrix.hpp"

#include <cmath>
#include <string>

#include "noisespec/error.hpp"

namespace noisespec {

DensityMatrix2::DensityMatrix2() : m_(Eigen::Matrix2cd::Zero()) { m_(0, 0) = 1.0; }

DensityMatrix2 DensityMatrix2::from_matrix(const Eigen::Matrix2cd& m, double trace_tol,
                                           double herm_tol, double psd_slack)
{
    if (!m.allFinite()) throw DomainError("density matrix has non-finite entries");
    DensityMatrix2 rho(m);
    if (rho.hermiticity_error() > herm_tol)
        throw DomainError("density matrix is not Hermitian (error " +
                          std::to_string(rho.hermiticity_error()) + ")");
    if (std::abs(m.trace() - cplx(1.0)) > trace_tol)
        throw DomainError("density matrix trace differs from 1");
    if (rho.min_eigenvalue() < -psd_slack)
        throw DomainError("density matrix is not positive semidefinite");
    return rho;
}

DensityMatrix2 DensityMatrix2::unchecked(const Eigen::Matrix2cd& m) { return DensityMatrix2(m); }

DensityMatrix2 DensityMatrix2::ground() { return DensityMatrix2(); }

DensityMatrix2 DensityMatrix2::excited()
{
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(1, 1) = 1.0;
    return DensityMatrix2(m);
}

DensityMatrix2 DensityMatrix2::plus()
{
    Eigen::Matrix2cd m;
    m.setConstant(cplx(0.5, 0.0));
    return DensityMatrix2(m);
}

double DensityMatrix2::hermiticity_error() const noexcept
{
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix2::min_eigenvalue() const noexcept
{
    // Eigenvalues of the Hermitian part: mean -/+ sqrt(half-gap^2 + |off|^2).
    const double a = m_(0, 0).real();
    const double d = m_(1, 1).real();
    const cplx off = 0.5 * (m_(0, 1) + std::conj(m_(1, 0)));
    const double half_gap = 0.5 * (a - d);
    return 0.5 * (a + d) - std::sqrt(half_gap * half_gap + std::norm(off));
}

} // namespace noisespec
