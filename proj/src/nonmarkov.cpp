#include "noisespec/nonmarkov.hpp"

#include <cmath>
#include <sstream>

#include "noisespec/error.hpp"

namespace noisespec::nonmarkov {

double trace_distance(const DensityMatrix2& a, const DensityMatrix2& b, double herm_tol)
{
    if (a.hermiticity_error() > herm_tol || b.hermiticity_error() > herm_tol)
        throw DomainError("trace_distance: input is not Hermitian");
    const Eigen::Matrix2cd d = b.matrix() - a.matrix();
    // Eigenvalues of a Hermitian 2x2: m +- r.
    const double d00 = d(0, 0).real(), d11 = d(1, 1).real();
    const double m = 0.5 * (d00 + d11);
    const double r = std::hypot(0.5 * (d00 - d11), std::abs(d(0, 1)));
    return 0.5 * (std::abs(m + r) + std::abs(m - r));
}

double sigma_average(std::span<const DensityMatrix2> a, std::span<const DensityMatrix2> b,
                     std::span<const double> time)
{
    if (a.size() != b.size() || a.size() != time.size()) {
        std::ostringstream msg;
        msg << "sigma_average: grid mismatch (" << a.size() << ", " << b.size() << ", "
            << time.size() << " samples)";
        throw ShapeError(msg.str());
    }
    if (time.size() < 2) throw ShapeError("sigma_average: need at least two samples");
    const double span = time.back() - time.front();
    if (!(span > 0.0)) throw DomainError("sigma_average: time grid must increase");
    double acc = 0.0;
    double prev = trace_distance(a[0], b[0]);
    for (std::size_t i = 1; i < time.size(); ++i) {
        const double cur = trace_distance(a[i], b[i]);
        acc += 0.5 * (time[i] - time[i - 1]) * (prev + cur);
        prev = cur;
    }
    return acc / span;
}

std::map<double, SigmaLabel> sigma_alpha_labels(
    const std::map<double, std::vector<DensityMatrix2>>& trajectories, double reference_alpha,
    std::span<const double> tau)
{
    const auto ref = trajectories.find(reference_alpha);
    if (ref == trajectories.end()) {
        std::ostringstream msg;
        msg << "sigma_alpha_labels: reference alpha " << reference_alpha << " is missing";
        throw DomainError(msg.str());
    }
    std::map<double, SigmaLabel> out;
    for (const auto& [alpha, states] : trajectories)
        out[alpha] = {alpha, sigma_average(states, ref->second, tau)};
    return out;
}

} // namespace noisespec::nonmarkov
