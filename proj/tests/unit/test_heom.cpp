#include <doctest.h>

#include <cmath>
#include <functional>
#include <set>

#include "noisespec/error.hpp"
#include "noisespec/heom.hpp"

using namespace noisespec;
using namespace noisespec::heom;

namespace {

SpinBosonSpec spec_for(double delta, double gamma, double omega0 = 1.0)
{
    SpinBosonSpec s;
    s.delta = delta;
    s.omega0 = omega0;
    s.bath = {bath::LorentzDrude{gamma, 0.5}, 0.5 * delta};
    return s;
}

// P(t) of the closed system by diagonalizing H_S.
std::vector<double> closed_system_p(const SpinBosonSpec& s, const std::vector<double>& times)
{
    Eigen::Matrix2cd H;
    H << -0.5 * s.omega0, s.delta, s.delta, 0.5 * s.omega0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
    std::vector<double> out;
    for (const double t : times) {
        Eigen::Matrix2cd phase = Eigen::Matrix2cd::Zero();
        for (int k = 0; k < 2; ++k) phase(k, k) = std::exp(std::complex<double>(0.0, -es.eigenvalues()[k] * t));
        const Eigen::Matrix2cd U = es.eigenvectors() * phase * es.eigenvectors().adjoint();
        const Eigen::Matrix2cd rho = U * s.initial.matrix() * U.adjoint();
        out.push_back((rho(1, 1) - rho(0, 0)).real());
    }
    return out;
}

std::size_t count_multi_indices(int depth, int modes)
{
    std::size_t n = 0;
    std::function<void(int, int)> rec = [&](int mode, int left) {
        if (mode == modes) {
            ++n;
            return;
        }
        for (int k = 0; k <= left; ++k) rec(mode + 1, left - k);
    };
    rec(0, depth);
    return n;
}

int interior_extrema(const std::vector<double>& p)
{
    int n = 0;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
        const double a = p[i] - p[i - 1], b = p[i + 1] - p[i];
        if (a * b < 0.0 && std::abs(a) > 1e-9 && std::abs(b) > 1e-9) ++n;
    }
    return n;
}

} // namespace

TEST_CASE("ADO counting")
{
    CHECK(ado_count(1, 1) == 2);
    CHECK(ado_count(2, 2) == 6);
    for (int depth = 1; depth <= 6; ++depth)
        for (int modes = 1; modes <= 5; ++modes) CHECK(ado_count(depth, modes) == count_multi_indices(depth, modes));
}

TEST_CASE("hierarchy structure")
{
    HierarchySpec h;
    h.depth = 4;
    h.n_matsubara = 2;
    const Hierarchy hier(spec_for(0.5, 0.25), h);
    CHECK(hier.size() == ado_count(4, 3));
    CHECK(hier.modes() == 3);
    std::set<std::vector<std::uint8_t>> seen;
    for (std::size_t a = 0; a < hier.size(); ++a) {
        const auto& idx = hier.multi_index(a);
        int sum = 0;
        for (const auto v : idx) sum += v;
        CHECK(sum <= 4);
        CHECK(seen.insert(idx).second);
        CHECK(hier.neighbour_count(a) <= 2 * hier.modes());
    }
    for (const auto v : hier.multi_index(0)) CHECK(v == 0);
}

TEST_CASE("spin-boson validation")
{
    CHECK_THROWS_AS(validate(spec_for(0.0, 0.25)), DomainError);
    auto s = spec_for(0.5, 0.25);
    s.bath.temperature_kT = 0.0;
    CHECK_THROWS_AS(validate(s), DomainError);
    s = spec_for(0.5, 0.25);
    s.bath.sd = bath::OhmicFamily{};
    CHECK_THROWS_AS(validate(s), DomainError);
    HierarchySpec h;
    h.depth = 12;
    h.n_matsubara = 8;
    h.max_ados = 1000;
    CHECK_THROWS_AS(Hierarchy(spec_for(0.5, 0.25), h), Error);
}

TEST_CASE("Matsubara count policy")
{
    CHECK(matsubara_for(spec_for(0.5, 0.25)) == 3);   // ratio 0.32
    CHECK(matsubara_for(spec_for(0.05, 0.25)) == 6);  // alpha = 10
    CHECK(matsubara_for(spec_for(3.0, 0.25)) == 3);
}

TEST_CASE("near-closed system follows unitary evolution")
{
    const auto s = spec_for(0.5, 1e-8);
    const auto traj = propagate(s, HierarchySpec{});
    REQUIRE(traj.time.size() == 200);
    CHECK(traj.population_difference.front() == 1.0);
    const auto ref = closed_system_p(s, traj.time);
    double sup = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) sup = std::max(sup, std::abs(ref[i] - traj.population_difference[i]));
    CHECK(sup < 1e-4);
}

TEST_CASE("physical ADO stays a unit-trace Hermitian matrix")
{
    for (const double delta : {0.05, 0.5, 2.0}) {
        const auto s = spec_for(delta, 0.25);
        HierarchySpec h;
        h.n_matsubara = matsubara_for(s);
        const auto traj = propagate(s, h);
        CHECK(traj.max_trace_error < 1e-8);
        CHECK(traj.max_hermiticity_error < 1e-8);
        for (const double p : traj.population_difference) CHECK(std::isfinite(p));
    }
}

TEST_CASE("integrator step refinement")
{
    const auto s = spec_for(0.5, 0.25);
    HierarchySpec h;
    const auto coarse = propagate(s, h);
    h.n_steps_internal = 2 * coarse.n_steps_internal;
    const auto fine = propagate(s, h);
    double sup = 0.0;
    for (std::size_t i = 0; i < coarse.population_difference.size(); ++i)
        sup = std::max(sup, std::abs(coarse.population_difference[i] - fine.population_difference[i]));
    CHECK(sup < 1e-6);
    // deterministic
    const auto again = propagate(s, HierarchySpec{});
    CHECK(again.population_difference == coarse.population_difference);
}

TEST_CASE("unbiased system relaxes toward equal populations")
{
    auto s = spec_for(0.5, 0.25, 0.0);
    HierarchySpec h;
    h.n_matsubara = matsubara_for(s);
    const auto traj = propagate(s, h);
    CHECK(std::abs(traj.population_difference.back()) < 0.1);
}

TEST_CASE("coherent oscillations at small alpha, monotone decay at large alpha")
{
    for (const double alpha : {0.2, 0.3}) {
        const auto s = spec_for(0.5 / alpha, 0.25);
        HierarchySpec h;
        h.n_matsubara = matsubara_for(s);
        CHECK(interior_extrema(propagate(s, h).population_difference) >= 1);
    }
    for (const double alpha : {5.0, 8.0}) {
        const auto s = spec_for(0.5 / alpha, 0.25);
        HierarchySpec h;
        h.n_matsubara = matsubara_for(s);
        CHECK(interior_extrema(propagate(s, h).population_difference) == 0);
    }
}
