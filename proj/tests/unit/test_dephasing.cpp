#include <doctest.h>

#include <cmath>

#include "noisespec/dephasing.hpp"
#include "noisespec/error.hpp"

using namespace noisespec;
using namespace noisespec::dephasing;

namespace {

DephasingRun ohmic_run(double eta, double s, double t_max = kDefaultTmax)
{
    DephasingRun run;
    run.sd = bath::OhmicFamily{eta, s, 0.5};
    run.time_grid = uniform_grid(t_max);
    return run;
}

} // namespace

TEST_CASE("time grid")
{
    const auto g = uniform_grid(20.0);
    REQUIRE(g.size() == 200);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 20.0);
    CHECK_THROWS_AS(uniform_grid(0.0), DomainError);
}

TEST_CASE("ground state does not evolve")
{
    auto run = ohmic_run(0.5, 1.0);
    run.initial = DensityMatrix2::ground();
    const auto states = evolve_dephasing(run);
    REQUIRE(states.size() == 200);
    for (const auto& st : states) CHECK(st == DensityMatrix2::ground());
    const auto f = coherence_feature(states);
    for (const double v : f) CHECK(v == 0.0);
}

TEST_CASE("coherence follows the closed-form decay at zero temperature")
{
    for (const double eta : {0.1, 0.25, 0.9}) {
        const auto run = ohmic_run(eta, 1.0);
        const auto states = evolve_dephasing(run);
        CHECK(states[0].rho01().real() == 0.5);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double t = run.time_grid[i];
            const double ref = 0.5 * std::exp(-2.0 * eta * std::log(1.0 + 0.25 * t * t));
            CHECK(std::abs(std::abs(states[i].rho01()) - ref) <= 1e-6 * ref);
            // phase rotates at omega0
            CHECK(std::arg(states[i].rho01()) == doctest::Approx(std::arg(std::polar(1.0, t))).epsilon(1e-9));
        }
    }
}

TEST_CASE("coherence at t = 2")
{
    // grid with a sample exactly at t = 2
    DephasingRun run = ohmic_run(0.25, 1.0);
    run.time_grid = uniform_grid(2.0 * 199.0 / 20.0);
    const auto states = evolve_dephasing(run);
    CHECK(run.time_grid[20] == doctest::Approx(2.0));
    const auto f = coherence_feature(states);
    CHECK(f[20] == doctest::Approx(0.5 * std::exp(-0.5 * std::log(2.0)) * std::cos(2.0)).epsilon(1e-6));
    CHECK(f[20] == doctest::Approx(-0.1471).epsilon(1e-3));
}

TEST_CASE("dephasing states are valid and decay properties hold")
{
    for (const double s : {0.1, 0.5, 1.0, 2.0}) {
        const auto strong = evolve_dephasing(ohmic_run(0.8, s));
        const auto weak = evolve_dephasing(ohmic_run(0.2, s));
        for (std::size_t i = 0; i < strong.size(); ++i) {
            const auto& m = strong[i];
            CHECK(m.hermiticity_error() <= 1e-12);
            CHECK(std::abs(m.trace() - 1.0) <= 1e-12);
            CHECK(m.min_eigenvalue() >= -1e-10);
            if (i > 0) {
                CHECK(std::abs(strong[i].rho01()) <= std::abs(strong[i - 1].rho01()) + 1e-15);
                CHECK(std::abs(strong[i].rho01()) < std::abs(weak[i].rho01()));
            }
        }
    }
    // sub-Ohmic baths dephase faster early on
    const auto sub = evolve_dephasing(ohmic_run(0.25, 0.1));
    const auto super = evolve_dephasing(ohmic_run(0.25, 3.5));
    const std::size_t quarter = 50;  // t ~ T_max / 4
    CHECK(std::abs(sub[quarter].rho01()) < std::abs(super[quarter].rho01()));
}

TEST_CASE("cache reuses unit-coupling decoherence across eta")
{
    GammaCache cache;
    const auto a = evolve_dephasing(ohmic_run(0.1, 0.7), &cache);
    const auto b = evolve_dephasing(ohmic_run(0.6, 0.7), &cache);
    CHECK(cache.size() == 1);
    const auto direct = evolve_dephasing(ohmic_run(0.6, 0.7));
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(std::abs(b[i].rho01() - direct[i].rho01()) < 1e-14);
    (void)a;
}

TEST_CASE("grid length is enforced")
{
    auto run = ohmic_run(0.1, 1.0);
    run.time_grid = uniform_grid(10.0, 50);
    CHECK_THROWS_AS(evolve_dephasing(run), ShapeError);
}
