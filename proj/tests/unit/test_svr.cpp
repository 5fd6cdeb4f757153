#include <doctest.h>

#include <cmath>
#include <random>

#include "noisespec/svr.hpp"

using namespace noisespec;
using namespace noisespec::svr;

namespace {

Matrix random_matrix(int n, int p, std::uint64_t seed)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = d(g);
    return X;
}

} // namespace

TEST_CASE("kernels are symmetric and RBF is bounded")
{
    const Matrix A = random_matrix(100, 6, 1), B = random_matrix(100, 6, 2);
    for (const auto type : {KernelType::linear, KernelType::poly, KernelType::rbf}) {
        const Kernel k{type, 0.2, 3, 1.0};
        for (int i = 0; i < 100; ++i) CHECK(k(&A(i, 0), &B(i, 0), 6) == k(&B(i, 0), &A(i, 0), 6));
    }
    const Kernel rbf{KernelType::rbf, 0.2, 3, 1.0};
    for (int i = 0; i < 100; ++i) {
        const double v = rbf(&A(i, 0), &B(i, 0), 6);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        CHECK(rbf(&A(i, 0), &A(i, 0), 6) == 1.0);
    }
    CHECK(parse_kernel("poly") == KernelType::poly);
}

TEST_CASE("constant targets inside the tube need no support vectors")
{
    const Matrix X = random_matrix(30, 3, 3);
    const Vector y = Vector::Constant(30, 2.5);
    SvrConfig cfg;
    cfg.epsilon = 0.1;
    const auto m = fit_svr(X, y, cfg);
    CHECK(m.support_vectors().rows() == 0);
    const Vector p = m.predict(random_matrix(5, 3, 4));
    for (int i = 0; i < 5; ++i) CHECK(p[i] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(p[0] == m.bias());
}

TEST_CASE("linear kernel recovers an affine law")
{
    Matrix X(60, 1);
    Vector y(60);
    for (int i = 0; i < 60; ++i) {
        X(i, 0) = -3.0 + 0.1 * i;
        y[i] = 2.0 * X(i, 0) + 1.0;
    }
    SvrConfig cfg;
    cfg.kernel.type = KernelType::linear;
    cfg.C = 1e3;
    cfg.epsilon = 1e-3;
    const auto m = fit_svr(X, y, cfg);
    Matrix q(2, 1);
    q << 0.0, 1.0;
    const Vector p = m.predict(q);
    CHECK(std::abs((p[1] - p[0]) - 2.0) < 1e-2);
    CHECK(std::abs(p[0] - 1.0) < 1e-2);
}

TEST_CASE("dual feasibility, KKT and monotone objective")
{
    const Matrix X = random_matrix(120, 4, 5);
    Vector y(120);
    for (int i = 0; i < 120; ++i) y[i] = std::sin(X(i, 0)) + 0.3 * X(i, 1) * X(i, 2);
    SvrConfig cfg;
    cfg.C = 2.0;
    cfg.epsilon = 0.05;
    const auto m = fit_svr(X, y, cfg);
    CHECK(m.converged());
    CHECK(std::abs(m.coefficients().sum()) < 1e-8);
    for (int i = 0; i < m.coefficients().size(); ++i) {
        CHECK(std::abs(m.coefficients()[i]) <= cfg.C + 1e-12);
        CHECK(m.coefficients()[i] != 0.0);
    }
    // rows whose residual is well inside the tube are not support vectors
    const Vector r = (m.predict(X) - y).cwiseAbs();
    const Matrix Z = m.scaler().transform(X);
    int inside = 0;
    for (int i = 0; i < 120; ++i) {
        if (r[i] >= cfg.epsilon - cfg.tol) continue;
        ++inside;
        for (Eigen::Index s = 0; s < m.support_vectors().rows(); ++s)
            CHECK((m.support_vectors().row(s) - Z.row(i)).norm() > 0.0);
    }
    CHECK(inside > 0);
    const auto& h = m.objective_history();
    REQUIRE(h.size() >= 1);
    for (std::size_t k = 1; k < h.size(); ++k) CHECK(h[k] <= h[k - 1] + 1e-12);

    const auto back = SvrModel::from_json(m.to_json());
    CHECK(back.predict(X) == m.predict(X));
}

TEST_CASE("single support vector gives an affine function of the inner product")
{
    Matrix X(2, 1);
    X << -1.0, 1.0;
    Vector y(2);
    y << 0.0, 1.0;
    SvrConfig cfg;
    cfg.kernel.type = KernelType::linear;
    cfg.C = 0.01;
    cfg.epsilon = 0.0;
    const auto m = fit_svr(X, y, cfg);
    Matrix q(3, 1);
    q << -2.0, 0.0, 2.0;
    const Vector p = m.predict(q);
    CHECK(p[1] == doctest::Approx(m.bias()));
    CHECK((p[2] - p[1]) == doctest::Approx(p[1] - p[0]));
}
