#include <doctest.h>

#include <cmath>
#include <random>

#include "noisespec/error.hpp"
#include "noisespec/nn.hpp"

using namespace noisespec;
using namespace noisespec::nn;

namespace {

Matrix random_matrix(int n, int p, std::uint64_t seed, double scale = 1.0)
{
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, scale);
    Matrix X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = d(g);
    return X;
}

Matrix one_hot(const std::vector<int>& labels, int k)
{
    Matrix T = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i) T(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return T;
}

// Number of sampled parameters whose analytic and central-difference
// gradients disagree beyond the tolerance.
int gradient_check(Network& net, const Matrix& X, const Matrix& T, std::uint64_t seed)
{
    const Gradients g = net.backward(X, T);
    // flat index -> analytic gradient, in the same order as parameter(k)
    std::vector<double> flat;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        for (Eigen::Index i = 0; i < g.dW[l].size(); ++i) flat.push_back(g.dW[l].data()[i]);
        for (Eigen::Index i = 0; i < g.db[l].size(); ++i) flat.push_back(g.db[l][i]);
    }
    REQUIRE(flat.size() == net.parameter_count());
    std::mt19937_64 gen(seed);
    int bad = 0;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, flat.size() - 1)(gen);
        double& w = net.parameter(k);
        const double keep = w;
        w = keep + h;
        const double up = net.loss(X, T);
        w = keep - h;
        const double down = net.loss(X, T);
        w = keep;
        const double numeric = (up - down) / (2.0 * h);
        if (std::abs(flat[k] - numeric) / (std::abs(flat[k]) + 1e-8) >= 1e-4)
            ++bad;
    }
    return bad;
}

} // namespace

TEST_CASE("activations and losses")
{
    CHECK(relu(-1.0) == 0.0);
    CHECK(relu(2.0) == 2.0);
    Matrix z(1, 3);
    z << std::log(1.0), std::log(2.0), std::log(3.0);
    const Matrix p = softmax(z);
    CHECK(p(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(p(0, 1) == doctest::Approx(2.0 / 6.0).epsilon(1e-14));
    CHECK(p(0, 2) == doctest::Approx(3.0 / 6.0).epsilon(1e-14));

    Matrix big = random_matrix(50, 3, 1, 300.0);
    const Matrix q = softmax(big);
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        CHECK(std::abs(q.row(i).sum() - 1.0) < 1e-12);
        CHECK(q.row(i).minCoeff() >= 0.0);
        CHECK(q.row(i).maxCoeff() <= 1.0);
    }

    Matrix Y(2, 1), T(2, 1);
    Y << 1, 2;
    T << 1, 3;
    CHECK(mse_loss(Y, T) == 0.5);
    CHECK(mse_loss(T, T) == 0.0);
    const Matrix U = Matrix::Constant(4, 3, 1.0 / 3.0);
    CHECK(cross_entropy_loss(U, one_hot({0, 1, 2, 0}, 3)) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("zero network predicts uniform probabilities")
{
    Network net({4, 5, 3}, NetTask::classification, 1);
    for (std::size_t k = 0; k < net.parameter_count(); ++k) net.parameter(k) = 0.0;
    const Matrix P = net.forward(random_matrix(6, 4, 2));
    for (Eigen::Index i = 0; i < P.size(); ++i) CHECK(P.data()[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("He initialization")
{
    Network net({200, 128, 64, 32, 1}, NetTask::regression, 3);
    REQUIRE(net.n_layers() == 4);
    const auto& W = net.W(0);
    CHECK(W.rows() == 200);
    CHECK(W.cols() == 128);
    const double sd = std::sqrt((W.array() - W.mean()).square().mean());
    CHECK(sd == doctest::Approx(std::sqrt(2.0 / 200.0)).epsilon(0.03));
    CHECK(net.b(0).isZero());
    const Network same({200, 128, 64, 32, 1}, NetTask::regression, 3);
    CHECK(same.W(2) == net.W(2));
}

TEST_CASE("analytic gradients agree with central differences")
{
    SUBCASE("mean squared error")
    {
        Network net({8, 16, 12, 1}, NetTask::regression, 11);
        const Matrix X = random_matrix(10, 8, 12);
        const Matrix T = random_matrix(10, 1, 13).cwiseAbs();
        CHECK(gradient_check(net, X, T, 14) == 0);
    }
    SUBCASE("cross-entropy")
    {
        Network net({8, 16, 12, 3}, NetTask::classification, 21);
        const Matrix X = random_matrix(10, 8, 22);
        const Matrix T = one_hot({0, 1, 2, 2, 1, 0, 0, 1, 2, 1}, 3);
        CHECK(gradient_check(net, X, T, 23) == 0);
    }
}

TEST_CASE("perfect fit has zero gradient")
{
    Network net({3, 4, 1}, NetTask::regression, 5);
    const Matrix X = random_matrix(5, 3, 6);
    const Matrix Y = net.forward(X);
    const Gradients g = net.backward(X, Y);
    CHECK(g.loss == 0.0);
    for (const auto& w : g.dW) CHECK(w.isZero());
    for (const auto& b : g.db) CHECK(b.isZero());
}

TEST_CASE("first Adam step is a signed step of size lr")
{
    Network net({2, 2, 1}, NetTask::regression, 1);
    AdamState state(net);
    Gradients g;
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
        g.dW.push_back(Eigen::MatrixXd::Constant(net.W(l).rows(), net.W(l).cols(), 0.3));
        g.db.push_back(Eigen::VectorXd::Constant(net.b(l).size(), -2.0));
    }
    g.dW[0](0, 0) = 0.0;
    const Network before = net;
    adam_step(net, g, state, 1e-3);
    CHECK(net.W(0)(0, 0) == before.W(0)(0, 0));
    CHECK(net.W(0)(1, 1) - before.W(0)(1, 1) == doctest::Approx(-1e-3 * 0.3 / (0.3 + kAdamEpsilon)));
    CHECK(net.b(1)[0] - before.b(1)[0] == doctest::Approx(1e-3 * 2.0 / (2.0 + kAdamEpsilon)));
}

TEST_CASE("training reduces loss and is reproducible")
{
    const Matrix X = random_matrix(20, 3, 30);
    Vector y(20);
    for (int i = 0; i < 20; ++i) y[i] = 1.0 + 0.5 * X(i, 0) - 0.2 * X(i, 1);
    NetConfig cfg;
    cfg.layers = {3, 16, 1};
    cfg.learning_rate = 1e-2;
    cfg.batch_size = 5;
    cfg.epochs = 10;
    const auto a = train(X, y, Matrix(0, 3), Vector(0), cfg);
    CHECK(a.log.train_loss.back() < a.log.train_loss.front());
    const auto b = train(X, y, Matrix(0, 3), Vector(0), cfg);
    CHECK(a.log.train_loss == b.log.train_loss);
    CHECK(a.model.net.W(0) == b.model.net.W(0));
    // ReLU head keeps raw outputs non-negative
    CHECK(a.model.net.forward(random_matrix(30, 3, 31, 5.0)).minCoeff() >= 0.0);
}

TEST_CASE("regression head starts as the mean predictor")
{
    const Matrix X = random_matrix(40, 6, 40, 0.5);
    Vector y(40);
    for (int i = 0; i < 40; ++i) y[i] = 0.01 + 0.02 * i;
    NetConfig cfg;
    cfg.layers = {6, 16, 8, 1};
    cfg.learning_rate = 1e-12;  // one negligible step keeps the initial state
    cfg.epochs = 1;
    for (const std::uint64_t seed : {1u, 2u, 3u, 42u}) {
        cfg.seed = seed;
        const Vector p = train(X, y, Matrix(0, 6), Vector(0), cfg).model.predict(X);
        for (int i = 0; i < 40; ++i) CHECK(p[i] == doctest::Approx(y.mean()).epsilon(1e-6));
    }
}

TEST_CASE("negative targets are shifted and restored")
{
    Vector y(4);
    y << -1.0, 0.0, 1.0, 3.0;
    CHECK(target_offset_for(y) == doctest::Approx(1.4));
    Vector pos(2);
    pos << 0.5, 2.0;
    CHECK(target_offset_for(pos) == 0.0);
}

TEST_CASE("serialization and error reporting")
{
    Network net({3, 4, 3}, NetTask::classification, 9);
    const Network back = Network::from_json(net.to_json());
    const Matrix X = random_matrix(4, 3, 10);
    CHECK(back.forward(X) == net.forward(X));
    Matrix bad = X;
    bad(1, 1) = std::nan("");
    CHECK_THROWS_AS(net.forward(bad), SimulationError);
    NetConfig cfg;
    cfg.layers = {5, 4, 1};
    CHECK_THROWS_AS(train(X, Vector::Ones(4), Matrix(0, 3), Vector(0), cfg), ShapeError);
}
