#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "noisespec/error.hpp"
#include "noisespec/io.hpp"
#include "noisespec/metrics.hpp"

using namespace noisespec;
using namespace noisespec::metrics;

TEST_CASE("regression metrics")
{
    Vector t(2), p(2);
    t << 1, 3;
    p << 1, 2;
    const auto r = regression_metrics(t, p);
    CHECK(r.mse == 0.5);
    CHECK(r.mae == 0.5);
    CHECK(*r.r2 == 0.5);

    const auto perfect = regression_metrics(t, t);
    CHECK(perfect.mse == 0.0);
    CHECK(perfect.mae == 0.0);
    CHECK(*perfect.r2 == 1.0);

    Vector m = Vector::Constant(2, t.mean());
    CHECK(*regression_metrics(t, m).r2 == 0.0);
    CHECK_FALSE(regression_metrics(Vector::Ones(3), Vector::Zero(3)).r2.has_value());
}

TEST_CASE("R2 two ways")
{
    std::mt19937_64 g(4);
    std::normal_distribution<double> d;
    Vector t(50), p(50);
    for (int i = 0; i < 50; ++i) {
        t[i] = d(g);
        p[i] = t[i] + 0.3 * d(g);
    }
    const auto r = regression_metrics(t, p);
    const double var = (t.array() - t.mean()).square().mean();
    CHECK(std::abs(*r.r2 - (1.0 - r.mse / var)) < 1e-12);
    CHECK(*r.r2 <= 1.0);
    CHECK(r.mse >= 0.0);
}

TEST_CASE("classification metrics")
{
    const std::vector<int> truth{0, 0, 1, 1, 2, 2};
    const auto perfect = classification_metrics(truth, truth);
    CHECK(perfect.accuracy == 1.0);
    for (int c = 0; c < 3; ++c) {
        CHECK(perfect.f1[c] == 1.0);
        for (int j = 0; j < 3; ++j) CHECK(perfect.confusion_norm[c][j] == (c == j ? 1.0 : 0.0));
    }

    const auto zeros = classification_metrics(truth, std::vector<int>(6, 0));
    CHECK(zeros.accuracy == doctest::Approx(1.0 / 3.0));
    CHECK(zeros.recall == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(zeros.no_predictions[1]);
    CHECK(zeros.precision[1] == 0.0);
    CHECK(zeros.precision[0] == doctest::Approx(1.0 / 3.0));
    CHECK(zeros.macro_f1 == doctest::Approx((0.5 + 0.0 + 0.0) / 3.0));
}

TEST_CASE("classification invariants on random labels")
{
    std::mt19937_64 g(6);
    std::uniform_int_distribution<int> u(0, 2);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> t(40), p(40);
        for (int i = 0; i < 40; ++i) {
            t[static_cast<std::size_t>(i)] = u(g);
            p[static_cast<std::size_t>(i)] = u(g);
        }
        const auto r = classification_metrics(t, p);
        long diag = 0;
        for (int c = 0; c < 3; ++c) diag += r.confusion[c][c];
        CHECK(r.accuracy == static_cast<double>(diag) / 40.0);
        for (int c = 0; c < 3; ++c) {
            for (const double v : {r.precision[c], r.recall[c], r.f1[c]}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            if (r.support[c] > 0) {
                double s = 0.0;
                for (const double v : r.confusion_norm[c]) s += v;
                CHECK(std::abs(s - 1.0) < 1e-12);
            }
        }
        // relabelling both sides leaves macro F1 unchanged
        const int perm[3] = {2, 0, 1};
        std::vector<int> tp, pp;
        for (int i = 0; i < 40; ++i) {
            tp.push_back(perm[t[static_cast<std::size_t>(i)]]);
            pp.push_back(perm[p[static_cast<std::size_t>(i)]]);
        }
        CHECK(classification_metrics(tp, pp).macro_f1 == doctest::Approx(r.macro_f1).epsilon(1e-14));
    }
    CHECK_THROWS_AS(classification_metrics({0, 3}, {0, 1}), DomainError);
}

TEST_CASE("shortest round-trip decimal formatting")
{
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 2000; ++i) {
        const double v = u(g) * std::pow(10.0, static_cast<int>(g() % 40) - 20);
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.5) == "0.5");
    CHECK_THROWS(io::parse_double("abc"));
}

TEST_CASE("FNV-1a digests")
{
    CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ULL);
    CHECK(io::hex_digest("a") == "af63dc4c8601ec8c");
}

TEST_CASE("CSV parsing")
{
    const auto t = io::parse_csv("a,b,c\n1,2,3\n4,5,6\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][2] == "6");
    CHECK(t.column("b") == 1);
}
