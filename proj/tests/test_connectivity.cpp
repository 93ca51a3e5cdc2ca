// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "ilora/connectivity.hpp"
#include "ilora/error.hpp"
#include "test_support.hpp"

using namespace ilora;
using namespace ilora::testing;

TEST_CASE("interpolation endpoints, midpoint and symmetry") {
    Rng rng(1);
    const ParamVector a = random_theta(small_arch(), rng), b = random_theta(small_arch(), rng);
    CHECK(bit_equal(interpolate(a, b, 0.0), a));
    CHECK(bit_equal(interpolate(a, b, 1.0), b));
    CHECK(interpolate(ParamVector{0.0, 2.0}, ParamVector{2.0, 4.0}, 0.5) == ParamVector{1.0, 3.0});
    for (double lam : linspace(0.0, 1.0, 21)) {
        const ParamVector p = interpolate(a, b, lam), q = interpolate(b, a, 1.0 - lam);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-15);
    }
    CHECK_THROWS_AS(interpolate(a, ParamVector(2), 0.5), Error);
    CHECK_THROWS_AS(interpolate(a, b, 1.5), Error);
}

TEST_CASE("default grid") {
    const auto g = linspace(0.0, 1.0, 21);
    CHECK(g.size() == 21);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(std::abs(g[1] - 0.05) < 1e-15);
    validate_lambda_grid(g);
    CHECK_THROWS_AS(validate_lambda_grid({0.0, 0.5}), Error);
    CHECK_THROWS_AS(validate_lambda_grid({0.0, 0.6, 0.5, 1.0}), Error);
    CHECK_THROWS_AS(validate_lambda_grid({1.0}), Error);
}

TEST_CASE("lambda sweep endpoints and the Aall identity") {
    Rng rng(2);
    const ArchConfig arch = small_arch();
    const BackboneParams bb = BackboneParams::random(arch, rng);
    const ParamVector ta = random_theta(arch, rng, 1.0), tb = random_theta(arch, rng, 1.0);
    std::vector<Batch> past;
    for (int k = 0; k < 3; ++k) past.push_back(random_batch(arch, 30, rng));
    const Batch next = random_batch(arch, 30, rng);
    const auto grid = linspace(0.0, 1.0, 21);
    const LambdaSweep s = sweep_lambda(ta, tb, bb, past, next, grid);
    CHECK(s.transition == 3);
    CHECK(s.ap.size() == 21);

    double past_a = 0.0, past_b = 0.0;
    for (const Batch& e : past) {
        past_a += predict_accuracy(bb, ta, e);
        past_b += predict_accuracy(bb, tb, e);
    }
    CHECK(s.ap.front() == past_a / 3.0);
    CHECK(s.an.front() == predict_accuracy(bb, ta, next));
    CHECK(s.ap.back() == past_b / 3.0);
    CHECK(s.an.back() == predict_accuracy(bb, tb, next));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(s.aall[i] - (3.0 * s.ap[i] + s.an[i]) / 4.0) <= 1e-12);
        for (double v : {s.ap[i], s.an[i], s.aall[i]}) CHECK((v >= 0.0 && v <= 1.0));
    }
}

TEST_CASE("weight distance") {
    CHECK(weight_distance(ParamVector{1.0, 2.0}, ParamVector{1.0, 2.0}) == 0.0);
    CHECK(weight_distance(ParamVector{0.0, 0.0}, ParamVector{3.0, 4.0}) == 5.0);
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const ParamVector a = random_theta(small_arch(), rng), b = random_theta(small_arch(), rng),
                          c = random_theta(small_arch(), rng);
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        CHECK(std::abs(weight_distance(a, b) - std::sqrt(s)) <= 1e-12);
        CHECK(weight_distance(a, c) <= weight_distance(a, b) + weight_distance(b, c) + 1e-9);
    }
}

TEST_CASE("linear CKA properties") {
    Rng rng(4);
    const Matrix x = gaussian_fill(rng, 60, 5, 0.0, 1.0);
    CHECK(std::abs(linear_cka(x, x) - 1.0) <= 1e-10);

    // Orthogonal Q from a product of Givens-style rotations, then scaling.
    Matrix q = Matrix::identity(5);
    for (std::size_t k = 0; k + 1 < 5; ++k) {
        Matrix g = Matrix::identity(5);
        const double c = std::cos(0.3 + k), s = std::sin(0.3 + k);
        g(k, k) = c;
        g(k + 1, k + 1) = c;
        g(k, k + 1) = -s;
        g(k + 1, k) = s;
        q = matmul(q, g);
    }
    for (double scale : {2.5, -0.1}) {
        Matrix y = matmul(x, q);
        for (auto& v : y.values()) v *= scale;
        CHECK(std::abs(linear_cka(x, y) - 1.0) <= 1e-8);
    }

    const Matrix a = gaussian_fill(rng, 500, 8, 0.0, 1.0), b = gaussian_fill(rng, 500, 8, 0.0, 1.0);
    const double ind = linear_cka(a, b);
    MESSAGE("independent CKA " << ind);
    CHECK(ind < 0.1);
    CHECK(std::abs(linear_cka(a, b) - linear_cka(b, a)) <= 1e-12);
    CHECK(ind >= 0.0);
    CHECK(ind <= 1.0 + 1e-12);

    try {
        linear_cka(x, Matrix(60, 3, 7.0));
        FAIL("expected a degenerate-input error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
    CHECK_THROWS_AS(linear_cka(x, Matrix(10, 3)), Error);
}

TEST_CASE("embedding landscape") {
    Rng rng(5);
    const ArchConfig arch = small_arch();
    const BackboneParams bb = BackboneParams::random(arch, rng);
    const ParamVector theta0 = random_theta(arch, rng), tw = random_theta(arch, rng), tl = random_theta(arch, rng);
    ParamVector d1(theta0.size()), d2(theta0.size());
    for (std::size_t i = 0; i < theta0.size(); ++i) {
        d1[i] = tw[i] - theta0[i];
        d2[i] = tl[i] - theta0[i];
    }
    const Batch probe = random_batch(arch, 25, rng);
    const auto grid = linspace(-0.5, 1.5, 9);
    const LandscapeGrid g = landscape_grid(theta0, d1, d2, grid, grid, bb, probe);
    CHECK(g.values.rows() == 9);
    CHECK(g.values(2, 2) == 0.0);
    CHECK(g.a[2] == 0.0);
    const Matrix ref = embed(bb, theta0, probe.x);
    CHECK(std::abs(g.values(6, 2) - embedding_deviation(bb, ref, tw, probe.x)) <= 1e-12);
    CHECK(std::abs(g.values(2, 6) - embedding_deviation(bb, ref, tl, probe.x)) <= 1e-12);
    for (double v : g.values.values()) CHECK(v >= 0.0);

    const LandscapeGrid flat = landscape_grid(theta0, ParamVector(theta0.size()), ParamVector(theta0.size()), grid,
                                              grid, bb, probe);
    for (double v : flat.values.values()) CHECK(v == 0.0);
}
