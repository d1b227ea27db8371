#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cdii/diagnostics.hpp"
#include "cdii/rng.hpp"

using namespace cdii;

namespace {

Matrix2Field const_mat(const Grid2D& g, double a11, double a12, double a21, double a22) {
    Matrix2Field M(g);
    M.a11.assign(g.size(), a11);
    M.a12.assign(g.size(), a12);
    M.a21.assign(g.size(), a21);
    M.a22.assign(g.size(), a22);
    return M;
}

}  // namespace

TEST_CASE("det basis field: hand values") {
    Grid2D g(3, 3, 0.5, 0.0, 0.0);
    VectorField2 H1(g), H2(g);
    H1.cx.assign(g.size(), 2.0);
    H2.cy.assign(g.size(), 3.0);
    ScalarField2 d = det_basis_field(H1, H2);
    for (double v : d.values) CHECK(v == Catch::Approx(6.0));

    // swapped arguments give the same absolute value
    ScalarField2 ds = det_basis_field(H2, H1);
    CHECK(ds.values == d.values);

    // colinear fields give zero
    VectorField2 H3 = H1;
    for (auto& v : H3.cx) v *= -4.0;
    for (double v : det_basis_field(H1, H3).values) CHECK(v == 0.0);
}

TEST_CASE("independence field: dependence, orthogonality, scale invariance") {
    Grid2D g(3, 3, 0.5, 0.0, 0.0);
    auto I2 = const_mat(g, 1, 0, 0, 1);
    auto D = const_mat(g, 1, 0, 0, -1);

    // M against a multiple of itself: exactly 1
    auto I5 = const_mat(g, 5, 0, 0, 5);
    for (double v : independence_field(I2, I5).values) CHECK(v == Catch::Approx(1.0));

    // Frobenius-orthogonal pair: exactly 0
    for (double v : independence_field(I2, D).values)
        CHECK(v == Catch::Approx(0.0).margin(1e-15));

    // 45-degree example: |I : e1e1| / (sqrt(2) * 1) = 1/sqrt(2)
    auto E11 = const_mat(g, 1, 0, 0, 0);
    for (double v : independence_field(I2, E11).values)
        CHECK(v == Catch::Approx(1.0 / std::sqrt(2.0)));

    // zero matrix reports 1 (no information)
    auto Z = const_mat(g, 0, 0, 0, 0);
    for (double v : independence_field(I2, Z).values) CHECK(v == 1.0);

    // scale invariance on random pairs, and the value always lies in [0, 1]
    SplitMix64 rng(5);
    for (int t = 0; t < 200; ++t) {
        auto A = const_mat(g, rng.uniform_pm1(), rng.uniform_pm1(), rng.uniform_pm1(),
                           rng.uniform_pm1());
        auto B = const_mat(g, rng.uniform_pm1(), rng.uniform_pm1(), rng.uniform_pm1(),
                           rng.uniform_pm1());
        auto As = A;
        for (auto* c : {&As.a11, &As.a12, &As.a21, &As.a22})
            for (auto& v : *c) v *= 13.0;
        ScalarField2 ab = independence_field(A, B);
        ScalarField2 asb = independence_field(As, B);
        CHECK(ab.values[0] == Catch::Approx(asb.values[0]).margin(1e-13));
        CHECK(ab.values[0] >= 0.0);
        CHECK(ab.values[0] <= 1.0);
    }
}

TEST_CASE("relative L2 error: hand values, mask, zero-norm guard") {
    Grid2D g(3, 3, 0.5, 0.0, 0.0);
    ScalarField2 t(g, 2.0);
    ScalarField2 f(g, 2.0);
    CHECK(relative_l2_error(f, t) == 0.0);

    for (auto& v : f.values) v = 2.2;  // uniform 10% excess
    CHECK(relative_l2_error(f, t) == Catch::Approx(0.1));

    // masking removes the only corrupted node
    ScalarField2 f2(g, 2.0);
    f2.values[4] = 100.0;
    NodeMask m(g.size(), 1);
    m[4] = 0;
    CHECK(relative_l2_error(f2, t, &m) == 0.0);
    CHECK(relative_l2_error(f2, t) > 1.0);

    ScalarField2 zero(g, 0.0);
    CHECK_THROWS_AS(relative_l2_error(f, zero), std::domain_error);
}

TEST_CASE("relative L2 error: triangle-style bound on random triples") {
    Grid2D g(5, 5, 0.25, 0.0, 0.0);
    SplitMix64 rng(31);
    for (int t = 0; t < 100; ++t) {
        ScalarField2 a(g), b(g), truth(g);
        for (std::size_t k = 0; k < g.size(); ++k) {
            a.values[k] = rng.uniform_pm1();
            b.values[k] = rng.uniform_pm1();
            truth.values[k] = 1.0 + 0.5 * rng.uniform_pm1();
        }
        ScalarField2 mid(g);
        for (std::size_t k = 0; k < g.size(); ++k)
            mid.values[k] = 0.5 * (a.values[k] + b.values[k]);
        // errors are norms of differences against the same truth, so the
        // midpoint error obeys the triangle inequality
        CHECK(relative_l2_error(mid, truth) <=
              0.5 * (relative_l2_error(a, truth) + relative_l2_error(b, truth)) + 1e-13);
    }
}
