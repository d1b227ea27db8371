#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <set>

#include "cdii/config.hpp"
#include "cdii/synth.hpp"

using namespace cdii;

TEST_CASE("smooth phantom: spot values") {
    Grid2D g = Grid2D::square(80, -1.0, 2.0);
    auto gamma = make_phantom(PhantomName::Exp1Smooth, g);
    // xi(0,0) = 2 + sin(0) sin(0) = 2 (node i=40, j=40)
    CHECK(gamma.xi.at(40, 40) == Catch::Approx(2.0));
    // zeta(0.25, y) = 0.5 sin(pi/2) = 0.5 for any y
    CHECK(gamma.zeta.at(50, 10) == Catch::Approx(0.5));
    CHECK(gamma.zeta.at(50, 70) == Catch::Approx(0.5));
    // beta(0,0) = 1.8 + 1 + e^{-15(0.36+0.25)} - e^{-15(0.16+0.36)}
    const double expect =
        1.8 + 1.0 + std::exp(-15.0 * 0.61) - std::exp(-15.0 * 0.52);
    CHECK(gamma.beta.at(40, 40) == Catch::Approx(expect));
    CHECK(gamma.ellipticity_kappa() <= 10.0);
}

TEST_CASE("checkerboard phantom: block values and determinism") {
    Grid2D g = Grid2D::square(80, -1.0, 2.0);
    auto a = make_phantom(PhantomName::Exp2Checker, g, 7);
    auto b = make_phantom(PhantomName::Exp2Checker, g, 7);
    CHECK(a.beta.values == b.beta.values);

    std::set<double> values(a.beta.values.begin(), a.beta.values.end());
    for (double v : values) CHECK((v == 1.0 || v == 3.0));
    CHECK(values.count(1.0) == 1);
    CHECK(values.count(3.0) == 1);

    // outside all blocks the background is 1
    CHECK(a.beta.at(0, 0) == 1.0);   // (-1,-1)
    CHECK(a.beta.at(40, 78) == 1.0); // (0, 0.95)

    // different seeds give different fields (overwhelmingly likely)
    auto c = make_phantom(PhantomName::Exp2Checker, g, 8);
    CHECK(a.beta.values != c.beta.values);

    // anisotropy matches the smooth phantom
    auto s = make_phantom(PhantomName::Exp1Smooth, g);
    CHECK(a.xi.values == s.xi.values);
    CHECK(a.zeta.values == s.zeta.values);
}

TEST_CASE("piecewise phantom: region values") {
    Grid2D g = Grid2D::square(80, -1.0, 2.0);
    auto gamma = make_phantom(PhantomName::Exp3Piecewise, g);
    // disk center (-0.3, 0.3): node (28, 52)
    CHECK(gamma.xi.at(28, 52) == 1.5);
    CHECK(gamma.xi.at(75, 10) == 2.5);  // far from the disk
    CHECK(gamma.zeta.at(10, 70) == 0.2);   // y > x
    CHECK(gamma.zeta.at(70, 10) == -0.4);  // y < x
    CHECK(gamma.beta.at(52, 52) == 2.5);   // (0.3, 0.3) inside [0,0.6]^2
    CHECK(gamma.beta.at(10, 10) == 1.0);
    CHECK(gamma.ellipticity_kappa() <= 10.0);
}

TEST_CASE("poly5 illuminations: boundary trace values") {
    Grid2D g = Grid2D::square(80, -1.0, 2.0);
    auto set = make_illuminations(IlluminationKind::Poly5, g);
    REQUIRE(set.specs.size() == 5);
    REQUIRE(set.labels.size() == 5);
    // g3 = 3x^2 + 2y^2 on the right edge at y = 0.5: 3 + 0.5 = 3.5
    const auto& right = set.specs[2].right;
    REQUIRE(right.kind == EdgeKind::Dirichlet);
    CHECK(right.profile.at(60) == Catch::Approx(3.5));
    // g1 = x + y on the bottom edge at x = 0.5: 0.5 - 1 = -0.5
    CHECK(set.specs[0].bottom.profile.at(60) == Catch::Approx(-0.5));
    // g5 = xy on the top edge at x = -0.25: -0.25
    CHECK(set.specs[4].top.profile.at(30) == Catch::Approx(-0.25));
}

TEST_CASE("gaussian illuminations: center peak and off-bottom homogeneity") {
    Grid2D g = Grid2D::square(80, -1.0, 2.0);
    auto set = make_illuminations(IlluminationKind::GaussBottomSmall, g);
    REQUIRE(set.specs.size() == 5);
    // third profile is centered at x = 0; peak value (2 pi 0.04)^{-1/2}
    const double peak = 1.0 / std::sqrt(2.0 * M_PI * 0.04);
    CHECK(set.specs[2].bottom.profile.at(40) == Catch::Approx(peak));
    // all non-bottom edges carry zero Dirichlet data
    for (const auto& spec : set.specs) {
        CHECK(spec.top.kind == EdgeKind::Dirichlet);
        for (double v : spec.top.profile) CHECK(v == 0.0);
        for (double v : spec.left.profile) CHECK(v == 0.0);
        for (double v : spec.right.profile) CHECK(v == 0.0);
    }

    auto neu = make_illuminations(IlluminationKind::GaussBottomNeumann, g);
    for (const auto& spec : neu.specs) {
        CHECK(spec.top.kind == EdgeKind::Neumann);
        CHECK(spec.left.kind == EdgeKind::Neumann);
        CHECK(spec.right.kind == EdgeKind::Neumann);
        CHECK(spec.bottom.kind == EdgeKind::Dirichlet);
    }
}

TEST_CASE("extended-domain grid aligns with the unit square") {
    ExperimentConfig cfg = make_preset(4);
    Grid2D g = cfg.make_grid();
    CHECK(g.h == Catch::Approx(0.025));
    CHECK(g.nx == 241);
    CHECK(g.ny == 241);
    // x = -1 and x = 1 land exactly on nodes
    CHECK(g.x(80) == Catch::Approx(-1.0));
    CHECK(g.x(160) == Catch::Approx(1.0));
    CHECK(g.y(8) == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("measurements: clean provenance and count") {
    Grid2D g = Grid2D::square(20, -1.0, 2.0);
    auto gamma = make_phantom(PhantomName::Exp1Smooth, g);
    auto illums = make_illuminations(IlluminationKind::Poly5, g);
    auto ms = generate_measurements(gamma, illums);
    REQUIRE(ms.H.size() == 5);
    CHECK_FALSE(ms.noisy);
    CHECK(ms.labels[0] == "g1");
}

TEST_CASE("noise: bound, determinism, zero level") {
    Grid2D g = Grid2D::square(20, -1.0, 2.0);
    auto gamma = make_phantom(PhantomName::Exp1Smooth, g);
    auto illums = make_illuminations(IlluminationKind::Poly5, g);
    auto clean = generate_measurements(gamma, illums);

    NoiseSpec spec;
    spec.alpha = 0.04;
    spec.seed = 42;
    auto noisy = add_noise(clean, spec);
    CHECK(noisy.noisy);
    CHECK(noisy.alpha == 0.04);

    // multiplicative bound: |H~ - H| <= alpha |H| (averaging keeps |r| <= 1)
    bool changed = false;
    for (std::size_t m = 0; m < clean.H.size(); ++m)
        for (std::size_t k = 0; k < clean.H[m].cx.size(); ++k) {
            CHECK(std::abs(noisy.H[m].cx[k] - clean.H[m].cx[k]) <=
                  spec.alpha * std::abs(clean.H[m].cx[k]) + 1e-15);
            CHECK(std::abs(noisy.H[m].cy[k] - clean.H[m].cy[k]) <=
                  spec.alpha * std::abs(clean.H[m].cy[k]) + 1e-15);
            if (noisy.H[m].cx[k] != clean.H[m].cx[k]) changed = true;
        }
    CHECK(changed);

    auto again = add_noise(clean, spec);
    for (std::size_t m = 0; m < clean.H.size(); ++m) {
        CHECK(again.H[m].cx == noisy.H[m].cx);
        CHECK(again.H[m].cy == noisy.H[m].cy);
    }

    // different seed, different noise
    NoiseSpec other = spec;
    other.seed = 43;
    auto diff = add_noise(clean, other);
    CHECK(diff.H[0].cx != noisy.H[0].cx);

    // alpha = 0 is the identity
    NoiseSpec zero;
    auto same = add_noise(clean, zero);
    CHECK_FALSE(same.noisy);
    for (std::size_t m = 0; m < clean.H.size(); ++m)
        CHECK(same.H[m].cx == clean.H[m].cx);
}

TEST_CASE("noise: components use independent streams") {
    Grid2D g = Grid2D::square(10, -1.0, 2.0);
    MeasurementSet clean;
    clean.grid = g;
    VectorField2 ones(g);
    ones.cx.assign(g.size(), 1.0);
    ones.cy.assign(g.size(), 1.0);
    clean.H.push_back(ones);
    clean.labels.push_back("const");
    NoiseSpec spec;
    spec.alpha = 0.5;
    spec.seed = 7;
    auto noisy = add_noise(clean, spec);
    CHECK(noisy.H[0].cx != noisy.H[0].cy);
}

TEST_CASE("measurement round trip through a directory") {
    Grid2D g = Grid2D::square(12, -1.0, 2.0);
    auto gamma = make_phantom(PhantomName::Exp1Smooth, g);
    auto illums = make_illuminations(IlluminationKind::Poly5, g);
    auto ms = generate_measurements(gamma, illums);
    NoiseSpec spec;
    spec.alpha = 0.02;
    spec.seed = 5;
    ms = add_noise(ms, spec);

    auto dir = std::filesystem::temp_directory_path() / "cdii_test_ms";
    std::filesystem::remove_all(dir);
    save_measurements(dir, ms);
    auto back = load_measurements(dir);
    CHECK(back.grid.nx == g.nx);
    CHECK(back.noisy);
    CHECK(back.alpha == ms.alpha);
    CHECK(back.seed == ms.seed);
    REQUIRE(back.H.size() == ms.H.size());
    CHECK(back.labels == ms.labels);
    for (std::size_t m = 0; m < ms.H.size(); ++m) {
        CHECK(back.H[m].cx == ms.H[m].cx);
        CHECK(back.H[m].cy == ms.H[m].cy);
    }
    std::filesystem::remove_all(dir);
}
