#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "cdii/config.hpp"
#include "cdii/io.hpp"
#include "cdii/rng.hpp"

using namespace cdii;

namespace fs = std::filesystem;

TEST_CASE("FLD2: scalar round trip is bit exact") {
    Grid2D g(7, 5, 0.125, -1.0, 0.25);
    SplitMix64 rng(2024);
    ScalarField2 f(g);
    for (auto& v : f.values) v = rng.uniform_pm1() * std::exp(10.0 * rng.uniform01());

    std::stringstream ss;
    write_fld2_block(ss, f);
    ScalarField2 back = read_fld2_block(ss);
    CHECK(back.grid.nx == g.nx);
    CHECK(back.grid.ny == g.ny);
    CHECK(back.grid.h == g.h);
    CHECK(back.grid.ox == g.ox);
    CHECK(back.grid.oy == g.oy);
    // 17 significant digits reproduce doubles exactly
    CHECK(back.values == f.values);
}

TEST_CASE("FLD2: malformed inputs rejected") {
    {
        std::stringstream ss("NOPE 3 3 0.5 0 0\n");
        CHECK_THROWS_AS(read_fld2_block(ss), std::runtime_error);
    }
    {
        std::stringstream ss("FLD2 3 x\n");
        CHECK_THROWS_AS(read_fld2_block(ss), std::runtime_error);
    }
    {
        std::stringstream ss("FLD2 3 3 0.5 0 0\n1 2 3\n4 5\n");  // short data
        CHECK_THROWS_AS(read_fld2_block(ss), std::runtime_error);
    }
}

TEST_CASE("FLD2: vector file round trip") {
    Grid2D g(6, 4, 0.2, 0.0, -0.5);
    SplitMix64 rng(7);
    VectorField2 F(g);
    for (auto& v : F.cx) v = rng.uniform_pm1();
    for (auto& v : F.cy) v = rng.uniform_pm1();

    auto path = fs::temp_directory_path() / "cdii_test_vec.fld";
    save_vector(path, F);
    VectorField2 back = load_vector(path);
    CHECK(back.cx == F.cx);
    CHECK(back.cy == F.cy);
    fs::remove(path);

    CHECK_THROWS_AS(load_vector(fs::temp_directory_path() / "cdii_missing.fld"),
                    std::runtime_error);
}

TEST_CASE("key=value files: round trip, comments, sorted output") {
    auto path = fs::temp_directory_path() / "cdii_test_kv";
    write_kv(path, {{"zeta", "0.5"}, {"alpha", "0.04"}, {"label", "g1,g2"}});
    auto kv = read_kv(path);
    CHECK(kv.at("alpha") == "0.04");
    CHECK(kv.at("zeta") == "0.5");
    CHECK(kv.at("label") == "g1,g2");

    // output is sorted by key
    std::ifstream is(path);
    std::string l1, l2, l3;
    std::getline(is, l1);
    std::getline(is, l2);
    std::getline(is, l3);
    CHECK(l1.rfind("alpha", 0) == 0);
    CHECK(l2.rfind("label", 0) == 0);
    CHECK(l3.rfind("zeta", 0) == 0);
    is.close();
    fs::remove(path);
}

TEST_CASE("config: preset fidelity") {
    SECTION("experiment 1") {
        auto cfg = make_preset(1);
        CHECK(cfg.grid_n == 80);
        CHECK(cfg.domain.ox == -1.0);
        CHECK(cfg.domain.lx == 2.0);
        CHECK(cfg.phantom == PhantomName::Exp1Smooth);
        CHECK(cfg.illuminations == IlluminationKind::Poly5);
        CHECK_FALSE(cfg.restrict_to_X);
        CHECK(cfg.recon.basis.i1 == 0);
        CHECK(cfg.recon.basis.i2 == 1);
        CHECK(cfg.recon.extra_pairs.size() == 3);
        // clean preset: no regularization until a noise level is set
        CHECK(cfg.recon.reg_xi.kind == RegKind::None);
        CHECK(cfg.recon.presmooth_passes == 0);
    }
    SECTION("experiment 3") {
        auto cfg = make_preset(3);
        CHECK(cfg.phantom == PhantomName::Exp3Piecewise);
        CHECK(cfg.recon.reg_xi.kind == RegKind::L1TV);
        CHECK(cfg.recon.reg_logbeta.kind == RegKind::L1TV);
    }
    SECTION("experiments 4 and 5") {
        auto e4 = make_preset(4);
        CHECK(e4.grid_n == 240);
        CHECK(e4.domain.ox == -3.0);
        CHECK(e4.domain.ly == 6.0);
        CHECK(e4.illuminations == IlluminationKind::GaussBottomExtended);
        CHECK(e4.restrict_to_X);
        auto e5 = make_preset(5);
        CHECK(e5.illuminations == IlluminationKind::GaussBottomNeumann);
    }
    CHECK_THROWS_AS(make_preset(9), std::invalid_argument);
}

TEST_CASE("config: parse, preset base, overrides") {
    const std::string text =
        "# comment line\n"
        "experiment = 1\n"
        "grid.n = 40          # inline comment\n"
        "noise.alpha = 0.04\n"
        "noise.seed = 7\n"
        "reg.kind = l2\n"
        "reg.rho = 0.5\n"
        "out_dir = /tmp/xyz\n";
    auto cfg = parse_config(text);
    CHECK(cfg.experiment == 1);
    CHECK(cfg.grid_n == 40);                  // override wins over the preset
    CHECK(cfg.phantom == PhantomName::Exp1Smooth);  // preset survives
    CHECK(cfg.noise.alpha == 0.04);
    CHECK(cfg.noise.seed == 7);
    CHECK(cfg.out_dir == "/tmp/xyz");
    // explicit reg keys suppress the automatic noisy-run retuning
    CHECK(cfg.recon.reg_xi.kind == RegKind::L2);
    CHECK(cfg.recon.reg_xi.rho == 0.5);
    // noisy data turns the measurement low-pass on by default
    CHECK(cfg.recon.presmooth_passes > 0);
}

TEST_CASE("config: noisy experiment-1 auto regularization") {
    auto clean = parse_config("experiment = 1\n");
    CHECK(clean.recon.reg_xi.kind == RegKind::None);
    CHECK(clean.recon.presmooth_passes == 0);

    auto noisy = parse_config("experiment = 1\nnoise.alpha = 0.04\n");
    CHECK(noisy.recon.reg_xi.kind == RegKind::L2);
    CHECK(noisy.recon.reg_logbeta.kind == RegKind::L2);
    CHECK(noisy.recon.presmooth_passes == 5);

    auto manual = parse_config(
        "experiment = 1\nnoise.alpha = 0.04\nrecon.presmooth = 9\n");
    CHECK(manual.recon.presmooth_passes == 9);
}

TEST_CASE("config: errors carry line numbers") {
    using Catch::Matchers::ContainsSubstring;
    CHECK_THROWS_WITH(parse_config("experiment = 1\nbogus.key = 3\n"),
                      ContainsSubstring("line 2") && ContainsSubstring("bogus.key"));
    CHECK_THROWS_WITH(parse_config("grid.n = forty\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_config("experiment = 1\n\nnoise.alpha = -1\n"),
                      ContainsSubstring("line 3"));
    CHECK_THROWS_WITH(parse_config("solver.method = magic\n"),
                      ContainsSubstring("direct or iterative"));
    CHECK_THROWS_AS(parse_config("no equals sign here\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_config("= value\n"), std::runtime_error);
}

TEST_CASE("config: domain and custom keys") {
    auto cfg = parse_config(
        "experiment = custom\n"
        "domain = Xprime\n"
        "grid.n = 120\n"
        "phantom = exp2_checker\n"
        "phantom.seed = 11\n"
        "illuminations = gauss_bottom_extended\n"
        "recon.beta_bc = anchor\n"
        "restrict_to_X = true\n");
    CHECK(cfg.experiment == 0);
    CHECK(cfg.domain.ox == -3.0);
    CHECK(cfg.grid_n == 120);
    CHECK(cfg.phantom == PhantomName::Exp2Checker);
    CHECK(cfg.phantom_seed == 11);
    CHECK(cfg.illuminations == IlluminationKind::GaussBottomExtended);
    CHECK(cfg.recon.beta_bc.mode == BetaBcMode::Anchor);
    CHECK(cfg.restrict_to_X);

    // make_grid keeps the mesh width consistent across both axes
    Grid2D g = cfg.make_grid();
    CHECK(g.h == Catch::Approx(6.0 / 120));
    CHECK(g.nx == 121);
    CHECK(g.ny == 121);
}
