#include <catch2/catch_amalgamated.hpp>
#include <Eigen/Dense>
#include <cmath>

#include "cdii/regularize.hpp"
#include "cdii/rng.hpp"

#include "oracles.hpp"

using namespace cdii;

namespace {


double grad_energy(const ScalarField2& f) {
    Eigen::SparseMatrix<double> Mx, My;
    gradient_matrices(f.grid, Mx, My);
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXd>(f.values.data(), f.values.size());
    return (Mx * v).squaredNorm() + (My * v).squaredNorm();
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        num += (a[k] - b[k]) * (a[k] - b[k]);
        den += b[k] * b[k];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("tikhonov: rho = 0 is the identity, constants are fixed points") {
    Grid2D g(9, 9, 0.25, -1.0, -1.0);
    auto f = ScalarField2::sample(g, [](double x, double y) { return x * y + 2; });
    RegSpec spec;
    spec.kind = RegKind::L2;
    spec.rho = 0.0;
    CHECK(tikhonov_denoise(f, spec).values == f.values);

    spec.rho = 0.7;
    ScalarField2 c(g, 3.25);
    ScalarField2 out = tikhonov_denoise(c, spec);
    for (double v : out.values) CHECK(v == Catch::Approx(3.25).margin(1e-12));

    spec.rho = -1.0;
    CHECK_THROWS_AS(tikhonov_denoise(f, spec), std::invalid_argument);
}

TEST_CASE("tikhonov matches a dense direct solve") {
    Grid2D g(12, 12, 0.1, 0.0, 0.0);  // 144 unknowns
    SplitMix64 rng(17);
    ScalarField2 f(g);
    for (auto& v : f.values) v = rng.uniform_pm1();

    for (double rho : {1e-3, 0.05, 1.0}) {
        RegSpec spec;
        spec.kind = RegKind::L2;
        spec.rho = rho;
        ScalarField2 fast = tikhonov_denoise(f, spec);

        Eigen::SparseMatrix<double> Mx, My;
        gradient_matrices(g, Mx, My);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(g.size(), g.size()) +
                            rho * (Eigen::MatrixXd(Mx).transpose() * Eigen::MatrixXd(Mx) +
                                   Eigen::MatrixXd(My).transpose() * Eigen::MatrixXd(My));
        Eigen::VectorXd fv =
            Eigen::Map<const Eigen::VectorXd>(f.values.data(), f.values.size());
        Eigen::VectorXd dense = A.fullPivLu().solve(fv);

        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            num += (fast.values[k] - dense[k]) * (fast.values[k] - dense[k]);
            den += dense[k] * dense[k];
        }
        CHECK(std::sqrt(num / den) <= 1e-8);
    }
}

TEST_CASE("tikhonov: mean preservation and monotone smoothing") {
    Grid2D g(17, 17, 0.125, -1.0, -1.0);
    SplitMix64 rng(3);
    ScalarField2 f(g);
    for (auto& v : f.values) v = 1.0 + 0.3 * rng.uniform_pm1();
    auto mean = [](const ScalarField2& s) {
        double m = 0.0;
        for (double v : s.values) m += v;
        return m / s.values.size();
    };

    double last_energy = grad_energy(f);
    for (double rho : {1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
        RegSpec spec;
        spec.kind = RegKind::L2;
        spec.rho = rho;
        ScalarField2 out = tikhonov_denoise(f, spec);
        // M annihilates constants, so the mean passes through unchanged
        CHECK(mean(out) == Catch::Approx(mean(f)).epsilon(1e-10));
        const double e = grad_energy(out);
        CHECK(e <= last_energy * (1.0 + 1e-12));
        last_energy = e;
    }
}

TEST_CASE("tv: step signal matches the exact 1D solver") {
    // y-constant field: the 2D anisotropic TV problem decouples into
    // identical rows, each the 1D problem with lambda = rho / h for signals
    // whose jumps stay isolated (centered stencil splits a jump across the
    // two adjacent nodes)
    const int n = 101;
    Grid2D g(n, 5, 0.02, 0.0, 0.0);
    std::vector<double> signal(n);
    for (int i = 0; i < n; ++i) {
        const double x = i / double(n - 1);
        signal[i] = (x < 0.3) ? 1.0 : (x < 0.7 ? 3.0 : 0.5);
    }
    ScalarField2 f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) f.at(i, j) = signal[i];

    RegSpec spec;
    spec.kind = RegKind::L1TV;
    spec.rho = 0.004;
    spec.bregman_lambda = 2.0 * spec.rho;
    spec.outer_iter = 4000;
    spec.tol = 1e-10;
    RegResult res = tv_denoise(f, spec);
    CHECK(res.converged);

    std::vector<double> oracle = test_oracles::tv1d_exact(signal, spec.rho / g.h);
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i) row[i] = res.field.at(i, 2);
    CHECK(rel_l2(row, oracle) <= 0.01);

    // rows stay identical (the y direction contributes nothing)
    for (int i = 0; i < n; ++i)
        CHECK(res.field.at(i, 0) == Catch::Approx(res.field.at(i, 3)).margin(1e-8));
}

TEST_CASE("tv: oracle sanity - strong lambda flattens to the mean") {
    std::vector<double> y = {1.0, 1.0, 5.0, 5.0};
    auto x = test_oracles::tv1d_exact(y, 100.0);
    for (double v : x) CHECK(v == Catch::Approx(3.0));
    auto id = test_oracles::tv1d_exact(y, 0.0);
    CHECK(id == y);
    // soft jump shrinkage: two-node signal jump shrinks by 2 lambda
    std::vector<double> two = {0.0, 4.0};
    auto s = test_oracles::tv1d_exact(two, 1.0);
    CHECK(s[0] == Catch::Approx(1.0));
    CHECK(s[1] == Catch::Approx(3.0));
}

TEST_CASE("tv: small rho returns nearly the input") {
    Grid2D g(21, 21, 0.1, -1.0, -1.0);
    auto f = ScalarField2::sample(g, [](double x, double y) {
        return std::sin(3 * x) + std::cos(2 * y);
    });
    RegSpec spec;
    spec.kind = RegKind::L1TV;
    spec.rho = 1e-8;
    spec.bregman_lambda = 2e-8;
    spec.outer_iter = 200;
    spec.tol = 1e-9;
    RegResult res = tv_denoise(f, spec);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(res.field.values[k] == Catch::Approx(f.values[k]).margin(1e-5));
}

TEST_CASE("tv: objective decreases against the input") {
    Grid2D g(17, 17, 0.125, -1.0, -1.0);
    SplitMix64 rng(11);
    ScalarField2 f(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            f.at(i, j) = (i < g.nx / 2 ? 0.0 : 2.0) + 0.2 * rng.uniform_pm1();
    RegSpec spec;
    spec.kind = RegKind::L1TV;
    spec.rho = 5e-3;
    spec.bregman_lambda = 1e-2;
    spec.outer_iter = 500;
    spec.tol = 1e-8;
    RegResult res = tv_denoise(f, spec);
    CHECK(tv_objective(f, res.field, spec.rho) < tv_objective(f, f, spec.rho));
    CHECK_FALSE(res.residual_history.empty());
    CHECK(res.residual_history.back() <= spec.tol);
}

TEST_CASE("denoise dispatch") {
    Grid2D g(9, 9, 0.25, -1.0, -1.0);
    auto f = ScalarField2::sample(g, [](double x, double) { return x; });
    RegSpec none;
    CHECK(denoise(f, none).values == f.values);
    RegSpec bad;
    bad.kind = RegKind::L1TV;
    bad.rho = 0.0;
    CHECK_THROWS_AS(denoise(f, bad), std::invalid_argument);
}
