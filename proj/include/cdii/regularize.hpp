#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cdii/gradient_matrix.hpp"
#include "cdii/grid.hpp"

namespace cdii {

enum class RegKind { None, L2, L1TV };

struct RegSpec {
    RegKind kind = RegKind::None;
    double rho = 0.0;
    int outer_iter = 60;
    int inner_iter = 1;
    double tol = 1e-5;
    double bregman_lambda = 1.0;  // quadratic penalty weight of the split
};

struct RegResult {
    ScalarField2 field;
    bool converged = true;
    int iterations = 0;
    std::vector<double> residual_history;
};

namespace detail {

inline Eigen::VectorXd to_vec(const ScalarField2& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.values.data(),
                                             static_cast<Eigen::Index>(f.values.size()));
}

inline ScalarField2 from_vec(const Grid2D& g, const Eigen::VectorXd& v) {
    ScalarField2 f(g);
    Eigen::Map<Eigen::VectorXd>(f.values.data(), v.size()) = v;
    return f;
}

}  // namespace detail

/// Quadratic smoothing with M the discrete gradient: solves the SPD system
/// (I + rho M^T M) g = f.
inline ScalarField2 tikhonov_denoise(const ScalarField2& f, const RegSpec& spec) {
    if (spec.rho < 0.0) throw std::invalid_argument("tikhonov_denoise: rho < 0");
    if (spec.rho == 0.0) return f;
    const Grid2D& g = f.grid;
    Eigen::SparseMatrix<double> Mx, My;
    gradient_matrices(g, Mx, My);
    Eigen::SparseMatrix<double> A =
        spec.rho *
        (Eigen::SparseMatrix<double>(Mx.transpose()) * Mx +
         Eigen::SparseMatrix<double>(My.transpose()) * My);
    Eigen::SparseMatrix<double> I(A.rows(), A.cols());
    I.setIdentity();
    A = A + I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("tikhonov_denoise: factorization failed");
    return detail::from_vec(g, ldlt.solve(detail::to_vec(f)));
}

/// Anisotropic (componentwise l1) TV objective used for monitoring.
inline double tv_objective(const ScalarField2& f0, const ScalarField2& g, double rho) {
    Eigen::SparseMatrix<double> Mx, My;
    gradient_matrices(g.grid, Mx, My);
    Eigen::VectorXd v = detail::to_vec(g), f = detail::to_vec(f0);
    return 0.5 * (v - f).squaredNorm() +
           rho * ((Mx * v).lpNorm<1>() + (My * v).lpNorm<1>());
}

/// Split-Bregman minimization of 1/2 ||g - f||^2 + rho (|dx g|_1 + |dy g|_1).
/// Alternates an SPD solve for g, componentwise soft-thresholding of the
/// auxiliary gradient variables, and a Bregman update.
inline RegResult tv_denoise(const ScalarField2& f, const RegSpec& spec) {
    if (!(spec.rho > 0.0)) throw std::invalid_argument("tv_denoise: rho must be > 0");
    const Grid2D& g = f.grid;
    Eigen::SparseMatrix<double> Mx, My;
    gradient_matrices(g, Mx, My);
    const double lam = spec.bregman_lambda;
    Eigen::SparseMatrix<double> A =
        lam * (Eigen::SparseMatrix<double>(Mx.transpose()) * Mx +
               Eigen::SparseMatrix<double>(My.transpose()) * My);
    Eigen::SparseMatrix<double> I(A.rows(), A.cols());
    I.setIdentity();
    A = A + I;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("tv_denoise: factorization failed");

    const Eigen::VectorXd fv = detail::to_vec(f);
    Eigen::VectorXd u = fv;
    const Eigen::Index n = fv.size();
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(n), dy = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd bx = Eigen::VectorXd::Zero(n), by = Eigen::VectorXd::Zero(n);

    auto shrink = [](Eigen::VectorXd& d, const Eigen::VectorXd& v, double t) {
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const double a = v[k];
            d[k] = (a > t) ? a - t : (a < -t ? a + t : 0.0);
        }
    };

    RegResult res;
    for (int it = 0; it < spec.outer_iter; ++it) {
        Eigen::VectorXd prev = u;
        for (int inner = 0; inner < spec.inner_iter; ++inner) {
            Eigen::VectorXd rhs = fv + lam * (Mx.transpose() * (dx - bx) +
                                              My.transpose() * (dy - by));
            u = ldlt.solve(rhs);
            Eigen::VectorXd gx = Mx * u, gy = My * u;
            shrink(dx, gx + bx, spec.rho / lam);
            shrink(dy, gy + by, spec.rho / lam);
            bx += gx - dx;
            by += gy - dy;
        }
        const double rel = (u - prev).norm() / std::max(prev.norm(), 1e-300);
        res.residual_history.push_back(rel);
        res.iterations = it + 1;
        if (rel <= spec.tol) {
            res.converged = true;
            res.field = detail::from_vec(g, u);
            return res;
        }
    }
    res.converged = false;
    res.field = detail::from_vec(g, u);
    return res;
}

/// Dispatch on RegSpec.kind; None returns the input unchanged.
inline ScalarField2 denoise(const ScalarField2& f, const RegSpec& spec) {
    switch (spec.kind) {
        case RegKind::None: return f;
        case RegKind::L2: return tikhonov_denoise(f, spec);
        case RegKind::L1TV: return tv_denoise(f, spec).field;
    }
    throw std::logic_error("unreachable");
}

}  // namespace cdii
