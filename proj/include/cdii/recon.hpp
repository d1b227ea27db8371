#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cdii/diagnostics.hpp"
#include "cdii/gradient_matrix.hpp"
#include "cdii/grid.hpp"
#include "cdii/ops.hpp"
#include "cdii/regularize.hpp"
#include "cdii/synth.hpp"

namespace cdii {

struct BasisPair {
    int i1 = 0;
    int i2 = 1;
};

/// mu decomposes H at extra index e1 in the (H_basis) frame, lambda the one
/// at e2.
struct CoefficientFields {
    ScalarField2 mu1, mu2, lambda1, lambda2;
    NodeMask valid;
};

struct ConstraintPair {
    Matrix2Field M1, M2;
};

enum class BetaBcMode { DirichletTrace, Anchor };

struct BetaBc {
    BetaBcMode mode = BetaBcMode::Anchor;
    ScalarField2 log_beta_trace;  // boundary nodes read in DirichletTrace mode
    double anchor_x = 0.0, anchor_y = 0.0;
    double anchor_value = 0.0;  // log beta at the anchor node
};

struct ReconOptions {
    BasisPair basis;
    std::vector<std::pair<int, int>> extra_pairs;
    double det_floor_rel = 1e-8;      // floor = det_floor_rel * max |det(H1,H2)|
    double max_masked_fraction = 0.5; // basis_coefficients aborts above this
    // Passes of the 5-point low-pass filter applied to the measurements
    // before any differentiation; the algebraic steps differentiate the
    // data once, so rough (noisy) inputs must be low-passed first.
    int presmooth_passes = 0;
    BetaBc beta_bc;
    RegSpec reg_xi, reg_zeta, reg_logbeta;
    // When set, the anisotropy step is skipped and beta is reconstructed
    // against this (known) anisotropy.
    bool use_known_anisotropy = false;
    ScalarField2 known_xi, known_zeta;
};

struct ReconResult {
    ScalarField2 xi, zeta, beta;
    NodeMask mask;  // 1 where the algebraic formulas were valid
    ReconReport diagnostics;
};

namespace detail {

inline double det2(double a, double b, double c, double d) { return a * d - b * c; }

/// Fill masked nodes with the value of the nearest valid node (multi-source
/// BFS in grid metric). No-op when nothing is masked or everything is.
inline void fill_masked(ScalarField2& f, const NodeMask& mask) {
    const Grid2D& g = f.grid;
    const std::size_t n = g.size();
    bool any_masked = false, any_valid = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (mask[k]) any_valid = true;
        else any_masked = true;
    }
    if (!any_masked || !any_valid) return;
    std::vector<std::int32_t> src(n, -1);
    std::deque<std::size_t> queue;
    for (std::size_t k = 0; k < n; ++k)
        if (mask[k]) {
            src[k] = static_cast<std::int32_t>(k);
            queue.push_back(k);
        }
    while (!queue.empty()) {
        const std::size_t k = queue.front();
        queue.pop_front();
        const int i = static_cast<int>(k % g.nx);
        const int j = static_cast<int>(k / g.nx);
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d], jj = j + dj[d];
            if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) continue;
            const std::size_t kk = g.idx(ii, jj);
            if (src[kk] < 0) {
                src[kk] = src[k];
                queue.push_back(kk);
            }
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        if (!mask[k]) f.values[k] = f.values[src[k]];
}

}  // namespace detail

/// Degeneracy floor on |det(H_basis)|, relative to its maximum.
inline double det_floor_value(const ScalarField2& det_basis, double det_floor_rel) {
    double dmax = 0.0;
    for (double v : det_basis.values) dmax = std::max(dmax, v);
    return det_floor_rel * dmax;
}

/// Cramer decomposition of H_{e1}, H_{e2} in the (H_{i1}, H_{i2}) basis.
/// Nodes where |det(H_basis)| falls below the floor are masked.
inline CoefficientFields basis_coefficients(const MeasurementSet& ms, BasisPair basis,
                                            std::pair<int, int> extra,
                                            double det_floor_rel = 1e-8,
                                            double max_masked_fraction = 0.5) {
    if (basis.i1 == basis.i2)
        throw std::invalid_argument("basis_coefficients: basis indices equal");
    const auto& H1 = ms.H.at(basis.i1);
    const auto& H2 = ms.H.at(basis.i2);
    const auto& H3 = ms.H.at(extra.first);
    const auto& H4 = ms.H.at(extra.second);
    const Grid2D& g = ms.grid;
    CoefficientFields cf{ScalarField2(g), ScalarField2(g), ScalarField2(g),
                         ScalarField2(g), NodeMask(g.size(), 1)};
    ScalarField2 db = det_basis_field(H1, H2);
    const double floor = det_floor_value(db, det_floor_rel);
    std::size_t masked = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = detail::det2(H1.cx[k], H2.cx[k], H1.cy[k], H2.cy[k]);
        if (std::abs(d) < floor || d == 0.0) {
            cf.valid[k] = 0;
            ++masked;
            continue;
        }
        cf.mu1.values[k] = detail::det2(H3.cx[k], H2.cx[k], H3.cy[k], H2.cy[k]) / d;
        cf.mu2.values[k] = detail::det2(H1.cx[k], H3.cx[k], H1.cy[k], H3.cy[k]) / d;
        cf.lambda1.values[k] = detail::det2(H4.cx[k], H2.cx[k], H4.cy[k], H2.cy[k]) / d;
        cf.lambda2.values[k] = detail::det2(H1.cx[k], H4.cx[k], H1.cy[k], H4.cy[k]) / d;
    }
    if (static_cast<double>(masked) / g.size() > max_masked_fraction)
        throw std::runtime_error("basis_coefficients: determinant floor violated on " +
                                 std::to_string(masked) + " of " +
                                 std::to_string(g.size()) + " nodes");
    // Keep the gradients of the coefficient fields usable near masked spots.
    detail::fill_masked(cf.mu1, cf.valid);
    detail::fill_masked(cf.mu2, cf.valid);
    detail::fill_masked(cf.lambda1, cf.valid);
    detail::fill_masked(cf.lambda2, cf.valid);
    return cf;
}

/// Z_1 = [grad mu_1, grad mu_2], Z_2 = [grad lambda_1, grad lambda_2]
/// (columns are gradients; this step consumes one derivative of the data).
inline std::pair<Matrix2Field, Matrix2Field> z_matrices(const CoefficientFields& cf) {
    const Grid2D& g = cf.mu1.grid;
    Matrix2Field Z1(g), Z2(g);
    VectorField2 gm1 = gradient(cf.mu1), gm2 = gradient(cf.mu2);
    VectorField2 gl1 = gradient(cf.lambda1), gl2 = gradient(cf.lambda2);
    Z1.a11 = gm1.cx; Z1.a21 = gm1.cy;
    Z1.a12 = gm2.cx; Z1.a22 = gm2.cy;
    Z2.a11 = gl1.cx; Z2.a21 = gl1.cy;
    Z2.a12 = gl2.cx; Z2.a22 = gl2.cy;
    return {std::move(Z1), std::move(Z2)};
}

/// M_k = (Z_k H^T J)^sym with H = [H1, H2] and J = [[0,-1],[1,0]].
inline ConstraintPair constraint_matrices(const Matrix2Field& Z1, const Matrix2Field& Z2,
                                          const VectorField2& H1, const VectorField2& H2) {
    require_same_grid(Z1.grid, H1.grid, "constraint_matrices");
    require_same_grid(Z2.grid, H2.grid, "constraint_matrices");
    ConstraintPair out{Matrix2Field(Z1.grid), Matrix2Field(Z2.grid)};
    auto fill = [&](const Matrix2Field& Z, Matrix2Field& M) {
        for (std::size_t k = 0; k < Z.a11.size(); ++k) {
            // H^T J: rows are H_i, columns rotated by J
            const double h11 = H1.cx[k], h21 = H1.cy[k];
            const double h12 = H2.cx[k], h22 = H2.cy[k];
            // (H^T J)_{rc}: H^T = [[h11,h21],[h12,h22]], J = [[0,-1],[1,0]]
            const double t11 = h21, t12 = -h11;
            const double t21 = h22, t22 = -h12;
            const double p11 = Z.a11[k] * t11 + Z.a12[k] * t21;
            const double p12 = Z.a11[k] * t12 + Z.a12[k] * t22;
            const double p21 = Z.a21[k] * t11 + Z.a22[k] * t21;
            const double p22 = Z.a21[k] * t12 + Z.a22[k] * t22;
            M.a11[k] = p11;
            M.a22[k] = p22;
            M.a12[k] = M.a21[k] = 0.5 * (p12 + p21);
        }
    };
    fill(Z1, out.M1);
    fill(Z2, out.M2);
    return out;
}

/// Generalized cross product of two symmetric matrices: B is symmetric and
/// orthogonal to both M1 and M2; it vanishes only when they are dependent.
inline Matrix2Field b_matrix(const ConstraintPair& M) {
    Matrix2Field B(M.M1.grid);
    for (std::size_t k = 0; k < B.a11.size(); ++k) {
        const double m111 = M.M1.a11[k], m112 = M.M1.a12[k], m122 = M.M1.a22[k];
        const double m211 = M.M2.a11[k], m212 = M.M2.a12[k], m222 = M.M2.a22[k];
        B.a11[k] = 2.0 * m122 * m212 - 2.0 * m112 * m222;
        B.a12[k] = B.a21[k] = m111 * m222 - m122 * m211;
        B.a22[k] = 2.0 * m112 * m211 - 2.0 * m111 * m212;
    }
    return B;
}

/// Orientation sign making B a positive matrix: sign of B11, falling back to
/// the trace when B11 vanishes, then to +1.
inline double orientation_sign(double b11, double b22) {
    if (b11 != 0.0) return b11 > 0.0 ? 1.0 : -1.0;
    const double tr = b11 + b22;
    if (tr != 0.0) return tr > 0.0 ? 1.0 : -1.0;
    return 1.0;
}

struct AnisotropyResult {
    ScalarField2 xi, zeta;
    NodeMask valid;
};

/// gamma_tilde = sign(B11) |det B|^{-1/2} B. Degenerate-B nodes are masked.
inline AnisotropyResult tilde_gamma_single(const Matrix2Field& B,
                                           double det_floor = 0.0) {
    const Grid2D& g = B.grid;
    AnisotropyResult out{ScalarField2(g, 1.0), ScalarField2(g, 0.0),
                         NodeMask(g.size(), 1)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double det = B.a11[k] * B.a22[k] - B.a12[k] * B.a12[k];
        const double ad = std::abs(det);
        if (!(ad > det_floor) || ad == 0.0) {
            out.valid[k] = 0;
            continue;
        }
        const double s = orientation_sign(B.a11[k], B.a22[k]);
        const double w = s / std::sqrt(ad);
        const double xi = w * B.a11[k];
        if (!(xi > 0.0)) {
            out.valid[k] = 0;
            continue;
        }
        out.xi.values[k] = xi;
        out.zeta.values[k] = w * B.a12[k];
    }
    return out;
}

/// Multi-pair anisotropy: gamma_tilde = sum_i sign(B_i^11) B_i /
/// sum_i |det B_i|^{1/2}, renormalized to det = 1 through the (xi, zeta)
/// parametrization.
inline AnisotropyResult tilde_gamma_averaged(const MeasurementSet& ms,
                                             const ReconOptions& opts,
                                             std::vector<ConstraintPair>* pairs_out = nullptr) {
    if (opts.extra_pairs.empty())
        throw std::invalid_argument("tilde_gamma_averaged: need at least one extra pair");
    const Grid2D& g = ms.grid;
    const auto& H1 = ms.H.at(opts.basis.i1);
    const auto& H2 = ms.H.at(opts.basis.i2);

    Matrix2Field num(g);
    ScalarField2 den(g, 0.0);
    NodeMask any(g.size(), 0);
    for (const auto& pr : opts.extra_pairs) {
        CoefficientFields cf = basis_coefficients(ms, opts.basis, pr, opts.det_floor_rel,
                                                  opts.max_masked_fraction);
        auto [Z1, Z2] = z_matrices(cf);
        ConstraintPair M = constraint_matrices(Z1, Z2, H1, H2);
        Matrix2Field B = b_matrix(M);
        if (pairs_out) pairs_out->push_back(M);
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (!cf.valid[k]) continue;
            const double det = B.a11[k] * B.a22[k] - B.a12[k] * B.a12[k];
            const double ad = std::abs(det);
            if (ad == 0.0) continue;
            const double s = orientation_sign(B.a11[k], B.a22[k]);
            num.a11[k] += s * B.a11[k];
            num.a12[k] += s * B.a12[k];
            num.a22[k] += s * B.a22[k];
            den.values[k] += std::sqrt(ad);
            any[k] = 1;
        }
    }

    AnisotropyResult out{ScalarField2(g, 1.0), ScalarField2(g, 0.0),
                         NodeMask(g.size(), 1)};
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!any[k] || !(den.values[k] > 0.0)) {
            out.valid[k] = 0;
            continue;
        }
        double xi = num.a11[k] / den.values[k];
        double zeta = num.a12[k] / den.values[k];
        double g22 = num.a22[k] / den.values[k];
        // The averaged matrix is only approximately unimodular; renormalize.
        const double det = xi * g22 - zeta * zeta;
        if (!(det > 0.0) || !(xi > 0.0)) {
            out.valid[k] = 0;
            continue;
        }
        const double r = std::sqrt(det);
        out.xi.values[k] = xi / r;
        out.zeta.values[k] = zeta / r;
    }
    return out;
}

/// grad(log beta) = -J gamma_tilde H^{-T} (curl2(gamma_tilde^{-1} H_1);
/// curl2(gamma_tilde^{-1} H_2)). Nodes with degenerate H are masked.
inline VectorField2 log_beta_gradient(const VectorField2& H1, const VectorField2& H2,
                                      const ScalarField2& xi, const ScalarField2& zeta,
                                      double det_floor_rel = 1e-8,
                                      NodeMask* mask_out = nullptr) {
    const Grid2D& g = H1.grid;
    require_same_grid(g, H2.grid, "log_beta_gradient");
    require_same_grid(g, xi.grid, "log_beta_gradient");

    // W_i = gamma_tilde^{-1} H_i; det(gamma_tilde) = 1 so the inverse is
    // [[(1+zeta^2)/xi, -zeta], [-zeta, xi]].
    VectorField2 W1(g), W2(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double x = xi.values[k], z = zeta.values[k];
        const double i11 = (1.0 + z * z) / x, i12 = -z, i22 = x;
        W1.cx[k] = i11 * H1.cx[k] + i12 * H1.cy[k];
        W1.cy[k] = i12 * H1.cx[k] + i22 * H1.cy[k];
        W2.cx[k] = i11 * H2.cx[k] + i12 * H2.cy[k];
        W2.cy[k] = i12 * H2.cx[k] + i22 * H2.cy[k];
    }
    ScalarField2 c1 = curl2(W1), c2 = curl2(W2);

    ScalarField2 db = det_basis_field(H1, H2);
    const double floor = det_floor_value(db, det_floor_rel);
    NodeMask mask(g.size(), 1);
    VectorField2 G(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double d = H1.cx[k] * H2.cy[k] - H1.cy[k] * H2.cx[k];
        if (std::abs(d) < floor || d == 0.0) {
            mask[k] = 0;
            continue;
        }
        // H^{-T} = (1/det) [[h22, -h21], [-h12, h11]]^T applied to (c1, c2)
        const double h11 = H1.cx[k], h21 = H1.cy[k];
        const double h12 = H2.cx[k], h22 = H2.cy[k];
        const double v1 = (h22 * c1.values[k] - h21 * c2.values[k]) / d;
        const double v2 = (-h12 * c1.values[k] + h11 * c2.values[k]) / d;
        // gamma_tilde v
        const double x = xi.values[k], z = zeta.values[k];
        const double t1 = x * v1 + z * v2;
        const double t2 = z * v1 + (1.0 + z * z) / x * v2;
        // -J t with J = [[0,-1],[1,0]]
        G.cx[k] = -(-t2);
        G.cy[k] = -(t1);
    }
    if (mask_out) *mask_out = mask;
    return G;
}

/// Integrate v = log beta from its gradient: least-squares normal equations
/// (Mx^T Mx + My^T My) v = Mx^T Gx + My^T Gy with either a Dirichlet trace
/// on the boundary or a one-node anchor fixing the additive constant.
inline ScalarField2 recover_beta(const VectorField2& G, const BetaBc& bc,
                                 const NodeMask* mask = nullptr) {
    const Grid2D& g = G.grid;
    VectorField2 Gf = G;
    if (mask) {
        // Masked nodes carry no gradient information; fill from neighbors.
        ScalarField2 gx{}; gx.grid = g; gx.values = Gf.cx;
        ScalarField2 gy{}; gy.grid = g; gy.values = Gf.cy;
        detail::fill_masked(gx, *mask);
        detail::fill_masked(gy, *mask);
        Gf.cx = gx.values;
        Gf.cy = gy.values;
    }

    Eigen::SparseMatrix<double> Mx, My;
    gradient_matrices(g, Mx, My);
    const Eigen::Index n = static_cast<Eigen::Index>(g.size());
    Eigen::VectorXd gx = Eigen::Map<const Eigen::VectorXd>(Gf.cx.data(), n);
    Eigen::VectorXd gy = Eigen::Map<const Eigen::VectorXd>(Gf.cy.data(), n);
    Eigen::SparseMatrix<double> A =
        Eigen::SparseMatrix<double>(Mx.transpose()) * Mx +
        Eigen::SparseMatrix<double>(My.transpose()) * My;
    Eigen::VectorXd b = Mx.transpose() * gx + My.transpose() * gy;

    Eigen::VectorXd v;
    if (bc.mode == BetaBcMode::DirichletTrace) {
        require_same_grid(g, bc.log_beta_trace.grid, "recover_beta");
        // Eliminate boundary nodes at their supplied trace values.
        std::vector<int> unk(g.size(), -1);
        std::vector<Eigen::Index> nodes;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (i > 0 && i < g.nx - 1 && j > 0 && j < g.ny - 1) {
                    unk[g.idx(i, j)] = static_cast<int>(nodes.size());
                    nodes.push_back(static_cast<Eigen::Index>(g.idx(i, j)));
                }
        Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (unk[g.idx(i, j)] < 0)
                    fixed[static_cast<Eigen::Index>(g.idx(i, j))] =
                        bc.log_beta_trace.values[g.idx(i, j)];
        Eigen::VectorXd b2 = b - A * fixed;
        const Eigen::Index m = static_cast<Eigen::Index>(nodes.size());
        std::vector<Eigen::Triplet<double>> trip;
        for (Eigen::Index c = 0; c < A.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
                const int r2 = unk[it.row()], c2 = unk[it.col()];
                if (r2 >= 0 && c2 >= 0) trip.emplace_back(r2, c2, it.value());
            }
        Eigen::SparseMatrix<double> Ai(m, m);
        Ai.setFromTriplets(trip.begin(), trip.end());
        Eigen::VectorXd bi(m);
        for (Eigen::Index r = 0; r < m; ++r) bi[r] = b2[nodes[r]];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Ai);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("recover_beta: factorization failed");
        Eigen::VectorXd vi = ldlt.solve(bi);
        v = fixed;
        for (Eigen::Index r = 0; r < m; ++r) v[nodes[r]] = vi[r];
    } else {
        const int ia = static_cast<int>(std::lround((bc.anchor_x - g.ox) / g.h));
        const int ja = static_cast<int>(std::lround((bc.anchor_y - g.oy) / g.h));
        if (ia < 0 || ia >= g.nx || ja < 0 || ja >= g.ny)
            throw std::out_of_range("recover_beta: anchor outside grid");
        const Eigen::Index ka = static_cast<Eigen::Index>(g.idx(ia, ja));
        // A is singular on constants; a rank-one anchor term makes it SPD.
        std::vector<Eigen::Triplet<double>> trip;
        trip.emplace_back(static_cast<int>(ka), static_cast<int>(ka), 1.0);
        Eigen::SparseMatrix<double> E(n, n);
        E.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseMatrix<double> Aa = A + E;
        Eigen::VectorXd ba = b;
        ba[ka] += bc.anchor_value;
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Aa);
        if (ldlt.info() != Eigen::Success)
            throw std::runtime_error("recover_beta: factorization failed");
        v = ldlt.solve(ba);
        v.array() += bc.anchor_value - v[ka];
    }

    ScalarField2 beta(g);
    for (std::size_t k = 0; k < g.size(); ++k) beta.values[k] = std::exp(v[k]);
    return beta;
}

/// Low-pass the measurement components with `passes` sweeps of the 5-point
/// sliding average. Leaves the provenance metadata untouched.
inline MeasurementSet presmooth_measurements(MeasurementSet ms, int passes) {
    if (passes <= 0) return ms;
    for (auto& H : ms.H) {
        ScalarField2 cx(ms.grid), cy(ms.grid);
        cx.values = H.cx;
        cy.values = H.cy;
        H.cx = sliding_average_extrapolated(cx, passes).values;
        H.cy = sliding_average_extrapolated(cy, passes).values;
    }
    return ms;
}

/// Two-step full reconstruction: averaged anisotropy (regularized), then the
/// isotropic scale through the gradient formula and the Poisson-type
/// integration (regularized on log beta).
inline ReconResult reconstruct_full(const MeasurementSet& ms_in, const ReconOptions& opts) {
    if (ms_in.H.size() < 4)
        throw std::invalid_argument("reconstruct_full: need at least 4 measurements");
    const MeasurementSet ms = presmooth_measurements(ms_in, opts.presmooth_passes);
    const Grid2D& g = ms.grid;
    const auto& H1 = ms.H.at(opts.basis.i1);
    const auto& H2 = ms.H.at(opts.basis.i2);

    ReconResult res;
    std::vector<ConstraintPair> pairs;
    ScalarField2 xi, zeta;
    AnisotropyResult aniso;
    if (opts.use_known_anisotropy) {
        xi = opts.known_xi;
        zeta = opts.known_zeta;
        aniso.valid.assign(g.size(), 1);
    } else {
        aniso = tilde_gamma_averaged(ms, opts, &pairs);
        detail::fill_masked(aniso.xi, aniso.valid);
        detail::fill_masked(aniso.zeta, aniso.valid);
        xi = denoise(aniso.xi, opts.reg_xi);
        zeta = denoise(aniso.zeta, opts.reg_zeta);
        // Denoising can push xi near zero; keep the tensor elliptic.
        for (auto& v : xi.values) v = std::max(v, 1e-6);
    }

    NodeMask beta_mask;
    VectorField2 G = log_beta_gradient(H1, H2, xi, zeta, opts.det_floor_rel, &beta_mask);
    ScalarField2 beta = recover_beta(G, opts.beta_bc, &beta_mask);

    ScalarField2 logb(g);
    for (std::size_t k = 0; k < g.size(); ++k) logb.values[k] = std::log(beta.values[k]);
    logb = denoise(logb, opts.reg_logbeta);
    for (std::size_t k = 0; k < g.size(); ++k) beta.values[k] = std::exp(logb.values[k]);

    res.xi = std::move(xi);
    res.zeta = std::move(zeta);
    res.beta = std::move(beta);
    res.mask = aniso.valid;
    for (std::size_t k = 0; k < g.size(); ++k)
        if (!beta_mask[k]) res.mask[k] = 0;

    ReconReport& rep = res.diagnostics;
    rep.det_basis_field = det_basis_field(H1, H2);
    rep.min_det_basis = *std::min_element(rep.det_basis_field.values.begin(),
                                          rep.det_basis_field.values.end());
    if (!pairs.empty()) {
        rep.independence_field = independence_field(pairs.front().M1, pairs.front().M2);
        rep.max_independence = *std::max_element(rep.independence_field.values.begin(),
                                                 rep.independence_field.values.end());
    }
    std::size_t masked = 0;
    for (auto m : res.mask)
        if (!m) ++masked;
    rep.masked_fraction = static_cast<double>(masked) / g.size();
    return res;
}

}  // namespace cdii
