#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdii/grid.hpp"
#include "cdii/ops.hpp"

namespace cdii {

enum class EdgeKind { Dirichlet, Neumann };

/// One edge of the rectangle: Dirichlet trace values of u, or co-normal flux
/// values (gamma grad u) . n, sampled at the edge nodes.
struct EdgeCondition {
    EdgeKind kind = EdgeKind::Dirichlet;
    std::vector<double> profile;

    static EdgeCondition dirichlet(std::vector<double> values) {
        return {EdgeKind::Dirichlet, std::move(values)};
    }
    static EdgeCondition neumann(std::vector<double> values) {
        return {EdgeKind::Neumann, std::move(values)};
    }
};

enum class Edge { Bottom, Top, Left, Right };

struct BoundarySpec {
    EdgeCondition bottom, top, left, right;

    const EdgeCondition& edge(Edge e) const {
        switch (e) {
            case Edge::Bottom: return bottom;
            case Edge::Top: return top;
            case Edge::Left: return left;
            case Edge::Right: return right;
        }
        throw std::logic_error("unreachable");
    }

    bool any_dirichlet() const {
        return bottom.kind == EdgeKind::Dirichlet || top.kind == EdgeKind::Dirichlet ||
               left.kind == EdgeKind::Dirichlet || right.kind == EdgeKind::Dirichlet;
    }

    /// All-edge Dirichlet trace of a function g(x,y).
    static BoundarySpec dirichlet_trace(const Grid2D& g,
                                        const std::function<double(double, double)>& fn) {
        BoundarySpec bc;
        std::vector<double> bot(g.nx), top(g.nx), lef(g.ny), rig(g.ny);
        for (int i = 0; i < g.nx; ++i) {
            bot[i] = fn(g.x(i), g.oy);
            top[i] = fn(g.x(i), g.ymax());
        }
        for (int j = 0; j < g.ny; ++j) {
            lef[j] = fn(g.ox, g.y(j));
            rig[j] = fn(g.xmax(), g.y(j));
        }
        bc.bottom = EdgeCondition::dirichlet(std::move(bot));
        bc.top = EdgeCondition::dirichlet(std::move(top));
        bc.left = EdgeCondition::dirichlet(std::move(lef));
        bc.right = EdgeCondition::dirichlet(std::move(rig));
        return bc;
    }

    void validate(const Grid2D& g) const {
        if (static_cast<int>(bottom.profile.size()) != g.nx ||
            static_cast<int>(top.profile.size()) != g.nx ||
            static_cast<int>(left.profile.size()) != g.ny ||
            static_cast<int>(right.profile.size()) != g.ny)
            throw std::invalid_argument("BoundarySpec: profile length mismatch");
        if (!any_dirichlet())
            throw std::invalid_argument(
                "BoundarySpec: all-Neumann problems are rejected (nullspace)");
    }
};

enum class SolveMethod { Direct, Iterative };

struct SolverOptions {
    SolveMethod method = SolveMethod::Direct;
    double tol = 1e-10;
    int max_iter = 10000;
    bool ellipticity_check = true;
    double kappa_bound = 1e6;
};

namespace detail {

// Dirichlet ownership at corners: bottom/top edges win over left/right,
// so an illuminated bottom edge includes its corner nodes.
inline bool node_is_dirichlet(const Grid2D& g, const BoundarySpec& bc, int i, int j,
                              double* value) {
    auto take = [&](const EdgeCondition& e, int k) {
        if (e.kind != EdgeKind::Dirichlet) return false;
        if (value) *value = e.profile[k];
        return true;
    };
    if (j == 0 && take(bc.bottom, i)) return true;
    if (j == g.ny - 1 && take(bc.top, i)) return true;
    if (i == 0 && take(bc.left, j)) return true;
    if (i == g.nx - 1 && take(bc.right, j)) return true;
    return false;
}

struct GammaAt {
    const SymTensor2Field* gamma;
    const Grid2D* g;
    void operator()(int i, int j, double& a, double& b, double& c) const {
        gamma->entries(g->idx(i, j), a, b, c);
    }
};

}  // namespace detail

/// Assembled sparse system over the non-Dirichlet nodes.
struct AssembledSystem {
    Grid2D grid;
    Eigen::SparseMatrix<double> A;
    Eigen::VectorXd rhs;
    std::vector<int> unknown_of_node;  // -1 for Dirichlet nodes
    std::vector<std::size_t> node_of_unknown;
    std::vector<double> dirichlet_value;  // valid where unknown_of_node == -1
};

/// Discretize div(gamma grad u) = source with the 9-point conservative
/// stencil: edge-midpoint fluxes with arithmetic-mean coefficients for the
/// aligned terms, averaged corner differences for the mixed term. Dirichlet
/// values are eliminated into the right-hand side; Neumann edge rows
/// discretize the co-normal flux to first order.
inline AssembledSystem assemble(const Grid2D& grid, const SymTensor2Field& gamma,
                                const BoundarySpec& bc,
                                const SolverOptions& opts = {},
                                const ScalarField2* source = nullptr) {
    require_same_grid(grid, gamma.grid(), "assemble");
    bc.validate(grid);
    if (opts.ellipticity_check) {
        const double kappa = gamma.ellipticity_kappa();
        if (!(kappa <= opts.kappa_bound)) {
            double lmin, lmax;
            gamma.eigen_bounds(lmin, lmax);
            throw std::domain_error(
                "assemble: ellipticity violated, kappa=" + std::to_string(kappa) +
                " (eigenvalue bounds [" + std::to_string(lmin) + ", " +
                std::to_string(lmax) + "])");
        }
    }

    const int nx = grid.nx, ny = grid.ny;
    const double h = grid.h;
    AssembledSystem sys;
    sys.grid = grid;
    sys.unknown_of_node.assign(grid.size(), -1);
    sys.dirichlet_value.assign(grid.size(), 0.0);

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double v;
            if (detail::node_is_dirichlet(grid, bc, i, j, &v)) {
                sys.dirichlet_value[grid.idx(i, j)] = v;
            } else {
                sys.unknown_of_node[grid.idx(i, j)] = static_cast<int>(sys.node_of_unknown.size());
                sys.node_of_unknown.push_back(grid.idx(i, j));
            }
        }

    const int n = static_cast<int>(sys.node_of_unknown.size());
    sys.A.resize(n, n);
    sys.rhs = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 9);

    detail::GammaAt gam{&gamma, &grid};
    auto add = [&](int row, int i, int j, double coef) {
        const std::size_t k = grid.idx(i, j);
        const int col = sys.unknown_of_node[k];
        if (col >= 0)
            trip.emplace_back(row, col, coef);
        else
            sys.rhs[row] -= coef * sys.dirichlet_value[k];
    };

    for (int row = 0; row < n; ++row) {
        const std::size_t k = sys.node_of_unknown[row];
        const int i = static_cast<int>(k % nx);
        const int j = static_cast<int>(k / nx);
        const bool interior = (i > 0 && i < nx - 1 && j > 0 && j < ny - 1);

        if (interior) {
            double a0, b0, c0, aE, bE, cE, aW, bW, cW, aN, bN, cN, aS, bS, cS;
            gam(i, j, a0, b0, c0);
            gam(i + 1, j, aE, bE, cE);
            gam(i - 1, j, aW, bW, cW);
            gam(i, j + 1, aN, bN, cN);
            gam(i, j - 1, aS, bS, cS);
            const double h2 = h * h;
            // d/dx(a du/dx) + d/dy(c du/dy), midpoint fluxes
            const double ae = 0.5 * (a0 + aE), aw = 0.5 * (a0 + aW);
            const double cn = 0.5 * (c0 + cN), cs = 0.5 * (c0 + cS);
            add(row, i + 1, j, ae / h2);
            add(row, i - 1, j, aw / h2);
            add(row, i, j + 1, cn / h2);
            add(row, i, j - 1, cs / h2);
            add(row, i, j, -(ae + aw + cn + cs) / h2);
            // d/dx(b du/dy): centered in x of (b du/dy) at i+-1
            const double q = 1.0 / (4.0 * h2);
            add(row, i + 1, j + 1, bE * q);
            add(row, i + 1, j - 1, -bE * q);
            add(row, i - 1, j + 1, -bW * q);
            add(row, i - 1, j - 1, bW * q);
            // d/dy(b du/dx): centered in y of (b du/dx) at j+-1
            add(row, i + 1, j + 1, bN * q);
            add(row, i - 1, j + 1, -bN * q);
            add(row, i + 1, j - 1, -bS * q);
            add(row, i - 1, j - 1, bS * q);
            if (source) sys.rhs[row] += source->values[k];
            continue;
        }

        // Neumann edge node: co-normal flux row, first order in the normal
        // direction, centered tangentially (one-sided at corners).
        double a0, b0, c0;
        gam(i, j, a0, b0, c0);
        double flux_value = 0.0;
        // normal direction and tangential stencil per owning edge; corners
        // between two Neumann edges use the vertical edge's row.
        Edge owner;
        if (j == 0 && bc.bottom.kind == EdgeKind::Neumann &&
            (i > 0 && i < nx - 1)) {
            owner = Edge::Bottom;
        } else if (j == ny - 1 && bc.top.kind == EdgeKind::Neumann &&
                   (i > 0 && i < nx - 1)) {
            owner = Edge::Top;
        } else if (i == 0) {
            owner = Edge::Left;
        } else if (i == nx - 1) {
            owner = Edge::Right;
        } else if (j == 0) {
            owner = Edge::Bottom;
        } else {
            owner = Edge::Top;
        }

        switch (owner) {
            case Edge::Bottom: {
                flux_value = bc.bottom.profile[i];
                // n = (0,-1): flux = -(b du/dx + c du/dy)
                // scale tangential terms by -b, normal by -c
                // normal derivative first order: (u(i,1)-u(i,0))/h
                add(row, i, 0, c0 / h);
                add(row, i, 1, -c0 / h);
                if (i > 0 && i < nx - 1) {
                    add(row, i + 1, 0, -b0 / (2 * h));
                    add(row, i - 1, 0, b0 / (2 * h));
                }
                break;
            }
            case Edge::Top: {
                flux_value = bc.top.profile[i];
                // n = (0, 1): flux = b du/dx + c du/dy
                add(row, i, ny - 1, c0 / h);
                add(row, i, ny - 2, -c0 / h);
                if (i > 0 && i < nx - 1) {
                    add(row, i + 1, ny - 1, b0 / (2 * h));
                    add(row, i - 1, ny - 1, -b0 / (2 * h));
                }
                break;
            }
            case Edge::Left: {
                flux_value = bc.left.profile[j];
                // n = (-1, 0): flux = -(a du/dx + b du/dy)
                add(row, 0, j, a0 / h);
                add(row, 1, j, -a0 / h);
                if (b0 != 0.0) {
                    const double s = -b0;
                    if (j > 0 && j < ny - 1) {
                        add(row, 0, j + 1, s / (2 * h));
                        add(row, 0, j - 1, -s / (2 * h));
                    } else if (j == 0) {
                        add(row, 0, 0, -s / h);
                        add(row, 0, 1, s / h);
                    } else {
                        add(row, 0, ny - 1, s / h);
                        add(row, 0, ny - 2, -s / h);
                    }
                }
                break;
            }
            case Edge::Right: {
                flux_value = bc.right.profile[j];
                // n = (1, 0): flux = a du/dx + b du/dy
                add(row, nx - 1, j, a0 / h);
                add(row, nx - 2, j, -a0 / h);
                if (b0 != 0.0) {
                    if (j > 0 && j < ny - 1) {
                        add(row, nx - 1, j + 1, b0 / (2 * h));
                        add(row, nx - 1, j - 1, -b0 / (2 * h));
                    } else if (j == 0) {
                        add(row, nx - 1, 0, -b0 / h);
                        add(row, nx - 1, 1, b0 / h);
                    } else {
                        add(row, nx - 1, ny - 1, b0 / h);
                        add(row, nx - 1, ny - 2, -b0 / h);
                    }
                }
                break;
            }
        }
        sys.rhs[row] += flux_value;
    }

    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.A.makeCompressed();
    return sys;
}

/// Apply the interior stencil of div(gamma grad u) - source to a full field
/// sample; returns the residual at interior nodes (0 at boundary rows).
inline ScalarField2 interior_residual(const SymTensor2Field& gamma, const ScalarField2& u,
                                      const ScalarField2* source = nullptr) {
    const Grid2D& g = u.grid;
    require_same_grid(g, gamma.grid(), "interior_residual");
    ScalarField2 r(g);
    const double h2 = g.h * g.h;
    detail::GammaAt gam{&gamma, &g};
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            double a0, b0, c0, aE, bE, cE, aW, bW, cW, aN, bN, cN, aS, bS, cS;
            gam(i, j, a0, b0, c0);
            gam(i + 1, j, aE, bE, cE);
            gam(i - 1, j, aW, bW, cW);
            gam(i, j + 1, aN, bN, cN);
            gam(i, j - 1, aS, bS, cS);
            const double ae = 0.5 * (a0 + aE), aw = 0.5 * (a0 + aW);
            const double cn = 0.5 * (c0 + cN), cs = 0.5 * (c0 + cS);
            double v = (ae * (u.at(i + 1, j) - u.at(i, j)) -
                        aw * (u.at(i, j) - u.at(i - 1, j)) +
                        cn * (u.at(i, j + 1) - u.at(i, j)) -
                        cs * (u.at(i, j) - u.at(i, j - 1))) / h2;
            v += (bE * (u.at(i + 1, j + 1) - u.at(i + 1, j - 1)) -
                  bW * (u.at(i - 1, j + 1) - u.at(i - 1, j - 1))) / (4.0 * h2);
            v += (bN * (u.at(i + 1, j + 1) - u.at(i - 1, j + 1)) -
                  bS * (u.at(i + 1, j - 1) - u.at(i - 1, j - 1))) / (4.0 * h2);
            if (source) v -= source->values[g.idx(i, j)];
            r.at(i, j) = v;
        }
    return r;
}

/// Solve div(gamma grad u) = source under the given boundary conditions.
inline ScalarField2 solve_conductivity(const Grid2D& grid, const SymTensor2Field& gamma,
                                       const BoundarySpec& bc, const SolverOptions& opts = {},
                                       const ScalarField2* source = nullptr) {
    AssembledSystem sys = assemble(grid, gamma, bc, opts, source);
    Eigen::VectorXd x;
    if (opts.method == SolveMethod::Direct) {
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.analyzePattern(sys.A);
        lu.factorize(sys.A);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("solve_conductivity: singular system (LU factorization failed)");
        x = lu.solve(sys.rhs);
    } else {
        Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::DiagonalPreconditioner<double>> it;
        it.setTolerance(opts.tol);
        it.setMaxIterations(opts.max_iter);
        it.compute(sys.A);
        x = it.solve(sys.rhs);
        if (it.info() != Eigen::Success)
            throw std::runtime_error(
                "solve_conductivity: iterative solver did not converge, residual " +
                std::to_string(it.error()) + " after " + std::to_string(it.iterations()) +
                " iterations");
    }

    ScalarField2 u(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const int col = sys.unknown_of_node[k];
        u.values[k] = (col >= 0) ? x[col] : sys.dirichlet_value[k];
    }
    return u;
}

/// Current density H = gamma * grad(u), evaluated nodewise.
inline VectorField2 flux(const SymTensor2Field& gamma, const ScalarField2& u) {
    require_same_grid(gamma.grid(), u.grid, "flux");
    VectorField2 gu = gradient(u);
    VectorField2 H(u.grid);
    for (std::size_t k = 0; k < u.grid.size(); ++k) {
        double g11, g12, g22;
        gamma.entries(k, g11, g12, g22);
        H.cx[k] = g11 * gu.cx[k] + g12 * gu.cy[k];
        H.cy[k] = g12 * gu.cx[k] + g22 * gu.cy[k];
    }
    return H;
}

}  // namespace cdii
