#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdii {

/// Uniform rectangular grid of nodes. Node (i,j) sits at
/// (ox + i*h, oy + j*h), 0 <= i < nx, 0 <= j < ny.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double ox = 0.0;
    double oy = 0.0;

    Grid2D() = default;
    Grid2D(int nx_, int ny_, double h_, double ox_, double oy_)
        : nx(nx_), ny(ny_), h(h_), ox(ox_), oy(oy_) {
        if (nx < 3 || ny < 3)
            throw std::invalid_argument("Grid2D: need at least 3 nodes per axis");
        if (!(h > 0.0))
            throw std::invalid_argument("Grid2D: spacing must be positive");
    }

    /// Square grid over [x0, x0+L]^2 with n cells per axis (n+1 nodes).
    static Grid2D square(int n, double x0, double length) {
        return Grid2D(n + 1, n + 1, length / n, x0, x0);
    }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double x(int i) const { return ox + i * h; }
    double y(int j) const { return oy + j * h; }
    double xmax() const { return ox + (nx - 1) * h; }
    double ymax() const { return oy + (ny - 1) * h; }

    bool same_as(const Grid2D& o, double tol = 1e-12) const {
        return nx == o.nx && ny == o.ny && std::abs(h - o.h) <= tol * h &&
               std::abs(ox - o.ox) <= tol && std::abs(oy - o.oy) <= tol;
    }
};

inline void require_same_grid(const Grid2D& a, const Grid2D& b, const char* where) {
    if (!a.same_as(b))
        throw std::invalid_argument(std::string(where) + ": grids differ");
}

/// Node-sampled scalar field, values stored row-major (row j contiguous).
struct ScalarField2 {
    Grid2D grid;
    std::vector<double> values;

    ScalarField2() = default;
    explicit ScalarField2(const Grid2D& g, double fill = 0.0)
        : grid(g), values(g.size(), fill) {}

    double& at(int i, int j) { return values[grid.idx(i, j)]; }
    double at(int i, int j) const { return values[grid.idx(i, j)]; }

    template <class F>
    static ScalarField2 sample(const Grid2D& g, F&& f) {
        ScalarField2 out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                out.at(i, j) = f(g.x(i), g.y(j));
        return out;
    }
};

struct VectorField2 {
    Grid2D grid;
    std::vector<double> cx, cy;

    VectorField2() = default;
    explicit VectorField2(const Grid2D& g)
        : grid(g), cx(g.size(), 0.0), cy(g.size(), 0.0) {}

    template <class F>
    static VectorField2 sample(const Grid2D& g, F&& f) {
        VectorField2 out(g);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                auto [vx, vy] = f(g.x(i), g.y(j));
                out.cx[g.idx(i, j)] = vx;
                out.cy[g.idx(i, j)] = vy;
            }
        return out;
    }
};

/// 2x2 matrix per node, components stored as four scalar arrays.
struct Matrix2Field {
    Grid2D grid;
    std::vector<double> a11, a12, a21, a22;

    Matrix2Field() = default;
    explicit Matrix2Field(const Grid2D& g)
        : grid(g), a11(g.size(), 0.0), a12(g.size(), 0.0),
          a21(g.size(), 0.0), a22(g.size(), 0.0) {}
};

/// Symmetric positive tensor gamma = beta * gamma_tilde with
/// gamma_tilde = [[xi, zeta], [zeta, (1+zeta^2)/xi]], det(gamma_tilde) = 1
/// by construction.
struct SymTensor2Field {
    ScalarField2 xi;
    ScalarField2 zeta;
    ScalarField2 beta;

    SymTensor2Field() = default;
    explicit SymTensor2Field(const Grid2D& g)
        : xi(g, 1.0), zeta(g, 0.0), beta(g, 1.0) {}

    const Grid2D& grid() const { return xi.grid; }

    /// Full tensor entries at linear node index k.
    void entries(std::size_t k, double& g11, double& g12, double& g22) const {
        const double x = xi.values[k];
        const double z = zeta.values[k];
        const double b = beta.values[k];
        g11 = b * x;
        g12 = b * z;
        g22 = b * (1.0 + z * z) / x;
    }

    /// Smallest/largest eigenvalue of gamma over all nodes; the ellipticity
    /// constant is kappa = max(lmax, 1/lmin).
    void eigen_bounds(double& lmin, double& lmax) const {
        lmin = std::numeric_limits<double>::infinity();
        lmax = 0.0;
        for (std::size_t k = 0; k < xi.values.size(); ++k) {
            double g11, g12, g22;
            entries(k, g11, g12, g22);
            const double tr = g11 + g22;
            const double det = g11 * g22 - g12 * g12;
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            lmin = std::min(lmin, tr / 2.0 - disc);
            lmax = std::max(lmax, tr / 2.0 + disc);
        }
    }

    double ellipticity_kappa() const {
        double lmin, lmax;
        eigen_bounds(lmin, lmax);
        if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
        return std::max(lmax, 1.0 / lmin);
    }

    void check_valid() const {
        for (std::size_t k = 0; k < xi.values.size(); ++k) {
            if (!(xi.values[k] > 0.0) || !(beta.values[k] > 0.0))
                throw std::domain_error("SymTensor2Field: xi and beta must be positive");
        }
    }
};

}  // namespace cdii
