#pragma once

#include <Eigen/Sparse>

#include "cdii/grid.hpp"

namespace cdii {

/// Sparse matrices of the discrete d/dx and d/dy used by ops.hpp (centered
/// interior, one-sided second order at edges). Rows/columns are linear node
/// indices.
inline void gradient_matrices(const Grid2D& g, Eigen::SparseMatrix<double>& Mx,
                              Eigen::SparseMatrix<double>& My) {
    const int nx = g.nx, ny = g.ny;
    const double h = g.h;
    const int n = static_cast<int>(g.size());
    std::vector<Eigen::Triplet<double>> tx, ty;
    tx.reserve(static_cast<std::size_t>(n) * 3);
    ty.reserve(static_cast<std::size_t>(n) * 3);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int r = static_cast<int>(g.idx(i, j));
            if (i == 0) {
                tx.emplace_back(r, g.idx(0, j), -1.5 / h);
                tx.emplace_back(r, g.idx(1, j), 2.0 / h);
                tx.emplace_back(r, g.idx(2, j), -0.5 / h);
            } else if (i == nx - 1) {
                tx.emplace_back(r, g.idx(nx - 1, j), 1.5 / h);
                tx.emplace_back(r, g.idx(nx - 2, j), -2.0 / h);
                tx.emplace_back(r, g.idx(nx - 3, j), 0.5 / h);
            } else {
                tx.emplace_back(r, g.idx(i + 1, j), 0.5 / h);
                tx.emplace_back(r, g.idx(i - 1, j), -0.5 / h);
            }
            if (j == 0) {
                ty.emplace_back(r, g.idx(i, 0), -1.5 / h);
                ty.emplace_back(r, g.idx(i, 1), 2.0 / h);
                ty.emplace_back(r, g.idx(i, 2), -0.5 / h);
            } else if (j == ny - 1) {
                ty.emplace_back(r, g.idx(i, ny - 1), 1.5 / h);
                ty.emplace_back(r, g.idx(i, ny - 2), -2.0 / h);
                ty.emplace_back(r, g.idx(i, ny - 3), 0.5 / h);
            } else {
                ty.emplace_back(r, g.idx(i, j + 1), 0.5 / h);
                ty.emplace_back(r, g.idx(i, j - 1), -0.5 / h);
            }
        }
    Mx.resize(n, n);
    My.resize(n, n);
    Mx.setFromTriplets(tx.begin(), tx.end());
    My.setFromTriplets(ty.begin(), ty.end());
    Mx.makeCompressed();
    My.makeCompressed();
}

}  // namespace cdii
