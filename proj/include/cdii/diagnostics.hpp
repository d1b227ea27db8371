#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cdii/grid.hpp"

namespace cdii {

/// Per-node validity mask; 1 = valid, 0 = masked by a degeneracy floor.
using NodeMask = std::vector<std::uint8_t>;

struct ReconReport {
    double min_det_basis = 0.0;
    ScalarField2 det_basis_field;
    ScalarField2 independence_field;
    double max_independence = 0.0;
    double masked_fraction = 0.0;
    std::map<std::string, double> errors;  // coefficient -> relative L2
    double anchor_error = 0.0;             // epsilon_0 at the anchor node
};

/// |det [H1, H2]| per node.
inline ScalarField2 det_basis_field(const VectorField2& H1, const VectorField2& H2) {
    require_same_grid(H1.grid, H2.grid, "det_basis_field");
    ScalarField2 out(H1.grid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = std::abs(H1.cx[k] * H2.cy[k] - H1.cy[k] * H2.cx[k]);
    return out;
}

/// Normalized inner product |M1:M2| / (||M1||_F ||M2||_F) per node; 1 means
/// linear dependence, small values mean near-orthogonality. Zero-norm nodes
/// report 1 (no independence information).
inline ScalarField2 independence_field(const Matrix2Field& M1, const Matrix2Field& M2) {
    require_same_grid(M1.grid, M2.grid, "independence_field");
    ScalarField2 out(M1.grid);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        const double dot = M1.a11[k] * M2.a11[k] + M1.a12[k] * M2.a12[k] +
                           M1.a21[k] * M2.a21[k] + M1.a22[k] * M2.a22[k];
        const double n1 = std::sqrt(M1.a11[k] * M1.a11[k] + M1.a12[k] * M1.a12[k] +
                                    M1.a21[k] * M1.a21[k] + M1.a22[k] * M1.a22[k]);
        const double n2 = std::sqrt(M2.a11[k] * M2.a11[k] + M2.a12[k] * M2.a12[k] +
                                    M2.a21[k] * M2.a21[k] + M2.a22[k] * M2.a22[k]);
        out.values[k] = (n1 > 0.0 && n2 > 0.0)
                            ? std::min(1.0, std::abs(dot) / (n1 * n2))
                            : 1.0;
    }
    return out;
}

/// ||f - f_true||_2 / ||f_true||_2 over unmasked nodes.
inline double relative_l2_error(const ScalarField2& f, const ScalarField2& f_true,
                                const NodeMask* mask = nullptr) {
    require_same_grid(f.grid, f_true.grid, "relative_l2_error");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        if (mask && !(*mask)[k]) continue;
        const double d = f.values[k] - f_true.values[k];
        num += d * d;
        den += f_true.values[k] * f_true.values[k];
    }
    if (den == 0.0) throw std::domain_error("relative_l2_error: zero-norm truth");
    return std::sqrt(num / den);
}

}  // namespace cdii
