#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cdii/grid.hpp"

namespace cdii {

namespace detail {

// d/dx along a row/column of samples: centered interior, one-sided
// second-order at the two ends.
inline double deriv1d(double fm, double f0, double fp, double h, int side) {
    if (side == 0) return (fp - fm) / (2.0 * h);
    if (side < 0) return (-3.0 * f0 + 4.0 * fm + -1.0 * fp) / (2.0 * h);  // fm=f1, fp=f2
    return (3.0 * f0 - 4.0 * fm + fp) / (2.0 * h);  // fm=f_{n-2}, fp=f_{n-3}
}

}  // namespace detail

/// Discrete d/dx of node samples, second order everywhere.
inline ScalarField2 ddx(const ScalarField2& f) {
    const Grid2D& g = f.grid;
    ScalarField2 out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double d;
            if (i == 0)
                d = detail::deriv1d(f.at(1, j), f.at(0, j), f.at(2, j), g.h, -1);
            else if (i == g.nx - 1)
                d = detail::deriv1d(f.at(i - 1, j), f.at(i, j), f.at(i - 2, j), g.h, +1);
            else
                d = detail::deriv1d(f.at(i - 1, j), f.at(i, j), f.at(i + 1, j), g.h, 0);
            out.at(i, j) = d;
        }
    }
    return out;
}

/// Discrete d/dy of node samples, second order everywhere.
inline ScalarField2 ddy(const ScalarField2& f) {
    const Grid2D& g = f.grid;
    ScalarField2 out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double d;
            if (j == 0)
                d = detail::deriv1d(f.at(i, 1), f.at(i, 0), f.at(i, 2), g.h, -1);
            else if (j == g.ny - 1)
                d = detail::deriv1d(f.at(i, j - 1), f.at(i, j), f.at(i, j - 2), g.h, +1);
            else
                d = detail::deriv1d(f.at(i, j - 1), f.at(i, j), f.at(i, j + 1), g.h, 0);
            out.at(i, j) = d;
        }
    }
    return out;
}

inline VectorField2 gradient(const ScalarField2& f) {
    VectorField2 out(f.grid);
    out.cx = ddx(f).values;
    out.cy = ddy(f).values;
    return out;
}

inline ScalarField2 divergence(const VectorField2& F) {
    ScalarField2 fx{};
    fx.grid = F.grid;
    fx.values = F.cx;
    ScalarField2 fy{};
    fy.grid = F.grid;
    fy.values = F.cy;
    ScalarField2 dx = ddx(fx);
    ScalarField2 dy = ddy(fy);
    ScalarField2 out(F.grid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = dx.values[k] + dy.values[k];
    return out;
}

/// Scalar curl in 2D: curl2(F) = d(F_y)/dx - d(F_x)/dy.
inline ScalarField2 curl2(const VectorField2& F) {
    ScalarField2 fx{};
    fx.grid = F.grid;
    fx.values = F.cx;
    ScalarField2 fy{};
    fy.grid = F.grid;
    fy.values = F.cy;
    ScalarField2 dyx = ddx(fy);
    ScalarField2 dxy = ddy(fx);
    ScalarField2 out(F.grid);
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = dyx.values[k] - dxy.values[k];
    return out;
}

/// 5-point sliding average: each pass replaces a node by the mean of itself
/// and its existing axis neighbors (3 or 4 members at edges and corners).
inline ScalarField2 sliding_average(const ScalarField2& f, int passes) {
    if (passes < 0) throw std::invalid_argument("sliding_average: passes < 0");
    const Grid2D& g = f.grid;
    ScalarField2 cur = f;
    ScalarField2 next(g);
    for (int p = 0; p < passes; ++p) {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                double sum = cur.at(i, j);
                int n = 1;
                if (i > 0) { sum += cur.at(i - 1, j); ++n; }
                if (i < g.nx - 1) { sum += cur.at(i + 1, j); ++n; }
                if (j > 0) { sum += cur.at(i, j - 1); ++n; }
                if (j < g.ny - 1) { sum += cur.at(i, j + 1); ++n; }
                next.at(i, j) = sum / n;
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

/// 5-point sliding average with linearly extrapolated ghost nodes outside
/// the domain (ghost = 2 f_edge - f_inner). Unlike the shrunken-neighborhood
/// rule, each pass reproduces affine fields exactly at the edges, so
/// repeated passes do not drag boundary values toward the interior. Used to
/// low-pass data whose smooth component must stay unbiased.
inline ScalarField2 sliding_average_extrapolated(const ScalarField2& f, int passes) {
    if (passes < 0) throw std::invalid_argument("sliding_average_extrapolated: passes < 0");
    const Grid2D& g = f.grid;
    ScalarField2 cur = f;
    ScalarField2 next(g);
    auto ghosted = [&](int i, int j) {
        const int ic = std::clamp(i, 0, g.nx - 1);
        const int jc = std::clamp(j, 0, g.ny - 1);
        if (ic == i && jc == j) return cur.at(i, j);
        // reflect the index through the edge: value = 2 f_edge - f_mirror
        const int im = std::clamp(2 * ic - i, 0, g.nx - 1);
        const int jm = std::clamp(2 * jc - j, 0, g.ny - 1);
        return 2.0 * cur.at(ic, jc) - cur.at(im, jm);
    };
    for (int p = 0; p < passes; ++p) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                next.at(i, j) = (cur.at(i, j) + ghosted(i - 1, j) + ghosted(i + 1, j) +
                                 ghosted(i, j - 1) + ghosted(i, j + 1)) /
                                5.0;
        std::swap(cur, next);
    }
    return cur;
}

enum class Axis { X, Y };

/// Field restricted to the grid line nearest `coordinate`. Returns
/// (abscissa, value) pairs along the other axis.
inline std::vector<std::pair<double, double>>
cross_section(const ScalarField2& f, Axis axis, double coordinate) {
    const Grid2D& g = f.grid;
    std::vector<std::pair<double, double>> out;
    if (axis == Axis::Y) {  // section along a line y = const
        if (coordinate < g.oy - g.h / 2 || coordinate > g.ymax() + g.h / 2)
            throw std::out_of_range("cross_section: coordinate outside domain");
        int j = static_cast<int>(std::lround((coordinate - g.oy) / g.h));
        j = std::max(0, std::min(g.ny - 1, j));
        out.reserve(g.nx);
        for (int i = 0; i < g.nx; ++i) out.emplace_back(g.x(i), f.at(i, j));
    } else {  // line x = const
        if (coordinate < g.ox - g.h / 2 || coordinate > g.xmax() + g.h / 2)
            throw std::out_of_range("cross_section: coordinate outside domain");
        int i = static_cast<int>(std::lround((coordinate - g.ox) / g.h));
        i = std::max(0, std::min(g.nx - 1, i));
        out.reserve(g.ny);
        for (int j = 0; j < g.ny; ++j) out.emplace_back(g.y(j), f.at(i, j));
    }
    return out;
}

}  // namespace cdii
