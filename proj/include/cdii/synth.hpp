#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdii/forward.hpp"
#include "cdii/grid.hpp"
#include "cdii/io.hpp"
#include "cdii/ops.hpp"
#include "cdii/rng.hpp"

namespace cdii {

enum class PhantomName { Exp1Smooth, Exp2Checker, Exp3Piecewise };

inline PhantomName phantom_from_string(const std::string& s) {
    if (s == "exp1_smooth") return PhantomName::Exp1Smooth;
    if (s == "exp2_checker") return PhantomName::Exp2Checker;
    if (s == "exp3_piecewise") return PhantomName::Exp3Piecewise;
    throw std::invalid_argument("unknown phantom '" + s + "'");
}

namespace detail {

inline double exp1_xi(double x, double y) {
    return 2.0 + std::sin(M_PI * x) * std::sin(M_PI * y);
}
inline double exp1_zeta(double x, double /*y*/) { return 0.5 * std::sin(2.0 * M_PI * x); }
inline double exp1_beta(double x, double y) {
    auto bump = [](double dx, double dy) { return std::exp(-15.0 * (dx * dx + dy * dy)); };
    return 1.8 + bump(x, y) + bump(x - 0.6, y - 0.5) - bump(x + 0.4, y + 0.6);
}

struct Block {
    double xlo, xhi, ylo, yhi;
    double beta;
    bool contains(double x, double y) const {
        return x >= xlo && x < xhi && y >= ylo && y < yhi;
    }
};

/// Random {1,3}-valued blocks of the checkerboard phantom; block draws are
/// made in a fixed order so the field is reproducible from the seed.
inline std::vector<Block> exp2_blocks(std::uint64_t seed) {
    SplitMix64 rng(derive_stream(seed, 0x626c6f636bULL));
    std::vector<Block> blocks;
    auto draw = [&]() {
        const double r = rng.uniform_pm1();
        const double s = (r >= 0.0) ? 1.0 : -1.0;  // sign(0) fixed as +1
        return 1.0 + (s + 1.0);
    };
    for (int i = 1; i <= 10; ++i)
        for (int j = 1; j <= 10; ++j)
            blocks.push_back({0.1 * (i - 1) - 0.4, 0.1 * i - 0.4,
                              0.1 * (j - 1) - 0.4, 0.1 * j - 0.4, draw()});
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 5; ++j)
            blocks.push_back({0.1 * (i - 1) - 1.0, 0.1 * i - 1.0,
                              0.1 * (j - 1) - 0.4, 0.1 * j - 0.4, draw()});
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 5; ++j)
            blocks.push_back({0.1 * (i - 1) + 0.7, 0.1 * i + 0.7,
                              0.1 * (j - 1) - 0.8, 0.1 * j - 0.8, draw()});
    return blocks;
}

}  // namespace detail

/// Evaluate a named phantom conductivity on the grid.
inline SymTensor2Field make_phantom(PhantomName name, const Grid2D& grid,
                                    std::uint64_t seed = 0) {
    SymTensor2Field gamma(grid);
    switch (name) {
        case PhantomName::Exp1Smooth: {
            gamma.xi = ScalarField2::sample(grid, detail::exp1_xi);
            gamma.zeta = ScalarField2::sample(grid, detail::exp1_zeta);
            gamma.beta = ScalarField2::sample(grid, detail::exp1_beta);
            break;
        }
        case PhantomName::Exp2Checker: {
            gamma.xi = ScalarField2::sample(grid, detail::exp1_xi);
            gamma.zeta = ScalarField2::sample(grid, detail::exp1_zeta);
            const auto blocks = detail::exp2_blocks(seed);
            gamma.beta = ScalarField2::sample(grid, [&](double x, double y) {
                for (const auto& b : blocks)
                    if (b.contains(x, y)) return b.beta;
                return 1.0;
            });
            break;
        }
        case PhantomName::Exp3Piecewise: {
            gamma.xi = ScalarField2::sample(grid, [](double x, double y) {
                const double dx = x + 0.3, dy = y - 0.3;
                return (dx * dx + dy * dy < 0.35 * 0.35) ? 1.5 : 2.5;
            });
            gamma.zeta = ScalarField2::sample(grid, [](double x, double y) {
                return (y > x) ? 0.2 : -0.4;
            });
            gamma.beta = ScalarField2::sample(grid, [](double x, double y) {
                return (x >= 0.0 && x <= 0.6 && y >= 0.0 && y <= 0.6) ? 2.5 : 1.0;
            });
            break;
        }
    }
    gamma.check_valid();
    return gamma;
}

struct IlluminationSet {
    std::vector<BoundarySpec> specs;
    std::vector<std::string> labels;
};

enum class IlluminationKind {
    Poly5,
    GaussBottomSmall,
    GaussBottomExtended,
    GaussBottomNeumann,
};

inline IlluminationKind illumination_from_string(const std::string& s) {
    if (s == "poly5") return IlluminationKind::Poly5;
    if (s == "gauss_bottom_small") return IlluminationKind::GaussBottomSmall;
    if (s == "gauss_bottom_extended") return IlluminationKind::GaussBottomExtended;
    if (s == "gauss_bottom_neumann") return IlluminationKind::GaussBottomNeumann;
    throw std::invalid_argument("unknown illumination kind '" + s + "'");
}

inline double gaussian_profile(double x, double center_param) {
    const double s2 = 0.2 * 0.2;
    return std::exp(-(x + center_param) * (x + center_param) / (2.0 * s2)) /
           std::sqrt(2.0 * M_PI * s2);
}

inline IlluminationSet make_illuminations(IlluminationKind kind, const Grid2D& grid) {
    IlluminationSet set;
    switch (kind) {
        case IlluminationKind::Poly5: {
            const std::vector<std::function<double(double, double)>> gs = {
                [](double x, double y) { return x + y; },
                [](double /*x*/, double y) { return y + 0.1 * y * y; },
                [](double x, double y) { return 3 * x * x + 2 * y * y; },
                [](double x, double y) { return x * x - 0.5 * y * y; },
                [](double x, double y) { return x * y; },
            };
            for (std::size_t i = 0; i < gs.size(); ++i) {
                set.specs.push_back(BoundarySpec::dirichlet_trace(grid, gs[i]));
                set.labels.push_back("g" + std::to_string(i + 1));
            }
            break;
        }
        case IlluminationKind::GaussBottomSmall:
        case IlluminationKind::GaussBottomExtended:
        case IlluminationKind::GaussBottomNeumann: {
            const std::vector<double> centers =
                (kind == IlluminationKind::GaussBottomSmall)
                    ? std::vector<double>{-0.8, -0.4, 0.0, 0.4, 0.8}
                    : std::vector<double>{-2.8, -1.5, 0.0, 1.5, 2.8};
            const bool neumann = (kind == IlluminationKind::GaussBottomNeumann);
            for (std::size_t i = 0; i < centers.size(); ++i) {
                BoundarySpec bc;
                std::vector<double> bot(grid.nx);
                for (int k = 0; k < grid.nx; ++k)
                    bot[k] = gaussian_profile(grid.x(k), centers[i]);
                bc.bottom = EdgeCondition::dirichlet(std::move(bot));
                const std::vector<double> zx(grid.nx, 0.0), zy(grid.ny, 0.0);
                if (neumann) {
                    bc.top = EdgeCondition::neumann(zx);
                    bc.left = EdgeCondition::neumann(zy);
                    bc.right = EdgeCondition::neumann(zy);
                } else {
                    bc.top = EdgeCondition::dirichlet(zx);
                    bc.left = EdgeCondition::dirichlet(zy);
                    bc.right = EdgeCondition::dirichlet(zy);
                }
                set.specs.push_back(std::move(bc));
                set.labels.push_back("gauss" + std::to_string(i + 1));
            }
            break;
        }
    }
    return set;
}

struct NoiseSpec {
    double alpha = 0.0;
    std::uint64_t seed = 0;
    int smoothing_passes = 1;
};

struct MeasurementSet {
    Grid2D grid;
    std::vector<VectorField2> H;
    std::vector<std::string> labels;
    bool noisy = false;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

/// H_i = gamma grad(u_i) for each illumination; marked clean.
inline MeasurementSet generate_measurements(const SymTensor2Field& gamma,
                                            const IlluminationSet& illums,
                                            const SolverOptions& opts = {}) {
    MeasurementSet ms;
    ms.grid = gamma.grid();
    for (std::size_t i = 0; i < illums.specs.size(); ++i) {
        ScalarField2 u = solve_conductivity(ms.grid, gamma, illums.specs[i], opts);
        ms.H.push_back(flux(gamma, u));
        ms.labels.push_back(i < illums.labels.size() ? illums.labels[i]
                                                     : "g" + std::to_string(i + 1));
    }
    return ms;
}

/// Multiplicative noise per component: H~ = H .* (1 + alpha * r), where r is
/// an i.i.d. uniform[-1,1] node field smoothed by the 5-point sliding
/// average. Each (measurement, component) pair uses its own RNG stream.
inline MeasurementSet add_noise(const MeasurementSet& clean, const NoiseSpec& spec) {
    if (spec.alpha < 0.0) throw std::invalid_argument("add_noise: alpha < 0");
    MeasurementSet out = clean;
    out.noisy = spec.alpha > 0.0;
    out.alpha = spec.alpha;
    out.seed = spec.seed;
    if (spec.alpha == 0.0) return out;
    for (std::size_t m = 0; m < out.H.size(); ++m) {
        for (int comp = 0; comp < 2; ++comp) {
            SplitMix64 rng(derive_stream(spec.seed, m * 2 + comp));
            ScalarField2 r(out.grid);
            for (auto& v : r.values) v = rng.uniform_pm1();
            r = sliding_average(r, spec.smoothing_passes);
            std::vector<double>& c = (comp == 0) ? out.H[m].cx : out.H[m].cy;
            for (std::size_t k = 0; k < c.size(); ++k)
                c[k] *= 1.0 + spec.alpha * r.values[k];
        }
    }
    return out;
}

/// Persist a measurement set as a directory of FLD2 component files plus a
/// key=value manifest.
inline void save_measurements(const std::filesystem::path& dir, const MeasurementSet& ms) {
    std::filesystem::create_directories(dir);
    std::map<std::string, std::string> man;
    man["grid.nx"] = std::to_string(ms.grid.nx);
    man["grid.ny"] = std::to_string(ms.grid.ny);
    man["grid.h"] = fmt17(ms.grid.h);
    man["grid.ox"] = fmt17(ms.grid.ox);
    man["grid.oy"] = fmt17(ms.grid.oy);
    man["count"] = std::to_string(ms.H.size());
    man["provenance"] = ms.noisy ? "noisy" : "clean";
    if (ms.noisy) {
        man["alpha"] = fmt17(ms.alpha);
        man["seed"] = std::to_string(ms.seed);
    }
    std::string labels;
    for (std::size_t i = 0; i < ms.labels.size(); ++i) {
        if (i) labels += ",";
        labels += ms.labels[i];
    }
    man["labels"] = labels;
    write_kv(dir / "manifest", man);
    for (std::size_t i = 0; i < ms.H.size(); ++i)
        save_vector(dir / ("H_" + std::to_string(i) + ".fld"), ms.H[i]);
}

inline MeasurementSet load_measurements(const std::filesystem::path& dir) {
    auto man = read_kv(dir / "manifest");
    MeasurementSet ms;
    ms.grid = Grid2D(std::stoi(man.at("grid.nx")), std::stoi(man.at("grid.ny")),
                     std::stod(man.at("grid.h")), std::stod(man.at("grid.ox")),
                     std::stod(man.at("grid.oy")));
    const int count = std::stoi(man.at("count"));
    ms.noisy = man.at("provenance") == "noisy";
    if (ms.noisy) {
        ms.alpha = std::stod(man.at("alpha"));
        ms.seed = std::stoull(man.at("seed"));
    }
    {
        std::string labels = man.count("labels") ? man.at("labels") : "";
        std::size_t pos = 0;
        while (pos != std::string::npos && !labels.empty()) {
            auto comma = labels.find(',', pos);
            ms.labels.push_back(labels.substr(pos, comma - pos));
            pos = (comma == std::string::npos) ? comma : comma + 1;
        }
    }
    for (int i = 0; i < count; ++i) {
        VectorField2 H = load_vector(dir / ("H_" + std::to_string(i) + ".fld"));
        require_same_grid(ms.grid, H.grid, "load_measurements");
        ms.H.push_back(std::move(H));
    }
    return ms;
}

}  // namespace cdii
