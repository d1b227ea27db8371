#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cdii/config.hpp"
#include "cdii/diagnostics.hpp"
#include "cdii/io.hpp"
#include "cdii/recon.hpp"
#include "cdii/synth.hpp"

namespace cdii {

/// Restriction of a field to an axis-aligned subgrid whose corners are grid
/// nodes of the parent.
inline ScalarField2 restrict_field(const ScalarField2& f, const DomainSpec& sub) {
    const Grid2D& g = f.grid;
    const int i0 = static_cast<int>(std::lround((sub.ox - g.ox) / g.h));
    const int j0 = static_cast<int>(std::lround((sub.oy - g.oy) / g.h));
    const int nx2 = static_cast<int>(std::lround(sub.lx / g.h)) + 1;
    const int ny2 = static_cast<int>(std::lround(sub.ly / g.h)) + 1;
    if (i0 < 0 || j0 < 0 || i0 + nx2 > g.nx || j0 + ny2 > g.ny)
        throw std::out_of_range("restrict_field: subdomain not contained in grid");
    ScalarField2 out(Grid2D(nx2, ny2, g.h, g.ox + i0 * g.h, g.oy + j0 * g.h));
    for (int j = 0; j < ny2; ++j)
        for (int i = 0; i < nx2; ++i)
            out.at(i, j) = f.at(i0 + i, j0 + j);
    return out;
}

inline VectorField2 restrict_field(const VectorField2& F, const DomainSpec& sub) {
    ScalarField2 cx{}, cy{};
    cx.grid = cy.grid = F.grid;
    cx.values = F.cx;
    cy.values = F.cy;
    ScalarField2 rx = restrict_field(cx, sub), ry = restrict_field(cy, sub);
    VectorField2 out(rx.grid);
    out.cx = rx.values;
    out.cy = ry.values;
    return out;
}

inline NodeMask restrict_mask(const NodeMask& m, const Grid2D& g, const DomainSpec& sub) {
    ScalarField2 f(g);
    for (std::size_t k = 0; k < m.size(); ++k) f.values[k] = m[k];
    ScalarField2 r = restrict_field(f, sub);
    NodeMask out(r.values.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = r.values[k] > 0.5 ? 1 : 0;
    return out;
}

struct ExperimentOutput {
    ReconResult result;          // on the metric grid
    SymTensor2Field truth;       // on the metric grid
    MeasurementSet measurements; // as fed to the reconstruction (full grid)
    ReconReport report;
};

namespace detail {

inline void write_section_csv(const std::filesystem::path& path,
                              const std::vector<std::pair<double, double>>& series) {
    std::ofstream os(path);
    os << std::setprecision(17);
    for (const auto& [c, v] : series) os << c << ',' << v << '\n';
}

inline ScalarField2 log_beta_of(const SymTensor2Field& gamma) {
    ScalarField2 out(gamma.grid());
    for (std::size_t k = 0; k < out.values.size(); ++k)
        out.values[k] = std::log(gamma.beta.values[k]);
    return out;
}

}  // namespace detail

/// Run the configured pipeline: phantom, forward solves, optional noise,
/// reconstruction, regularization, optional restriction to X, metrics and
/// persisted artifacts. Deterministic for a fixed config.
inline ExperimentOutput run_experiment(const ExperimentConfig& cfg,
                                       bool write_files = true) {
    const Grid2D grid = cfg.make_grid();
    const SymTensor2Field gamma = make_phantom(cfg.phantom, grid, cfg.phantom_seed);
    const IlluminationSet illums = make_illuminations(cfg.illuminations, grid);

    MeasurementSet clean = generate_measurements(gamma, illums, cfg.solver);
    MeasurementSet ms = (cfg.noise.alpha > 0.0) ? add_noise(clean, cfg.noise) : clean;

    const DomainSpec X = domain_X();
    const bool restrict = cfg.restrict_to_X;

    ExperimentOutput out;
    out.measurements = ms;

    // Truth on the metric grid.
    if (restrict) {
        out.truth.xi = restrict_field(gamma.xi, X);
        out.truth.zeta = restrict_field(gamma.zeta, X);
        out.truth.beta = restrict_field(gamma.beta, X);
    } else {
        out.truth = gamma;
    }
    const Grid2D metric_grid = out.truth.grid();

    ReconOptions opts = cfg.recon;
    if (opts.beta_bc.mode == BetaBcMode::DirichletTrace) {
        opts.beta_bc.log_beta_trace = detail::log_beta_of(out.truth);
    } else {
        opts.beta_bc.anchor_x = metric_grid.ox + (metric_grid.nx - 1) / 2 * metric_grid.h;
        opts.beta_bc.anchor_y = metric_grid.oy + (metric_grid.ny - 1) / 2 * metric_grid.h;
        const int ia = (metric_grid.nx - 1) / 2, ja = (metric_grid.ny - 1) / 2;
        opts.beta_bc.anchor_value = std::log(out.truth.beta.at(ia, ja));
    }

    ReconResult res;
    if (!restrict) {
        res = reconstruct_full(ms, opts);
    } else {
        // Anisotropy on the full (extended) grid, restricted to X before
        // denoising; beta integration runs on X only.
        const MeasurementSet msr = presmooth_measurements(ms, opts.presmooth_passes);
        const auto& H1 = msr.H.at(opts.basis.i1);
        const auto& H2 = msr.H.at(opts.basis.i2);
        std::vector<ConstraintPair> pairs;
        ScalarField2 xi, zeta;
        NodeMask aniso_mask;
        if (opts.use_known_anisotropy) {
            xi = opts.known_xi;
            zeta = opts.known_zeta;
            aniso_mask.assign(metric_grid.size(), 1);
        } else {
            AnisotropyResult aniso = tilde_gamma_averaged(msr, opts, &pairs);
            cdii::detail::fill_masked(aniso.xi, aniso.valid);
            cdii::detail::fill_masked(aniso.zeta, aniso.valid);
            xi = restrict_field(aniso.xi, X);
            zeta = restrict_field(aniso.zeta, X);
            aniso_mask = restrict_mask(aniso.valid, grid, X);
            xi = denoise(xi, opts.reg_xi);
            zeta = denoise(zeta, opts.reg_zeta);
            for (auto& v : xi.values) v = std::max(v, 1e-6);
        }
        VectorField2 H1x = restrict_field(H1, X);
        VectorField2 H2x = restrict_field(H2, X);
        NodeMask beta_mask;
        VectorField2 G = log_beta_gradient(H1x, H2x, xi, zeta, opts.det_floor_rel,
                                           &beta_mask);
        ScalarField2 beta = recover_beta(G, opts.beta_bc, &beta_mask);
        ScalarField2 logb(metric_grid);
        for (std::size_t k = 0; k < logb.values.size(); ++k)
            logb.values[k] = std::log(beta.values[k]);
        logb = denoise(logb, opts.reg_logbeta);
        for (std::size_t k = 0; k < logb.values.size(); ++k)
            beta.values[k] = std::exp(logb.values[k]);

        res.xi = std::move(xi);
        res.zeta = std::move(zeta);
        res.beta = std::move(beta);
        res.mask = aniso_mask;
        for (std::size_t k = 0; k < beta_mask.size(); ++k)
            if (!beta_mask[k]) res.mask[k] = 0;

        ReconReport& rep = res.diagnostics;
        rep.det_basis_field = det_basis_field(H1x, H2x);
        rep.min_det_basis = *std::min_element(rep.det_basis_field.values.begin(),
                                              rep.det_basis_field.values.end());
        if (!pairs.empty()) {
            ScalarField2 ind = independence_field(pairs.front().M1, pairs.front().M2);
            rep.independence_field = restrict_field(ind, X);
            rep.max_independence =
                *std::max_element(rep.independence_field.values.begin(),
                                  rep.independence_field.values.end());
        }
        std::size_t masked = 0;
        for (auto m : res.mask)
            if (!m) ++masked;
        rep.masked_fraction = static_cast<double>(masked) / res.mask.size();
    }

    // Metrics.
    ReconReport& rep = res.diagnostics;
    rep.errors["xi"] = relative_l2_error(res.xi, out.truth.xi);
    rep.errors["zeta"] = relative_l2_error(res.zeta, out.truth.zeta);
    rep.errors["beta"] = relative_l2_error(res.beta, out.truth.beta);
    {
        const int ia = (metric_grid.nx - 1) / 2, ja = (metric_grid.ny - 1) / 2;
        rep.anchor_error = std::abs(std::log(res.beta.at(ia, ja)) -
                                    std::log(out.truth.beta.at(ia, ja)));
    }

    if (write_files) {
        namespace fs = std::filesystem;
        const fs::path dir = cfg.out_dir;
        fs::create_directories(dir / "sections");
        save_measurements(dir / (ms.noisy ? "measurements_noisy" : "measurements"), ms);
        save_scalar(dir / "xi.fld", res.xi);
        save_scalar(dir / "zeta.fld", res.zeta);
        save_scalar(dir / "beta.fld", res.beta);
        save_scalar(dir / "true_xi.fld", out.truth.xi);
        save_scalar(dir / "true_zeta.fld", out.truth.zeta);
        save_scalar(dir / "true_beta.fld", out.truth.beta);
        {
            ScalarField2 m(metric_grid);
            for (std::size_t k = 0; k < res.mask.size(); ++k) m.values[k] = res.mask[k];
            save_scalar(dir / "mask.fld", m);
        }
        save_scalar(dir / "det_basis.fld", rep.det_basis_field);
        if (!rep.independence_field.values.empty())
            save_scalar(dir / "independence.fld", rep.independence_field);

        std::map<std::string, std::string> kv;
        kv["experiment"] = std::to_string(cfg.experiment);
        kv["grid.n"] = std::to_string(cfg.grid_n);
        kv["noise.alpha"] = fmt17(cfg.noise.alpha);
        kv["noise.seed"] = std::to_string(cfg.noise.seed);
        kv["error.xi"] = fmt17(rep.errors["xi"]);
        kv["error.zeta"] = fmt17(rep.errors["zeta"]);
        kv["error.beta"] = fmt17(rep.errors["beta"]);
        kv["min_det_basis"] = fmt17(rep.min_det_basis);
        kv["max_independence"] = fmt17(rep.max_independence);
        kv["masked_fraction"] = fmt17(rep.masked_fraction);
        kv["anchor_error"] = fmt17(rep.anchor_error);
        write_kv(dir / "report.txt", kv);

        // Cross sections at the section lines used by the figures.
        const double ysec = (cfg.experiment == 1 || cfg.experiment == 2) ? 0.0 : -0.5;
        for (const auto& [name, fld] :
             std::vector<std::pair<std::string, const ScalarField2*>>{
                 {"xi", &res.xi}, {"zeta", &res.zeta}, {"beta", &res.beta},
                 {"true_xi", &out.truth.xi}, {"true_zeta", &out.truth.zeta},
                 {"true_beta", &out.truth.beta}}) {
            detail::write_section_csv(dir / "sections" / (name + "_y.csv"),
                                      cross_section(*fld, Axis::Y, ysec));
        }

        // Determinant-decay diagnostic for the partial-boundary setting:
        // max over pairs of log10 |det(grad u_i, grad u_j)| along vertical
        // lines.
        if (cfg.illuminations == IlluminationKind::GaussBottomSmall ||
            cfg.illuminations == IlluminationKind::GaussBottomExtended ||
            cfg.illuminations == IlluminationKind::GaussBottomNeumann) {
            ScalarField2 maxlogdet(grid, -std::numeric_limits<double>::infinity());
            std::vector<VectorField2> gradu;
            for (const auto& H : ms.H) {
                VectorField2 gu(grid);
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    double g11, g12, g22;
                    gamma.entries(k, g11, g12, g22);
                    const double det = g11 * g22 - g12 * g12;
                    gu.cx[k] = (g22 * H.cx[k] - g12 * H.cy[k]) / det;
                    gu.cy[k] = (-g12 * H.cx[k] + g11 * H.cy[k]) / det;
                }
                gradu.push_back(std::move(gu));
            }
            for (std::size_t a = 0; a < gradu.size(); ++a)
                for (std::size_t b = a + 1; b < gradu.size(); ++b)
                    for (std::size_t k = 0; k < grid.size(); ++k) {
                        const double d = std::abs(gradu[a].cx[k] * gradu[b].cy[k] -
                                                  gradu[a].cy[k] * gradu[b].cx[k]);
                        maxlogdet.values[k] = std::max(
                            maxlogdet.values[k],
                            d > 0 ? std::log10(d) : -300.0);
                    }
            for (double xsec : {0.0, -0.5, 0.5}) {
                std::string tag = xsec == 0.0 ? "x0" : (xsec < 0 ? "xm05" : "xp05");
                detail::write_section_csv(dir / "sections" / ("logdet_" + tag + ".csv"),
                                          cross_section(maxlogdet, Axis::X, xsec));
            }
        }
    }

    out.result = std::move(res);
    out.report = out.result.diagnostics;
    return out;
}

}  // namespace cdii
