#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdii/recon.hpp"
#include "cdii/regularize.hpp"
#include "cdii/synth.hpp"

namespace cdii {

struct DomainSpec {
    double ox = -1.0, oy = -1.0;
    double lx = 2.0, ly = 2.0;
};

inline DomainSpec domain_X() { return {-1.0, -1.0, 2.0, 2.0}; }
inline DomainSpec domain_Xprime() { return {-3.0, -1.2, 6.0, 6.0}; }

struct ExperimentConfig {
    int experiment = 0;  // 1..5, or 0 for custom
    int grid_n = 80;     // cells per axis; nx = ny = n + 1
    DomainSpec domain = domain_X();
    PhantomName phantom = PhantomName::Exp1Smooth;
    std::uint64_t phantom_seed = 1;
    IlluminationKind illuminations = IlluminationKind::Poly5;
    NoiseSpec noise;
    SolverOptions solver;
    ReconOptions recon;
    bool restrict_to_X = false;  // restrict reconstructions to [-1,1]^2
    std::string out_dir = "out";

    Grid2D make_grid() const {
        const double h = domain.lx / grid_n;
        const int ny = static_cast<int>(std::lround(domain.ly / h)) + 1;
        return Grid2D(grid_n + 1, ny, h, domain.ox, domain.oy);
    }
};

namespace detail {

inline void apply_preset(ExperimentConfig& cfg, int experiment) {
    cfg.experiment = experiment;
    cfg.grid_n = 80;
    cfg.domain = domain_X();
    cfg.illuminations = IlluminationKind::Poly5;
    cfg.restrict_to_X = false;
    cfg.recon.basis = {0, 1};
    cfg.recon.extra_pairs = {{2, 3}, {2, 4}, {3, 4}};
    cfg.recon.beta_bc.mode = BetaBcMode::DirichletTrace;
    auto l2 = [](double rho) {
        RegSpec s;
        s.kind = RegKind::L2;
        s.rho = rho;
        return s;
    };
    auto l1 = [](double rho) {
        RegSpec s;
        s.kind = RegKind::L1TV;
        s.rho = rho;
        s.bregman_lambda = 2.0 * rho;
        s.outer_iter = 120;
        s.tol = 1e-5;
        return s;
    };
    switch (experiment) {
        case 1:
            cfg.phantom = PhantomName::Exp1Smooth;
            // clean runs need no denoising; noisy defaults are retuned in
            // resolve_auto_reg once alpha is known
            cfg.recon.reg_xi = cfg.recon.reg_zeta = cfg.recon.reg_logbeta = RegSpec{};
            break;
        case 2:
            cfg.phantom = PhantomName::Exp2Checker;
            cfg.recon.reg_xi = l2(2e-4);
            cfg.recon.reg_zeta = l2(2e-4);
            cfg.recon.reg_logbeta = l1(2e-2);
            break;
        case 3:
            cfg.phantom = PhantomName::Exp3Piecewise;
            cfg.recon.reg_xi = l1(5e-4);
            cfg.recon.reg_zeta = l1(5e-4);
            cfg.recon.reg_logbeta = l1(2e-2);
            break;
        case 4:
        case 5:
            cfg.phantom = PhantomName::Exp3Piecewise;
            cfg.grid_n = 240;
            cfg.domain = domain_Xprime();
            cfg.illuminations = (experiment == 4) ? IlluminationKind::GaussBottomExtended
                                                  : IlluminationKind::GaussBottomNeumann;
            cfg.restrict_to_X = true;
            cfg.recon.reg_xi = l1(5e-4);
            cfg.recon.reg_zeta = l1(5e-4);
            cfg.recon.reg_logbeta = l1(2e-2);
            break;
        default:
            throw std::invalid_argument("unknown experiment preset " +
                                        std::to_string(experiment));
    }
}

/// Experiment 1 defaults its regularization on the noise level: none for
/// clean data, quadratic smoothing for noisy data.
inline void resolve_auto_reg(ExperimentConfig& cfg, bool reg_was_set) {
    if (cfg.experiment != 1 || reg_was_set) return;
    if (cfg.noise.alpha > 0.0) {
        RegSpec l2;
        l2.kind = RegKind::L2;
        l2.rho = 2e-3;
        cfg.recon.reg_xi = cfg.recon.reg_zeta = l2;
        RegSpec l2b = l2;
        l2b.rho = 1e-3;
        cfg.recon.reg_logbeta = l2b;
    }
}

/// The algebraic reconstruction differentiates the data once, so noisy
/// measurements are low-passed first unless the config says otherwise.
inline void resolve_auto_presmooth(ExperimentConfig& cfg, bool presmooth_was_set) {
    if (presmooth_was_set) return;
    cfg.recon.presmooth_passes = cfg.noise.alpha > 0.0 ? 5 : 0;
}

}  // namespace detail

inline ExperimentConfig make_preset(int experiment) {
    ExperimentConfig cfg;
    detail::apply_preset(cfg, experiment);
    detail::resolve_auto_reg(cfg, false);
    return cfg;
}

/// Parse line-oriented `key = value` configuration text. `#` starts a
/// comment; unknown keys are rejected with the offending line number.
inline ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    bool preset_applied = false;
    bool reg_set = false;
    bool presmooth_set = false;
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<int> lines;
    {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            if (trim(line).empty()) continue;
            auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw std::runtime_error("config line " + std::to_string(lineno) +
                                         ": empty key or value");
            entries.emplace_back(key, val);
            lines.push_back(lineno);
        }
    }

    // The experiment preset resolves first so later keys override it.
    for (std::size_t e = 0; e < entries.size(); ++e) {
        if (entries[e].first == "experiment") {
            if (entries[e].second != "custom") {
                detail::apply_preset(cfg, std::stoi(entries[e].second));
                preset_applied = true;
            }
        }
    }
    (void)preset_applied;

    auto bad = [&](std::size_t e, const std::string& why) -> std::runtime_error {
        return std::runtime_error("config line " + std::to_string(lines[e]) + ": key '" +
                                  entries[e].first + "': " + why);
    };
    auto to_d = [&](std::size_t e) {
        try {
            return std::stod(entries[e].second);
        } catch (...) {
            throw bad(e, "expected a number, got '" + entries[e].second + "'");
        }
    };
    auto to_i = [&](std::size_t e) {
        try {
            return std::stoi(entries[e].second);
        } catch (...) {
            throw bad(e, "expected an integer, got '" + entries[e].second + "'");
        }
    };
    auto to_u64 = [&](std::size_t e) {
        try {
            return static_cast<std::uint64_t>(std::stoull(entries[e].second));
        } catch (...) {
            throw bad(e, "expected an unsigned integer, got '" + entries[e].second + "'");
        }
    };

    auto reg_for = [&](const std::string& suffix) -> std::vector<RegSpec*> {
        if (suffix.empty())
            return {&cfg.recon.reg_xi, &cfg.recon.reg_zeta, &cfg.recon.reg_logbeta};
        if (suffix == ".xi") return {&cfg.recon.reg_xi};
        if (suffix == ".zeta") return {&cfg.recon.reg_zeta};
        if (suffix == ".logbeta") return {&cfg.recon.reg_logbeta};
        return {};
    };

    for (std::size_t e = 0; e < entries.size(); ++e) {
        const std::string& key = entries[e].first;
        const std::string& val = entries[e].second;
        if (key == "experiment") {
            if (val == "custom") cfg.experiment = 0;
            continue;
        }
        if (key == "grid.n") { cfg.grid_n = to_i(e); continue; }
        if (key == "domain") {
            if (val == "X") cfg.domain = domain_X();
            else if (val == "Xprime") cfg.domain = domain_Xprime();
            else throw bad(e, "expected X or Xprime");
            continue;
        }
        if (key == "domain.ox") { cfg.domain.ox = to_d(e); continue; }
        if (key == "domain.oy") { cfg.domain.oy = to_d(e); continue; }
        if (key == "domain.lx") { cfg.domain.lx = to_d(e); continue; }
        if (key == "domain.ly") { cfg.domain.ly = to_d(e); continue; }
        if (key == "phantom") {
            try { cfg.phantom = phantom_from_string(val); }
            catch (const std::exception& ex) { throw bad(e, ex.what()); }
            continue;
        }
        if (key == "phantom.seed") { cfg.phantom_seed = to_u64(e); continue; }
        if (key == "illuminations") {
            try { cfg.illuminations = illumination_from_string(val); }
            catch (const std::exception& ex) { throw bad(e, ex.what()); }
            continue;
        }
        if (key == "noise.alpha") {
            cfg.noise.alpha = to_d(e);
            if (cfg.noise.alpha < 0) throw bad(e, "alpha must be >= 0");
            continue;
        }
        if (key == "noise.seed") { cfg.noise.seed = to_u64(e); continue; }
        if (key == "noise.passes") { cfg.noise.smoothing_passes = to_i(e); continue; }
        if (key == "solver.method") {
            if (val == "direct") cfg.solver.method = SolveMethod::Direct;
            else if (val == "iterative") cfg.solver.method = SolveMethod::Iterative;
            else throw bad(e, "expected direct or iterative");
            continue;
        }
        if (key == "solver.tol") {
            cfg.solver.tol = to_d(e);
            if (!(cfg.solver.tol > 0)) throw bad(e, "tol must be > 0");
            continue;
        }
        if (key == "solver.max_iter") {
            cfg.solver.max_iter = to_i(e);
            if (cfg.solver.max_iter < 1) throw bad(e, "max_iter must be >= 1");
            continue;
        }
        if (key == "recon.basis.i1") { cfg.recon.basis.i1 = to_i(e); continue; }
        if (key == "recon.basis.i2") { cfg.recon.basis.i2 = to_i(e); continue; }
        if (key == "recon.det_floor") {
            cfg.recon.det_floor_rel = to_d(e);
            if (!(cfg.recon.det_floor_rel > 0)) throw bad(e, "det_floor must be > 0");
            continue;
        }
        if (key == "recon.presmooth") {
            cfg.recon.presmooth_passes = to_i(e);
            if (cfg.recon.presmooth_passes < 0) throw bad(e, "presmooth must be >= 0");
            presmooth_set = true;
            continue;
        }
        if (key == "recon.beta_bc") {
            if (val == "trace") cfg.recon.beta_bc.mode = BetaBcMode::DirichletTrace;
            else if (val == "anchor") cfg.recon.beta_bc.mode = BetaBcMode::Anchor;
            else throw bad(e, "expected trace or anchor");
            continue;
        }
        if (key == "restrict_to_X") {
            if (val == "true" || val == "1") cfg.restrict_to_X = true;
            else if (val == "false" || val == "0") cfg.restrict_to_X = false;
            else throw bad(e, "expected true or false");
            continue;
        }
        if (key == "out_dir") { cfg.out_dir = val; continue; }
        if (key.rfind("reg.kind", 0) == 0) {
            auto specs = reg_for(key.substr(8));
            if (specs.empty()) throw bad(e, "unknown key");
            for (auto* s : specs) {
                if (val == "none") s->kind = RegKind::None;
                else if (val == "l2") s->kind = RegKind::L2;
                else if (val == "l1_tv") s->kind = RegKind::L1TV;
                else throw bad(e, "expected none, l2 or l1_tv");
            }
            reg_set = true;
            continue;
        }
        if (key.rfind("reg.rho", 0) == 0) {
            auto specs = reg_for(key.substr(7));
            if (specs.empty()) throw bad(e, "unknown key");
            const double rho = to_d(e);
            if (rho < 0) throw bad(e, "rho must be >= 0");
            for (auto* s : specs) s->rho = rho;
            reg_set = true;
            continue;
        }
        if (key == "reg.tol") {
            const double t = to_d(e);
            if (!(t > 0)) throw bad(e, "tol must be > 0");
            for (auto* s : reg_for("")) s->tol = t;
            continue;
        }
        if (key == "reg.outer_iter") {
            const int n = to_i(e);
            if (n < 1) throw bad(e, "outer_iter must be >= 1");
            for (auto* s : reg_for("")) s->outer_iter = n;
            continue;
        }
        if (key == "reg.inner_iter") {
            const int n = to_i(e);
            if (n < 1) throw bad(e, "inner_iter must be >= 1");
            for (auto* s : reg_for("")) s->inner_iter = n;
            continue;
        }
        if (key == "reg.lambda") {
            const double l = to_d(e);
            if (!(l > 0)) throw bad(e, "lambda must be > 0");
            for (auto* s : reg_for("")) s->bregman_lambda = l;
            continue;
        }
        throw bad(e, "unknown key");
    }

    detail::resolve_auto_reg(cfg, reg_set);
    detail::resolve_auto_presmooth(cfg, presmooth_set);
    return cfg;
}

}  // namespace cdii
