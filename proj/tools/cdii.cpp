// Command-line front end for the CDII pipeline: forward solves, synthetic
// measurement generation, noise injection, reconstruction, diagnostics, and
// the preset experiments.

#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "cdii/experiment.hpp"

namespace fs = std::filesystem;

namespace {

cdii::ExperimentConfig load_config(const std::string& config_path, int experiment,
                                   const std::string& out_dir, std::uint64_t seed,
                                   double noise, bool seed_set, bool noise_set) {
    cdii::ExperimentConfig cfg;
    if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw std::runtime_error("cannot open config " + config_path);
        std::stringstream ss;
        ss << is.rdbuf();
        cfg = cdii::parse_config(ss.str());
    } else if (experiment > 0) {
        cfg = cdii::make_preset(experiment);
    }
    if (experiment > 0 && config_path.empty()) cfg.experiment = experiment;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_set) {
        cfg.noise.seed = seed;
        cfg.phantom_seed = seed;
    }
    if (noise_set) {
        cfg.noise.alpha = noise;
        // retune the experiment-1 auto regularization for the new level
        if (cfg.experiment == 1) {
            cdii::ExperimentConfig fresh = cdii::make_preset(1);
            fresh.noise = cfg.noise;
            fresh.phantom_seed = cfg.phantom_seed;
            fresh.out_dir = cfg.out_dir;
            cdii::detail::resolve_auto_reg(fresh, false);
            cfg = fresh;
        }
        cdii::detail::resolve_auto_presmooth(cfg, false);
    }
    return cfg;
}

void print_report(const cdii::ReconReport& rep) {
    for (const auto& [k, v] : rep.errors)
        std::cout << "error." << k << " = " << v << '\n';
    std::cout << "min_det_basis = " << rep.min_det_basis << '\n'
              << "max_independence = " << rep.max_independence << '\n'
              << "masked_fraction = " << rep.masked_fraction << '\n'
              << "anchor_error = " << rep.anchor_error << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D current density impedance imaging laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    double noise = 0.0;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (noise and phantom)");
    auto* noise_opt = app.add_option("--noise", noise, "relative noise level alpha");

    int experiment = 0;
    auto* exp_cmd = app.add_subcommand("experiment", "run a preset experiment (1-5)");
    exp_cmd->add_option("n", experiment, "experiment number")->required();

    auto* forward_cmd =
        app.add_subcommand("forward", "forward solves: write solution fields");
    auto* synth_cmd =
        app.add_subcommand("synth", "generate clean measurements for the config");
    auto* noise_cmd = app.add_subcommand("noise", "add noise to a measurement directory");
    std::string noise_in;
    noise_cmd->add_option("input", noise_in, "measurement directory")->required();
    auto* recon_cmd =
        app.add_subcommand("reconstruct", "reconstruct from a measurement directory");
    std::string recon_in;
    recon_cmd->add_option("input", recon_in, "measurement directory")->required();
    auto* diag_cmd =
        app.add_subcommand("diagnose", "data diagnostics for a measurement directory");
    std::string diag_in;
    diag_cmd->add_option("input", diag_in, "measurement directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cdii::ExperimentConfig cfg =
            load_config(config_path, experiment, out_dir, seed, noise,
                        seed_opt->count() > 0, noise_opt->count() > 0);
        if (cfg.out_dir.empty()) cfg.out_dir = "out";

        if (exp_cmd->parsed()) {
            auto out = cdii::run_experiment(cfg);
            print_report(out.report);
            std::cout << "artifacts written to " << cfg.out_dir << '\n';
            return 0;
        }

        if (forward_cmd->parsed() || synth_cmd->parsed()) {
            const cdii::Grid2D grid = cfg.make_grid();
            const auto gamma = cdii::make_phantom(cfg.phantom, grid, cfg.phantom_seed);
            const auto illums = cdii::make_illuminations(cfg.illuminations, grid);
            if (forward_cmd->parsed()) {
                fs::create_directories(cfg.out_dir);
                for (std::size_t i = 0; i < illums.specs.size(); ++i) {
                    auto u = cdii::solve_conductivity(grid, gamma, illums.specs[i],
                                                      cfg.solver);
                    cdii::save_scalar(fs::path(cfg.out_dir) /
                                          ("u_" + std::to_string(i) + ".fld"),
                                      u);
                }
                std::cout << illums.specs.size() << " solution fields written to "
                          << cfg.out_dir << '\n';
            } else {
                auto ms = cdii::generate_measurements(gamma, illums, cfg.solver);
                if (cfg.noise.alpha > 0.0) ms = cdii::add_noise(ms, cfg.noise);
                cdii::save_measurements(cfg.out_dir, ms);
                std::cout << ms.H.size() << " measurements written to " << cfg.out_dir
                          << '\n';
            }
            return 0;
        }

        if (noise_cmd->parsed()) {
            auto ms = cdii::load_measurements(noise_in);
            ms = cdii::add_noise(ms, cfg.noise);
            cdii::save_measurements(cfg.out_dir, ms);
            std::cout << "noisy measurements written to " << cfg.out_dir << '\n';
            return 0;
        }

        if (recon_cmd->parsed()) {
            auto ms = cdii::load_measurements(recon_in);
            cdii::ReconOptions opts = cfg.recon;
            if (opts.extra_pairs.empty()) {
                for (std::size_t a = 0; a < ms.H.size(); ++a)
                    for (std::size_t b = a + 1; b < ms.H.size(); ++b)
                        if (static_cast<int>(a) != opts.basis.i1 &&
                            static_cast<int>(a) != opts.basis.i2 &&
                            static_cast<int>(b) != opts.basis.i1 &&
                            static_cast<int>(b) != opts.basis.i2)
                            opts.extra_pairs.emplace_back(static_cast<int>(a),
                                                          static_cast<int>(b));
            }
            if (opts.beta_bc.mode == cdii::BetaBcMode::DirichletTrace &&
                opts.beta_bc.log_beta_trace.values.empty()) {
                // no truth available from raw measurements; fall back to anchor
                opts.beta_bc.mode = cdii::BetaBcMode::Anchor;
                opts.beta_bc.anchor_x = ms.grid.ox + (ms.grid.nx - 1) / 2 * ms.grid.h;
                opts.beta_bc.anchor_y = ms.grid.oy + (ms.grid.ny - 1) / 2 * ms.grid.h;
                opts.beta_bc.anchor_value = 0.0;
            }
            auto res = cdii::reconstruct_full(ms, opts);
            fs::create_directories(cfg.out_dir);
            cdii::save_scalar(fs::path(cfg.out_dir) / "xi.fld", res.xi);
            cdii::save_scalar(fs::path(cfg.out_dir) / "zeta.fld", res.zeta);
            cdii::save_scalar(fs::path(cfg.out_dir) / "beta.fld", res.beta);
            print_report(res.diagnostics);
            return 0;
        }

        if (diag_cmd->parsed()) {
            auto ms = cdii::load_measurements(diag_in);
            if (ms.H.size() < 2) throw std::runtime_error("need at least 2 measurements");
            auto db = cdii::det_basis_field(ms.H[0], ms.H[1]);
            double dmin = db.values[0];
            for (double v : db.values) dmin = std::min(dmin, v);
            std::cout << "min |det(H1,H2)| = " << dmin << '\n';
            fs::create_directories(cfg.out_dir);
            cdii::save_scalar(fs::path(cfg.out_dir) / "det_basis.fld", db);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
