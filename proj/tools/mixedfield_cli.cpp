// SPDX-License-Identifier: Apache-2.0
//
// mixedfield: mixed near-field / far-field localization for hybrid planar arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <mixedfield/mixedfield.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

using namespace mixedfield;

namespace
{
    struct CommonOptions
    {
        std::string config;
        std::string out;
        std::optional<std::uint64_t> seed;
        std::string algorithm;
        bool full = false;
        int workers = 1;
        std::string dump_covariance;
    };

    ScenarioConfig load(const CommonOptions &o)
    {
        ScenarioConfig c;
        if (o.config.empty())
            c.targets = reference_targets();
        else
            c = load_config(o.config);
        if (o.full)
            c.apply_full_scale();
        if (o.seed)
            c.seed = *o.seed;
        if (!o.algorithm.empty())
        {
            c.algorithms.clear();
            for (const auto &a : detail::split_list(o.algorithm))
                c.algorithms.push_back(parse_algorithm(a));
        }
        c.validate();
        spdlog::info("array {}x{} ({} RF chains), L={}, Q={}, {} target(s)", c.nx, c.ny, c.n_rf, c.snapshots_L, c.trials_Q,
                     c.targets.size());
        return c;
    }

    void write_or_print(const std::string &text, const std::string &path)
    {
        if (path.empty())
            std::cout << text;
        else
        {
            write_text_file(path, text);
            spdlog::info("wrote {}", path);
        }
    }

    // Covariance seen by single-shot commands: one synthesized trial, or the model covariance.
    Covariance single_covariance(const ScenarioConfig &c, const AlgorithmSetup &s, double snr_db, bool theoretical,
                                 const std::string &dump)
    {
        const Covariance cov = theoretical ? theoretical_covariance(s.scene, s.geometry, noise_power_for(snr_db))
                                           : sample_covariance(trial_batch(c, s, snr_db, 0));
        if (!dump.empty())
        {
            write_matrix_binary(dump, cov.matrix);
            spdlog::info("covariance ({}x{}) dumped to {}", cov.n(), cov.n(), dump);
        }
        return cov;
    }

    void add_common(CLI::App *cmd, CommonOptions &o)
    {
        cmd->add_option("--config", o.config, "Scenario file (key = value)")->check(CLI::ExistingFile);
        cmd->add_option("--out", o.out, "Output file (default: stdout)");
        cmd->add_option("--seed", o.seed, "Base seed, overrides the config");
        cmd->add_option("--algorithm", o.algorithm, "Comma-separated algorithm list, overrides the config");
        cmd->add_flag("--full", o.full, "Use the 61x61 array and fine grids (slow)");
        cmd->add_option("--workers", o.workers, "Trial worker threads")->check(CLI::Range(1, 1024));
        cmd->add_option("--dump-covariance", o.dump_covariance, "Write the covariance matrix as raw complex128");
    }

    int run_simulate(const CommonOptions &o)
    {
        const ScenarioConfig c = load(o);
        const RmseTable t = run_monte_carlo(c, o.workers, [](const RmseRow &r) {
            spdlog::info("{:>6} dB {:<18} theta {:.4g} rad, phi {:.4g} rad, r {:.4g} m", r.snr_db, r.algorithm, r.theta_rmse,
                         r.phi_rmse, r.r_rmse);
        });
        if (!o.dump_covariance.empty())
            single_covariance(c, make_setup(c, c.algorithms.front()), c.snr_db.front(), false, o.dump_covariance);
        const CsvTable csv = to_csv(t);
        if (o.out.empty())
            std::cout << render_csv(csv);
        else
            emit_csv(csv, o.out);
        return 0;
    }

    int run_crb(const CommonOptions &o)
    {
        const ScenarioConfig c = load(o);
        const UpaGeometry g = c.geometry();
        const Scene sc = c.scene();
        std::vector<CrbRow> rows;
        for (const double snr : c.snr_db)
        {
            const CrbReport r = crb(sc, g, noise_power_for(snr), c.snapshots_L);
            for (std::size_t i = 0; i < r.params.size(); ++i)
                rows.push_back({snr, r.params[i].name, r.params[i].value, r.rcrb(Eigen::Index(i))});
        }
        const CsvTable csv = to_csv(rows);
        if (o.out.empty())
            std::cout << render_csv(csv);
        else
            emit_csv(csv, o.out);
        return 0;
    }

    struct SpectrumOptions
    {
        std::string axis = "beta";
        double snr_db = 10.0;
        bool theoretical = false;
        std::optional<double> alpha, beta;
        int target = 0;
    };

    int run_spectrum(const CommonOptions &o, const SpectrumOptions &so)
    {
        const ScenarioConfig c = load(o);
        const AlgorithmSetup s = make_setup(c, c.algorithms.front());
        const Covariance cov = single_covariance(c, s, so.snr_db, so.theoretical, o.dump_covariance);
        const int k = s.scene.size();
        require(so.target >= 0 && so.target < k, "--target must index a configured target");
        const DirectionCosines truth = s.scene[so.target].cosines();
        const double a = so.alpha.value_or(truth.alpha), b = so.beta.value_or(truth.beta);

        Spectrum sp;
        if (so.axis == "legacy-beta")
            sp = legacy_beta_spectrum(eigendecompose_split(cov.matrix, k), s.geometry, s.grid);
        else if (so.axis == "range")
            sp = range_spectrum(eigendecompose_split(cov.matrix, k), {a, b}, s.grid.range_grid(), s.geometry);
        else
        {
            const SubspaceBundle bundle = prepare_subspaces(cov, k, s.geometry);
            sp = so.axis == "beta" ? beta_spectrum(bundle.supa_sub, s.geometry, s.grid)
                                   : alpha_spectrum(bundle.supa_sub, b, s.geometry, s.grid);
        }
        write_or_print(render_spectrum(sp, so.axis == "legacy-beta" ? "beta" : so.axis), o.out);
        return 0;
    }

    int run_bench(const CommonOptions &o, const std::vector<int> &sizes, int reps)
    {
        ScenarioConfig c = load(o);
        if (o.algorithm.empty())
            c.algorithms = {Algorithm::ProposedDft, Algorithm::Proposed, Algorithm::Music3D};
        std::vector<std::pair<int, int>> sq;
        for (const int n : sizes)
            sq.emplace_back(n, n);
        const RuntimeReport r = bench_runtime(c, sq, reps);
        for (const auto &row : r)
            spdlog::info("{}x{} {:<18} {:.4f} s", row.nx, row.ny, row.algorithm, row.wall_seconds);
        const CsvTable csv = to_csv(r);
        if (o.out.empty())
            std::cout << render_csv(csv);
        else
            emit_csv(csv, o.out);
        return 0;
    }

    std::string describe(const TargetEstimate &e)
    {
        const std::string r = e.kind == TargetKind::FarField ? "far" : fmt::format("{:.2f} m", e.range);
        return fmt::format("({:.4f}, {:.4f}, {})", e.theta, e.phi, r);
    }

    int run_classify_demo(const CommonOptions &o, double snr_db, bool theoretical)
    {
        const ScenarioConfig c = load(o);
        const AlgorithmSetup s = make_setup(c, Algorithm::Proposed);
        const Covariance cov = single_covariance(c, s, snr_db, theoretical, o.dump_covariance);
        const int k = s.scene.size();
        LocalizeOptions opt;
        opt.thresholds = c.thresholds;
        const LocalizationResult prop = localize(cov, k, s.geometry, s.grid, opt);
        const LegacyDetection legacy = legacy_far_detector(eigendecompose_split(cov.matrix, k), k, s.geometry, s.grid);

        std::cout << fmt::format("array {}x{}, Rayleigh distance {:.2f} m, SNR {} dB{}\n\n", c.nx, c.ny,
                                 rayleigh_distance(s.geometry), snr_db, theoretical ? " (model covariance)" : "");
        std::cout << fmt::format("{:>9} {:>9} {:>9} {:>10} {:>11} {:>12}\n", "alpha", "beta", "pattern", "prominence",
                                 "monotonic", "range [m]");
        CsvTable csv{{"alpha", "beta", "physical", "pattern", "prominence", "monotonicity", "range_est"}, {}};
        for (const auto &cand : prop.candidates)
        {
            const std::string label = cand.physical ? to_string(cand.cls.label) : "outside";
            std::cout << fmt::format("{:>9.4f} {:>9.4f} {:>9} {:>10.3g} {:>11.3f} {:>12.3f}\n", cand.pair.alpha, cand.pair.beta,
                                     label, cand.cls.prominence, cand.cls.monotonicity, cand.cls.range_est);
            csv.rows.push_back({format_number(cand.pair.alpha), format_number(cand.pair.beta), cand.physical ? "1" : "0", label,
                                format_number(cand.cls.prominence), format_number(cand.cls.monotonicity),
                                format_number(cand.cls.range_est)});
        }

        const MatchResult mp = match_estimates(s.scene, prop.targets, s.range_cap);
        // the legacy detector labels everything far, so pair it by angle alone
        std::vector<TargetEstimate> legacy_any = legacy.targets;
        std::vector<int> legacy_of(std::size_t(k), -1);
        std::vector<bool> used(legacy_any.size(), false);
        for (int t = 0; t < k; ++t)
        {
            double best = 1e300;
            for (std::size_t e = 0; e < legacy_any.size(); ++e)
            {
                const double d = std::hypot(legacy_any[e].theta - s.scene[t].theta,
                                            std::remainder(legacy_any[e].phi - s.scene[t].phi, 2 * kPi));
                if (!used[e] && d < best)
                {
                    best = d;
                    legacy_of[std::size_t(t)] = int(e);
                }
            }
            if (legacy_of[std::size_t(t)] >= 0)
                used[std::size_t(legacy_of[std::size_t(t)])] = true;
        }

        std::cout << fmt::format("\n{:<8} {:<30} {:<30} {:<30}\n", "target", "truth (theta, phi, r)", "proposed", "far-field detector");
        for (int t = 0; t < k; ++t)
        {
            TargetEstimate truth;
            truth.kind = s.scene[t].kind;
            truth.theta = s.scene[t].theta;
            truth.phi = s.scene[t].phi;
            truth.range = s.scene[t].range;
            const int ep = mp.estimate_of[std::size_t(t)], el = legacy_of[std::size_t(t)];
            std::cout << fmt::format("{:<8} {:<30} {:<30} {:<30}\n", t + 1, describe(truth),
                                     ep >= 0 ? describe(prop.targets[std::size_t(ep)]) : "missed",
                                     el >= 0 ? describe(legacy_any[std::size_t(el)]) : "missed");
        }
        for (const auto &w : prop.warnings)
            spdlog::warn("{}", w);
        if (!o.out.empty())
            emit_csv(csv, o.out);
        return 0;
    }

    void configure_logging()
    {
        auto logger = spdlog::stderr_color_mt("mixedfield");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%l] %v");
        spdlog::set_level(spdlog::level::warn);
        if (const char *env = std::getenv("MIXEDFIELD_LOG"))
        {
            const std::string v = env;
            if (v == "error" || v == "warn" || v == "info" || v == "debug")
                spdlog::set_level(spdlog::level::from_str(v));
            else
                spdlog::warn("ignoring MIXEDFIELD_LOG='{}' (expected error, warn, info or debug)", v);
        }
    }
}

int main(int argc, char **argv)
{
    configure_logging();
    CLI::App app{"Mixed near-field / far-field localization with hybrid planar arrays"};
    app.require_subcommand(1);

    CommonOptions common;
    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo RMSE versus SNR (CSV)");
    auto *crb_cmd = app.add_subcommand("crb", "Root Cramer-Rao bound per parameter and SNR (CSV)");
    auto *spectrum = app.add_subcommand("spectrum", "Dump one pseudo-spectrum");
    auto *bench = app.add_subcommand("bench", "Runtime versus array size (CSV)");
    auto *demo = app.add_subcommand("classify-demo", "Candidate patterns and a comparison with the far-field detector");
    for (auto *cmd : {simulate, crb_cmd, spectrum, bench, demo})
        add_common(cmd, common);

    SpectrumOptions so;
    spectrum->add_option("--axis", so.axis, "beta, alpha, range or legacy-beta")
        ->check(CLI::IsMember({"beta", "alpha", "range", "legacy-beta"}));
    spectrum->add_option("--snr", so.snr_db, "SNR in dB");
    spectrum->add_flag("--theoretical", so.theoretical, "Use the model covariance instead of a sampled one");
    spectrum->add_option("--alpha", so.alpha, "alpha for the range axis (default: the selected target)");
    spectrum->add_option("--beta", so.beta, "beta for the alpha and range axes (default: the selected target)");
    spectrum->add_option("--target", so.target, "Target index (0-based, far targets first) supplying default cosines");

    std::vector<int> sizes{9, 15, 21};
    int reps = 5;
    bench->add_option("--sizes", sizes, "Square array sizes")->delimiter(',');
    bench->add_option("--repetitions", reps, "Timed repetitions per point")->check(CLI::Range(1, 1000));

    double demo_snr = 10.0;
    bool demo_theoretical = false;
    demo->add_option("--snr", demo_snr, "SNR in dB");
    demo->add_flag("--theoretical", demo_theoretical, "Use the model covariance instead of a sampled one");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 1;
    }

    try
    {
        if (*simulate)
            return run_simulate(common);
        if (*crb_cmd)
            return run_crb(common);
        if (*spectrum)
            return run_spectrum(common, so);
        if (*bench)
            return run_bench(common, sizes, reps);
        if (*demo)
            return run_classify_demo(common, demo_snr, demo_theoretical);
    }
    catch (const ConfigError &e)
    {
        spdlog::error("configuration error: {}", e.what());
        return 1;
    }
    catch (const std::exception &e)
    {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 1;
}
