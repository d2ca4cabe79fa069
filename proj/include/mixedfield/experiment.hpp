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

#ifndef MIXEDFIELD_EXPERIMENT_HPP
#define MIXEDFIELD_EXPERIMENT_HPP

#include "mixedfield/config.hpp"
#include "mixedfield/localize.hpp"
#include "mixedfield/music3d.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <thread>

namespace mixedfield
{
    inline std::uint64_t trial_seed(std::uint64_t base, int trial) { return base + std::uint64_t(trial) * 0x9E3779B9ull; }

    inline double noise_power_for(double snr_db) { return 1.0 / db_to_linear(snr_db); }

    // Array, grids and truth one algorithm works with. The quarter-wavelength variant keeps
    // the element count and the physical targets, and searches the same range span.
    struct AlgorithmSetup
    {
        Algorithm algorithm = Algorithm::Proposed;
        UpaGeometry geometry;
        GridSpec grid;
        Music3DGrid music3d;
        Scene scene;
        double range_cap = 0.0; // error charged to a missed near target
        CombinerSchedule schedule;
    };

    inline AlgorithmSetup make_setup(const ScenarioConfig &c, Algorithm a)
    {
        AlgorithmSetup s;
        s.algorithm = a;
        const UpaGeometry nominal = c.geometry();
        s.geometry = a == Algorithm::QuarterWave ? UpaGeometry::from_frequency(c.nx, c.ny, c.frequency_hz, 0.25) : nominal;
        s.scene = c.scene_for(nominal);
        s.grid = c.grids.resolved(nominal);
        s.music3d = c.music3d;
        s.music3d.range_min = s.grid.range_min;
        s.music3d.range_max = s.grid.range_max;
        s.range_cap = rayleigh_distance(nominal);
        const SubConnectedLayout layout = build_layout(s.geometry, c.n_rf, c.ux, c.uy);
        s.schedule = c.combiner == CombinerKind::Dft ? dft_combiner_schedule(layout)
                                                     : random_combiner_schedule(layout, mix_seed(c.seed, 0xC0FFEEull));
        return s;
    }

    // Reconstructed array snapshots for one trial: sources and noise are seeded from the trial seed only.
    inline SnapshotBatch trial_batch(const ScenarioConfig &c, const AlgorithmSetup &s, double snr_db, int trial)
    {
        const std::uint64_t seed = trial_seed(c.seed, trial);
        const double sigma2 = noise_power_for(snr_db);
        const SourceModel src{c.source, mix_seed(seed, 1)};
        const ReceivedSignals rx = synthesize_received(s.scene, s.geometry, s.schedule, src, c.snapshots_L, sigma2, mix_seed(seed, 2));
        return reconstruct_snapshots(rx.y, s.schedule, sigma2, rx.clean.source_powers);
    }

    inline LocalizationResult run_algorithm(const AlgorithmSetup &s, const SnapshotBatch &batch, int k,
                                            const PatternThresholds &thresholds = {})
    {
        LocalizeOptions opt;
        opt.thresholds = thresholds;
        switch (s.algorithm)
        {
        case Algorithm::Proposed:
        case Algorithm::QuarterWave:
            return localize(batch, k, s.geometry, s.grid, opt);
        case Algorithm::ProposedDft:
            opt.dft_coarse = true;
            return localize(batch, k, s.geometry, s.grid, opt);
        case Algorithm::Music3D:
            return baseline_3d_music(eigendecompose_split(sample_covariance(batch).matrix, k), k, s.geometry, s.music3d);
        case Algorithm::LegacyFarDetector:
        {
            LocalizationResult r;
            r.targets = legacy_far_detector(eigendecompose_split(sample_covariance(batch).matrix, k), k, s.geometry, s.grid).targets;
            r.mismatch = int(r.targets.size()) != k;
            return r;
        }
        }
        throw Error("unhandled algorithm");
    }

    // --------------------------------------------------------------- matching

    struct MatchResult
    {
        std::vector<int> estimate_of;     // per truth target, -1 when unmatched
        std::vector<double> theta_error;  // per truth target
        std::vector<double> phi_error;    // per truth target, wrapped to [-pi, pi]
        std::vector<double> range_error;  // per near truth target
        int matched = 0;

        bool complete() const { return matched == int(estimate_of.size()); }
    };

    // Greedy nearest neighbour in (theta, phi) among estimates of the same kind. A truth target
    // left without a partner is charged pi/2 on both angles and range_cap on range.
    inline MatchResult match_estimates(const Scene &truth, const std::vector<TargetEstimate> &est, double range_cap)
    {
        struct Pair
        {
            double d;
            int t, e;
        };
        std::vector<Pair> pairs;
        for (int t = 0; t < truth.size(); ++t)
            for (int e = 0; e < int(est.size()); ++e)
                if (est[std::size_t(e)].kind == truth[t].kind)
                {
                    const double dt = est[std::size_t(e)].theta - truth[t].theta;
                    const double dp = std::remainder(est[std::size_t(e)].phi - truth[t].phi, 2.0 * kPi);
                    pairs.push_back({std::hypot(dt, dp), t, e});
                }
        std::stable_sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) { return a.d < b.d; });

        MatchResult m;
        m.estimate_of.assign(std::size_t(truth.size()), -1);
        std::vector<bool> used(est.size(), false);
        for (const auto &p : pairs)
            if (m.estimate_of[std::size_t(p.t)] < 0 && !used[std::size_t(p.e)])
            {
                m.estimate_of[std::size_t(p.t)] = p.e;
                used[std::size_t(p.e)] = true;
                ++m.matched;
            }
        for (int t = 0; t < truth.size(); ++t)
        {
            const int e = m.estimate_of[std::size_t(t)];
            if (e < 0)
            {
                m.theta_error.push_back(kPi / 2);
                m.phi_error.push_back(kPi / 2);
                if (truth[t].near())
                    m.range_error.push_back(range_cap);
                continue;
            }
            const auto &x = est[std::size_t(e)];
            m.theta_error.push_back(x.theta - truth[t].theta);
            m.phi_error.push_back(std::remainder(x.phi - truth[t].phi, 2.0 * kPi));
            if (truth[t].near())
                m.range_error.push_back(x.range - truth[t].range);
        }
        return m;
    }

    // ------------------------------------------------------------- monte carlo

    struct TrialRecord
    {
        MatchResult match;
        LocalizationResult result;
    };

    struct RmseRow
    {
        double snr_db = 0.0;
        double theta_rmse = 0.0; // rad
        double phi_rmse = 0.0;   // rad
        double r_rmse = 0.0;     // m, over near targets; 0 when the scene has none
        std::string algorithm;
    };
    using RmseTable = std::vector<RmseRow>;

    struct RmseAccumulator
    {
        double theta = 0.0, phi = 0.0, range = 0.0;
        long angle_terms = 0, range_terms = 0;

        void add(const MatchResult &m)
        {
            for (double e : m.theta_error)
                theta += e * e;
            for (double e : m.phi_error)
                phi += e * e;
            for (double e : m.range_error)
                range += e * e;
            angle_terms += long(m.theta_error.size());
            range_terms += long(m.range_error.size());
        }

        RmseRow row(double snr_db, const std::string &algorithm) const
        {
            RmseRow r;
            r.snr_db = snr_db;
            r.algorithm = algorithm;
            if (angle_terms > 0)
            {
                r.theta_rmse = std::sqrt(theta / double(angle_terms));
                r.phi_rmse = std::sqrt(phi / double(angle_terms));
            }
            if (range_terms > 0)
                r.r_rmse = std::sqrt(range / double(range_terms));
            return r;
        }
    };

    // Runs fn(i) for i in [0, count) on up to `workers` threads. The first exception is rethrown.
    inline void parallel_for(int count, int workers, const std::function<void(int)> &fn)
    {
        workers = std::clamp(workers, 1, std::max(count, 1));
        if (workers == 1)
        {
            for (int i = 0; i < count; ++i)
                fn(i);
            return;
        }
        std::atomic<int> next{0};
        std::exception_ptr failure;
        std::mutex lock;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next++; i < count; i = next++)
                {
                    try
                    {
                        fn(i);
                    }
                    catch (...)
                    {
                        std::lock_guard<std::mutex> g(lock);
                        if (!failure)
                            failure = std::current_exception();
                        next = count;
                    }
                }
            });
        for (auto &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
    }

    inline std::vector<TrialRecord> run_trials(const ScenarioConfig &c, const AlgorithmSetup &s, double snr_db, int workers = 1)
    {
        std::vector<TrialRecord> out(std::size_t(c.trials_Q));
        parallel_for(c.trials_Q, workers, [&](int t) {
            const SnapshotBatch batch = trial_batch(c, s, snr_db, t);
            TrialRecord rec;
            rec.result = run_algorithm(s, batch, s.scene.size(), c.thresholds);
            rec.match = match_estimates(s.scene, rec.result.targets, s.range_cap);
            out[std::size_t(t)] = std::move(rec);
        });
        return out;
    }

    // Rows are SNR-major, algorithms in configuration order. Trials are reduced in index
    // order, so the table does not depend on the worker count.
    inline RmseTable run_monte_carlo(const ScenarioConfig &c, int workers = 1,
                                     const std::function<void(const RmseRow &)> &progress = {})
    {
        c.validate();
        std::vector<AlgorithmSetup> setups;
        for (const Algorithm a : c.algorithms)
            setups.push_back(make_setup(c, a));
        RmseTable table;
        for (const double snr : c.snr_db)
            for (const auto &s : setups)
            {
                RmseAccumulator acc;
                for (const auto &rec : run_trials(c, s, snr, workers))
                    acc.add(rec.match);
                table.push_back(acc.row(snr, to_string(s.algorithm)));
                if (progress)
                    progress(table.back());
            }
        return table;
    }

    // ----------------------------------------------------------------- runtime

    struct RuntimeRow
    {
        int nx = 0, ny = 0;
        std::string algorithm;
        double wall_seconds = 0.0; // median of the repetitions
    };
    using RuntimeReport = std::vector<RuntimeRow>;

    // Scales a configuration to another array size: one RF chain per row, near ranges kept
    // at the same fraction of the Rayleigh distance.
    inline ScenarioConfig resized(const ScenarioConfig &c, int nx, int ny)
    {
        ScenarioConfig r = c;
        const double zr = rayleigh_distance(c.geometry());
        r.nx = nx;
        r.ny = ny;
        r.n_rf = ny;
        r.ux = nx;
        r.uy = 1;
        for (auto &t : r.targets)
            if (t.kind == TargetKind::NearField && t.range > 0.0)
            {
                t.range_zr = t.range / zr;
                t.range = 0.0;
            }
        if (c.grids.range_min > 0.0 || c.grids.range_max > 0.0)
        {
            r.grids.range_min = 0.0;
            r.grids.range_max = 0.0;
        }
        return r;
    }

    // Wall time of the estimation step (covariance onwards) on one synthesized batch at the
    // highest configured SNR; every algorithm sees the same batch.
    inline RuntimeReport bench_runtime(const ScenarioConfig &c, const std::vector<std::pair<int, int>> &sizes, int repetitions = 5)
    {
        require(repetitions >= 1, "repetitions must be at least 1");
        RuntimeReport report;
        for (const auto &[nx, ny] : sizes)
        {
            const ScenarioConfig rc = resized(c, nx, ny);
            rc.validate();
            const double snr = *std::max_element(rc.snr_db.begin(), rc.snr_db.end());
            for (const Algorithm a : rc.algorithms)
            {
                const AlgorithmSetup s = make_setup(rc, a);
                const SnapshotBatch batch = trial_batch(rc, s, snr, 0);
                std::vector<double> times;
                for (int r = 0; r < repetitions; ++r)
                {
                    const auto t0 = std::chrono::steady_clock::now();
                    const LocalizationResult res = run_algorithm(s, batch, s.scene.size(), rc.thresholds);
                    const auto t1 = std::chrono::steady_clock::now();
                    (void)res;
                    times.push_back(std::chrono::duration<double>(t1 - t0).count());
                }
                std::sort(times.begin(), times.end());
                report.push_back({nx, ny, to_string(a), times[times.size() / 2]});
            }
        }
        return report;
    }

} // namespace mixedfield

#endif
