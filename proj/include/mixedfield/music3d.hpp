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

#ifndef MIXEDFIELD_MUSIC3D_HPP
#define MIXEDFIELD_MUSIC3D_HPP

#include "mixedfield/estimators.hpp"

namespace mixedfield
{
    struct Music3DGrid
    {
        int theta_points = 60;  // over [0, pi/2]
        int phi_points = 180;   // over [-pi, pi), cyclic
        int range_points = 30;  // logarithmic, plus one far-field sentinel
        int zoom_levels = 4;
        int zoom_points = 9;    // per axis and level
        double range_min = 0.0; // 0 selects the GridSpec default
        double range_max = 0.0;
    };

    // Joint (theta, phi, r) MUSIC: exhaustive coarse search, then local zoom around the k
    // strongest separated peaks. A peak at the sentinel is reported as far field.
    inline LocalizationResult baseline_3d_music(const SubspacePair &full, int k, const UpaGeometry &g, const Music3DGrid &grid)
    {
        require(full.dim() == g.n(), "subspaces do not match the array");
        require(grid.theta_points >= 2 && grid.phi_points >= 3 && grid.range_points >= 2 && grid.zoom_points >= 3,
                "3D grid is too small");
        GridSpec rs;
        rs.range_min = grid.range_min;
        rs.range_max = grid.range_max;
        rs = rs.resolved(g);
        const double inf = std::numeric_limits<double>::infinity();

        long evals = 0;
        auto value = [&](double theta, double phi, double r) {
            ++evals;
            const DirectionCosines dc = direction_cosines(theta, phi);
            const CVec v = std::isinf(r) ? CVec(far_steering(dc, g) / std::sqrt(double(g.n()))) : near_steering_exact(dc, r, g);
            return 1.0 / std::max(1.0 - (full.signal.adjoint() * v).squaredNorm(), 1e-15);
        };

        const int nt = grid.theta_points, np = grid.phi_points, nr = grid.range_points + 1;
        const double dt = 0.5 * kPi / (nt - 1), dp = 2.0 * kPi / np;
        std::vector<double> ranges = logspace(rs.range_min, rs.range_max, std::size_t(grid.range_points));
        ranges.push_back(inf);
        const double dlr = std::log(rs.range_max / rs.range_min) / (grid.range_points - 1);

        std::vector<double> cube(std::size_t(nt) * std::size_t(np) * std::size_t(nr));
        auto at = [&](int it, int ip, int ir) -> double & { return cube[(std::size_t(it) * np + std::size_t(ip)) * nr + std::size_t(ir)]; };
        for (int it = 0; it < nt; ++it)
            for (int ip = 0; ip < np; ++ip)
                for (int ir = 0; ir < nr; ++ir)
                    at(it, ip, ir) = value(it * dt, -kPi + ip * dp, ranges[std::size_t(ir)]);

        struct Cell
        {
            int it, ip, ir;
            double v;
        };
        std::vector<Cell> maxima;
        for (int it = 0; it < nt; ++it)
            for (int ip = 0; ip < np; ++ip)
                for (int ir = 0; ir < nr; ++ir)
                {
                    const double v = at(it, ip, ir);
                    bool peak = true;
                    for (int a = -1; a <= 1 && peak; ++a)
                        for (int b = -1; b <= 1 && peak; ++b)
                            for (int c = -1; c <= 1 && peak; ++c)
                            {
                                if (a == 0 && b == 0 && c == 0)
                                    continue;
                                const int jt = it + a, jr = ir + c, jp = (ip + b + np) % np;
                                if (jt < 0 || jt >= nt || jr < 0 || jr >= nr)
                                    continue;
                                const double w = at(jt, jp, jr);
                                const bool earlier = a < 0 || (a == 0 && (b < 0 || (b == 0 && c < 0)));
                                peak = earlier ? v > w : v >= w;
                            }
                    if (peak)
                        maxima.push_back({it, ip, ir, v});
                }
        std::stable_sort(maxima.begin(), maxima.end(), [](const Cell &x, const Cell &y) { return x.v > y.v; });

        std::vector<Cell> chosen;
        for (const auto &m : maxima)
        {
            if (int(chosen.size()) >= k)
                break;
            bool clash = false;
            for (const auto &c : chosen)
            {
                const int dpi = std::min(std::abs(c.ip - m.ip), np - std::abs(c.ip - m.ip));
                clash = clash || (std::abs(c.it - m.it) < 2 && dpi < 2);
            }
            if (!clash)
                chosen.push_back(m);
        }

        LocalizationResult res;
        if (int(chosen.size()) != k)
        {
            res.mismatch = true;
            res.warnings.push_back("MismatchWarning: 3D search found " + std::to_string(chosen.size()) + " peaks, expected " +
                                   std::to_string(k));
        }
        const int zp = grid.zoom_points;
        for (const auto &c : chosen)
        {
            const bool far = c.ir == nr - 1;
            double t0 = c.it * dt, p0 = -kPi + c.ip * dp, l0 = far ? 0.0 : std::log(ranges[std::size_t(c.ir)]);
            double ht = dt, hp = dp, hl = dlr;
            double best = c.v;
            for (int level = 0; level < grid.zoom_levels; ++level)
            {
                double bt = t0, bp = p0, bl = l0;
                for (int a = 0; a < zp; ++a)
                {
                    const double t = std::clamp(t0 - ht + 2.0 * ht * a / (zp - 1), 0.0, 0.5 * kPi);
                    for (int b = 0; b < zp; ++b)
                    {
                        const double p = p0 - hp + 2.0 * hp * b / (zp - 1);
                        for (int r = 0; r < (far ? 1 : zp); ++r)
                        {
                            const double l = far ? 0.0 : std::clamp(l0 - hl + 2.0 * hl * r / (zp - 1), std::log(rs.range_min), std::log(rs.range_max));
                            const double v = value(t, p, far ? inf : std::exp(l));
                            if (v > best)
                            {
                                best = v;
                                bt = t;
                                bp = p;
                                bl = l;
                            }
                        }
                    }
                }
                t0 = bt;
                p0 = bp;
                l0 = bl;
                const double shrink = 2.0 / (zp - 1);
                ht *= shrink;
                hp *= shrink;
                hl *= shrink;
            }
            TargetEstimate t;
            t.kind = far ? TargetKind::FarField : TargetKind::NearField;
            t.theta = t0;
            t.phi = std::remainder(p0, 2.0 * kPi);
            t.range = far ? inf : std::exp(l0);
            const DirectionCosines dc = direction_cosines(t.theta, t.phi);
            t.alpha = dc.alpha;
            t.beta = dc.beta;
            t.score = best;
            res.targets.push_back(t);
        }
        res.evaluations = evals;
        return res;
    }

} // namespace mixedfield

#endif
