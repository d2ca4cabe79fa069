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

#ifndef MIXEDFIELD_PEAKS_HPP
#define MIXEDFIELD_PEAKS_HPP

#include "mixedfield/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mixedfield
{
    // A sampled 1D spectrum. Invalid samples (failed solves) are NaN and never peak.
    struct Spectrum
    {
        std::vector<double> x;
        std::vector<double> y;

        std::size_t size() const { return x.size(); }
    };

    struct Peak
    {
        int index = 0;         // grid index of the local maximum
        double position = 0.0; // refined position
        double value = 0.0;    // spectrum value at the grid maximum
    };

    // Vertex offset of the parabola through (-1, ym), (0, y0), (1, yp), clamped to [-0.5, 0.5].
    inline double parabolic_offset(double ym, double y0, double yp)
    {
        const double den = ym - 2.0 * y0 + yp;
        if (!(den < 0.0))
            return 0.0;
        return std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
    }

    inline double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

    // Local maxima (endpoints count when they beat their single neighbour), strongest first,
    // at least min_separation samples apart. Positions are refined by a parabola fitted to
    // the log-spectrum; log_x refines in log(x) instead, for logarithmic grids.
    inline std::vector<Peak> find_peaks(const Spectrum &s, int max_peaks, int min_separation = 3, bool log_x = false)
    {
        const int n = int(s.size());
        std::vector<Peak> all;
        auto ok = [&](int i) { return i >= 0 && i < n && std::isfinite(s.y[std::size_t(i)]); };
        for (int i = 0; i < n; ++i)
        {
            if (!ok(i))
                continue;
            const double v = s.y[std::size_t(i)];
            const bool left = !ok(i - 1) || v > s.y[std::size_t(i - 1)];
            const bool right = !ok(i + 1) || v >= s.y[std::size_t(i + 1)];
            if (left && right && (ok(i - 1) || ok(i + 1)))
                all.push_back({i, s.x[std::size_t(i)], v});
        }
        std::stable_sort(all.begin(), all.end(), [](const Peak &a, const Peak &b) { return a.value > b.value; });

        std::vector<Peak> out;
        for (const auto &p : all)
        {
            if (int(out.size()) >= max_peaks)
                break;
            bool clash = false;
            for (const auto &q : out)
                clash = clash || std::abs(q.index - p.index) < min_separation;
            if (clash)
                continue;
            Peak r = p;
            const int i = p.index;
            if (ok(i - 1) && ok(i + 1))
            {
                const double d = parabolic_offset(safe_log(s.y[std::size_t(i - 1)]), safe_log(p.value), safe_log(s.y[std::size_t(i + 1)]));
                if (log_x)
                {
                    const double lm = std::log(s.x[std::size_t(i - 1)]), l0 = std::log(s.x[std::size_t(i)]), lp = std::log(s.x[std::size_t(i + 1)]);
                    r.position = std::exp(l0 + d * (d > 0 ? lp - l0 : l0 - lm));
                }
                else
                {
                    const double h = d > 0 ? s.x[std::size_t(i + 1)] - s.x[std::size_t(i)] : s.x[std::size_t(i)] - s.x[std::size_t(i - 1)];
                    r.position = s.x[std::size_t(i)] + d * h;
                }
            }
            out.push_back(r);
        }
        return out;
    }

} // namespace mixedfield

#endif
