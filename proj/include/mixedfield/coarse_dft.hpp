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

#ifndef MIXEDFIELD_COARSE_DFT_HPP
#define MIXEDFIELD_COARSE_DFT_HPP

#include "mixedfield/estimators.hpp"

#include <array>

namespace mixedfield
{
    struct CoarsePeak
    {
        int i = 0; // 0-based frequency index along x
        int j = 0; // along y
        double magnitude = 0.0;
        std::array<double, 2> alpha{}; // {P i/Nx, P i/Nx - P}
        std::array<double, 2> beta{};
    };

    struct CoarseEstimate
    {
        std::vector<CoarsePeak> peaks;
        double resolution_x = 0.0; // cosine units per bin
        double resolution_y = 0.0;
        std::vector<std::string> warnings;
    };

    // |D_x M D_y| with 1/N normalization, M(ix, iy) = anti(ix + iy nx).
    inline RMat dft_magnitude(const AntiDiagonalVector &anti, const UpaGeometry &g)
    {
        require(anti.entries.size() == g.n(), "anti-diagonal length does not match the geometry");
        CMat m(g.nx, g.ny);
        for (int iy = 0; iy < g.ny; ++iy)
            for (int ix = 0; ix < g.nx; ++ix)
                m(ix, iy) = anti.entries(ix + iy * g.nx);
        auto dft = [](int n) {
            CMat d(n, n);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    d(a, b) = std::polar(1.0 / n, -2.0 * kPi * double((long(a) * b) % n) / n);
            return d;
        };
        return (dft(g.nx) * m * dft(g.ny)).cwiseAbs();
    }

    // The k strongest cyclic local maxima of the 2D DFT of the rearranged anti-diagonal.
    inline CoarseEstimate dft_coarse_estimate(const AntiDiagonalVector &anti, const UpaGeometry &g, int k)
    {
        const RMat mag = dft_magnitude(anti, g);
        const double p = g.ambiguity_period();
        CoarseEstimate out;
        out.resolution_x = p / g.nx;
        out.resolution_y = p / g.ny;

        std::vector<CoarsePeak> all;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
            {
                const double v = mag(i, j);
                bool peak = true;
                for (int di = -1; di <= 1 && peak; ++di)
                    for (int dj = -1; dj <= 1 && peak; ++dj)
                    {
                        if (di == 0 && dj == 0)
                            continue;
                        const int ii = (i + di + g.nx) % g.nx, jj = (j + dj + g.ny) % g.ny;
                        if (ii == i && jj == j)
                            continue;
                        const double w = mag(ii, jj);
                        // strict against earlier neighbours so plateaus yield one peak
                        peak = (di < 0 || (di == 0 && dj < 0)) ? v > w : v >= w;
                    }
                if (peak)
                {
                    CoarsePeak c;
                    c.i = i;
                    c.j = j;
                    c.magnitude = v;
                    c.alpha = {p * i / g.nx, p * i / g.nx - p};
                    c.beta = {p * j / g.ny, p * j / g.ny - p};
                    all.push_back(c);
                }
            }
        std::stable_sort(all.begin(), all.end(), [](const CoarsePeak &a, const CoarsePeak &b) { return a.magnitude > b.magnitude; });
        std::vector<double> flat(mag.data(), mag.data() + mag.size());
        const double floor = median(flat);
        for (const auto &c : all)
        {
            if (int(out.peaks.size()) >= k)
                break;
            if (c.magnitude < 3.0 * floor)
                out.warnings.push_back("weak DFT peak at (" + std::to_string(c.i) + ", " + std::to_string(c.j) + ")");
            out.peaks.push_back(c);
        }
        if (int(out.peaks.size()) < k)
            out.warnings.push_back("found " + std::to_string(out.peaks.size()) + " DFT peaks, expected " + std::to_string(k));
        return out;
    }

    // First candidate of a coarse pair that lies in [-1, 1].
    inline double physical_coarse(const std::array<double, 2> &c)
    {
        return std::abs(c[0]) <= 1.0 ? c[0] : c[1];
    }

    // Decoupled MUSIC restricted to one DFT bin either side of each coarse estimate. A beta
    // window may also hold a neighbouring target's beta, so the two strongest beta peaks are
    // tried and the one whose alpha search finds the deeper null is kept.
    inline CandidateAngleSet refine_with_coarse(const CoarseEstimate &coarse, const SubspacePair &supa, const UpaGeometry &g,
                                                const GridSpec &grid)
    {
        std::vector<Peak> bp;
        std::vector<std::vector<Peak>> ap;
        long evals = 0;
        for (const auto &c : coarse.peaks)
        {
            const double b0 = physical_coarse(c.beta), a0 = physical_coarse(c.alpha);
            const Spectrum bs = beta_spectrum(supa, g, grid, b0 - coarse.resolution_y, b0 + coarse.resolution_y);
            evals += long(bs.size());
            auto bpk = find_peaks(bs, 2);
            if (bpk.empty())
                bpk.push_back({0, b0, 0.0});
            Peak best_b{}, best_a{0, a0, -1.0};
            for (const auto &b : bpk)
            {
                const Spectrum as = alpha_spectrum(supa, b.position, g, grid, a0 - coarse.resolution_x, a0 + coarse.resolution_x);
                evals += long(as.size());
                const auto apk = find_peaks(as, 1);
                if (!apk.empty() && apk[0].value > best_a.value)
                {
                    best_a = apk[0];
                    best_b = b;
                }
            }
            if (best_a.value < 0.0)
                best_b = bpk[0];
            bp.push_back(best_b);
            ap.push_back({best_a});
        }
        CandidateAngleSet set = enumerate_candidates(bp, ap, g.ambiguity_period(), grid.alpha_cell(), grid.beta_cell());
        set.warnings.insert(set.warnings.end(), coarse.warnings.begin(), coarse.warnings.end());
        set.evaluations = evals;
        return set;
    }

} // namespace mixedfield

#endif
