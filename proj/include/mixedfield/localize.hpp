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

#ifndef MIXEDFIELD_LOCALIZE_HPP
#define MIXEDFIELD_LOCALIZE_HPP

#include "mixedfield/coarse_dft.hpp"
#include "mixedfield/estimators.hpp"

namespace mixedfield
{
    inline LocalizationResult localize(const Covariance &cov, int k, const UpaGeometry &g, const GridSpec &grid,
                                       const LocalizeOptions &opt = {})
    {
        const SubspaceBundle b = prepare_subspaces(cov, k, g, opt);
        Spectrum bdump;
        CandidateAngleSet set;
        if (opt.dft_coarse)
        {
            const CoarseEstimate coarse = dft_coarse_estimate(b.anti, g, k);
            set = refine_with_coarse(coarse, b.supa_sub, g, grid);
        }
        else
            set = search_candidates(b, k, g, grid, opt.keep_spectra ? &bdump : nullptr);
        LocalizationResult res = classify_candidates(set, b.full, k, g, grid, opt);
        res.beta_spectrum = std::move(bdump);
        return res;
    }

    inline LocalizationResult localize(const SnapshotBatch &batch, int k, const UpaGeometry &g, const GridSpec &grid,
                                       const LocalizeOptions &opt = {})
    {
        return localize(sample_covariance(batch), k, g, grid, opt);
    }

    // ------------------------------------------------------------ legacy detector

    // Far-field-only decoupled MUSIC on the physical array (r -> infinity). Every detection is
    // reported as far field, which is exactly how it mislabels near targets.
    inline Spectrum legacy_beta_spectrum(const SubspacePair &full, const UpaGeometry &g, const GridSpec &grid)
    {
        require(full.dim() == g.n(), "subspaces do not match the array");
        const double kd = g.wavenumber() * g.d0;
        Spectrum s;
        s.x = cosine_axis(grid.beta_points);
        for (double b : s.x)
        {
            CVec ay(g.ny);
            for (int i = 0; i < g.ny; ++i)
                ay(i) = std::polar(1.0, kd * (i - g.half_y()) * b);
            s.y.push_back(selected_inverse_entry(decoupled_t_matrix(full.signal, ay, g.nx), g.half_x()));
        }
        return s;
    }

    struct LegacyDetection
    {
        std::vector<TargetEstimate> targets; // all labelled far field
        Spectrum beta;
    };

    inline LegacyDetection legacy_far_detector(const SubspacePair &full, int k, const UpaGeometry &g, const GridSpec &grid,
                                               double tau = 1.0)
    {
        LegacyDetection out;
        out.beta = legacy_beta_spectrum(full, g, grid);
        const double med = median(out.beta.y);
        const double kd = g.wavenumber() * g.d0;
        for (const auto &bp : find_peaks(out.beta, k))
        {
            if (!(bp.value >= tau * med))
                continue;
            CVec ay(g.ny);
            for (int i = 0; i < g.ny; ++i)
                ay(i) = std::polar(1.0, kd * (i - g.half_y()) * bp.position);
            const CMat t = decoupled_t_matrix(full.signal, ay, g.nx);
            Spectrum as;
            as.x = cosine_axis(grid.alpha_points);
            for (double a : as.x)
            {
                CVec ax(g.nx);
                for (int i = 0; i < g.nx; ++i)
                    ax(i) = std::polar(1.0, kd * (i - g.half_x()) * a);
                as.y.push_back(1.0 / std::max((ax.adjoint() * t * ax)(0, 0).real() / double(g.n()), 1e-15));
            }
            const auto ap = find_peaks(as, 1);
            if (ap.empty())
                continue;
            TargetEstimate t0;
            t0.alpha = ap[0].position;
            t0.beta = bp.position;
            if (!DirectionCosines{t0.alpha, t0.beta}.physical())
                continue;
            std::tie(t0.theta, t0.phi) = angles_from_cosines({t0.alpha, t0.beta});
            t0.score = bp.value / std::max(med, 1e-300);
            out.targets.push_back(t0);
        }
        return out;
    }

} // namespace mixedfield

#endif
