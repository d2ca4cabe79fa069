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

#ifndef MIXEDFIELD_ESTIMATORS_HPP
#define MIXEDFIELD_ESTIMATORS_HPP

#include "mixedfield/geometry.hpp"
#include "mixedfield/peaks.hpp"
#include "mixedfield/subspace.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace mixedfield
{
    enum class RangeScale
    {
        Linear,
        Logarithmic
    };

    struct GridSpec
    {
        int alpha_points = 2000; // over [-1, 1]
        int beta_points = 2000;  // over [-1, 1]
        int range_points = 400;
        double range_min = 0.0; // 0 selects twice the aperture diagonal
        double range_max = 0.0; // 0 selects the Rayleigh distance
        RangeScale range_scale = RangeScale::Logarithmic;

        double alpha_cell() const { return 2.0 / double(alpha_points - 1); }
        double beta_cell() const { return 2.0 / double(beta_points - 1); }

        GridSpec resolved(const UpaGeometry &g) const
        {
            GridSpec r = *this;
            if (r.range_max <= 0.0)
                r.range_max = rayleigh_distance(g);
            if (r.range_min <= 0.0)
                r.range_min = 2.0 * g.aperture_diagonal();
            r.validate();
            return r;
        }

        void validate() const
        {
            require(alpha_points >= 2 && beta_points >= 2 && range_points >= 2, "grid point counts must be at least 2");
            require(range_min > 0.0 && range_max > range_min, "range grid needs 0 < range_min < range_max");
        }

        std::vector<double> range_grid() const
        {
            validate();
            return range_scale == RangeScale::Logarithmic ? logspace(range_min, range_max, std::size_t(range_points))
                                                          : linspace(range_min, range_max, std::size_t(range_points));
        }
    };

    // Samples of the uniform grid {-1 + i * 2/(points-1)} that fall inside [lo, hi].
    inline std::vector<double> cosine_axis(int points, double lo = -1.0, double hi = 1.0)
    {
        lo = std::max(lo, -1.0);
        hi = std::min(hi, 1.0);
        std::vector<double> v;
        if (hi < lo)
            return v;
        const double step = 2.0 / double(points - 1);
        const int i0 = std::max(0, int(std::ceil((lo + 1.0) / step - 1e-9)));
        const int i1 = std::min(points - 1, int(std::floor((hi + 1.0) / step + 1e-9)));
        for (int i = i0; i <= i1; ++i)
            v.push_back(i == points - 1 ? 1.0 : -1.0 + step * i);
        return v;
    }

    // ------------------------------------------------------------ virtual array

    inline CVec supa_axis_steering(double cosine, int m, const UpaGeometry &g)
    {
        const double psi = g.supa_phase();
        CVec v(m);
        for (int i = 0; i < m; ++i)
            v(i) = std::polar(1.0, psi * i * cosine);
        return v;
    }

    inline CVec supa_steering(const DirectionCosines &dc, const UpaGeometry &g)
    {
        const CVec ax = supa_axis_steering(dc.alpha, g.supa_nx(), g);
        const CVec ay = supa_axis_steering(dc.beta, g.supa_ny(), g);
        CVec a(ax.size() * ay.size());
        for (int iy = 0; iy < ay.size(); ++iy)
            a.segment(iy * ax.size(), ax.size()) = ay(iy) * ax;
        return a;
    }

    // T(beta) = (a_y(beta) (x) I)^H Un Un^H (a_y(beta) (x) I), formed from the signal basis.
    // ay is the y-axis steering, us the signal basis of an (ay.size() * m) dimensional space.
    inline CMat decoupled_t_matrix(const CMat &us, const CVec &ay, int m)
    {
        CMat proj = CMat::Zero(m, us.cols());
        for (int iy = 0; iy < ay.size(); ++iy)
            proj.noalias() += std::conj(ay(iy)) * us.middleRows(iy * m, m);
        CMat t = ay.squaredNorm() * CMat::Identity(m, m) - proj * proj.adjoint();
        return hermitian_part(t);
    }

    // [T^{-1}]_{cc}; diagonal loading when T is numerically singular, NaN if that fails too.
    inline double selected_inverse_entry(const CMat &t, int c)
    {
        Eigen::LDLT<CMat> ldlt(t);
        if (ldlt.info() != Eigen::Success || !(ldlt.rcond() >= 1e-12))
        {
            const double eps = 1e-10 * std::max(t.trace().real(), 1e-300) / double(t.rows());
            ldlt.compute(t + eps * CMat::Identity(t.rows(), t.cols()));
            if (ldlt.info() != Eigen::Success)
                return std::numeric_limits<double>::quiet_NaN();
        }
        CVec e = CVec::Zero(t.rows());
        e(c) = 1.0;
        const double v = ldlt.solve(e)(c).real();
        return std::isfinite(v) && v > 0.0 ? v : std::numeric_limits<double>::quiet_NaN();
    }

    // F(beta) = c^H T(beta)^{-1} c on the virtual array, optionally restricted to [lo, hi].
    inline Spectrum beta_spectrum(const SubspacePair &supa, const UpaGeometry &g, const GridSpec &grid,
                                  double lo = -1.0, double hi = 1.0)
    {
        const int mx = g.supa_nx(), my = g.supa_ny();
        require(supa.dim() == mx * my, "subspaces do not match the virtual array");
        Spectrum s;
        s.x = cosine_axis(grid.beta_points, lo, hi);
        s.y.reserve(s.x.size());
        for (double b : s.x)
            s.y.push_back(selected_inverse_entry(decoupled_t_matrix(supa.signal, supa_axis_steering(b, my, g), mx), mx / 2));
        return s;
    }

    // 1 / (a_x^H T(beta) a_x), normalized by the virtual aperture.
    inline Spectrum alpha_spectrum(const SubspacePair &supa, double beta, const UpaGeometry &g, const GridSpec &grid,
                                   double lo = -1.0, double hi = 1.0)
    {
        const int mx = g.supa_nx(), my = g.supa_ny();
        require(supa.dim() == mx * my, "subspaces do not match the virtual array");
        const CMat t = decoupled_t_matrix(supa.signal, supa_axis_steering(beta, my, g), mx);
        const double norm = double(mx * my);
        Spectrum s;
        s.x = cosine_axis(grid.alpha_points, lo, hi);
        s.y.reserve(s.x.size());
        for (double a : s.x)
        {
            const CVec v = supa_axis_steering(a, mx, g);
            const double den = (v.adjoint() * t * v)(0, 0).real() / norm;
            s.y.push_back(1.0 / std::max(den, 1e-15));
        }
        return s;
    }

    // ------------------------------------------------------------ candidates

    // Image of a cosine under the virtual-array ambiguity: v - P for v >= 0, v + P otherwise.
    inline double ambiguity_image(double v, double period) { return v >= 0.0 ? v - period : v + period; }

    enum class CandidateSlot
    {
        Detected = 1,   // (alpha, beta) as detected
        AlphaImage = 2, // (alpha image, beta)
        BetaImage = 3,  // (alpha, beta image)
        BothImages = 4
    };

    struct CandidatePair
    {
        double alpha = 0.0;
        double beta = 0.0;
        int source_peak = 0; // index of the beta peak that spawned it
        CandidateSlot slot = CandidateSlot::Detected;

        bool physical() const { return DirectionCosines{alpha, beta}.physical(); }
    };

    struct CandidateAngleSet
    {
        std::vector<CandidatePair> pairs;
        std::vector<std::string> warnings;
        long evaluations = 0; // spectrum points evaluated
    };

    // Every (alpha, beta) peak spawns its images under the sign rules; pairs closer than one
    // grid cell in both coordinates are merged.
    inline CandidateAngleSet enumerate_candidates(const std::vector<Peak> &beta_peaks,
                                                  const std::vector<std::vector<Peak>> &alpha_peaks_per_beta,
                                                  double period, double alpha_cell, double beta_cell)
    {
        require(alpha_peaks_per_beta.size() == beta_peaks.size(), "need one alpha peak list per beta peak");
        CandidateAngleSet set;
        auto add = [&](double a, double b, int src, CandidateSlot slot) {
            if (std::abs(a) > 1.0 + 1e-12 || std::abs(b) > 1.0 + 1e-12)
                return;
            for (const auto &p : set.pairs)
                if (std::abs(p.alpha - a) < alpha_cell && std::abs(p.beta - b) < beta_cell)
                    return;
            set.pairs.push_back({a, b, src, slot});
        };
        for (std::size_t i = 0; i < beta_peaks.size(); ++i)
        {
            const double b = beta_peaks[i].position;
            const double bi = ambiguity_image(b, period);
            for (const auto &ap : alpha_peaks_per_beta[i])
            {
                const double a = ap.position;
                const double ai = ambiguity_image(a, period);
                add(a, b, int(i), CandidateSlot::Detected);
                add(ai, b, int(i), CandidateSlot::AlphaImage);
                add(a, bi, int(i), CandidateSlot::BetaImage);
                add(ai, bi, int(i), CandidateSlot::BothImages);
            }
            if (alpha_peaks_per_beta[i].empty())
                set.warnings.push_back("no alpha peak for beta = " + std::to_string(b));
        }
        return set;
    }

    // ------------------------------------------------------------ range domain

    // 1 / (1 - ||Us^H b(r)||^2) over the range grid at a fixed direction.
    inline Spectrum range_spectrum(const SubspacePair &full, const DirectionCosines &dc, const std::vector<double> &ranges,
                                   const UpaGeometry &g, SteeringModel model = SteeringModel::Exact)
    {
        require(full.dim() == g.n(), "subspaces do not match the array");
        Spectrum s;
        s.x = ranges;
        s.y.reserve(ranges.size());
        for (double r : ranges)
        {
            const CVec b = near_steering(model, dc, r, g);
            const double c = (full.signal.adjoint() * b).squaredNorm();
            s.y.push_back(1.0 / std::max(1.0 - c, 1e-15));
        }
        return s;
    }

    enum class PatternLabel
    {
        NearField, // peaked inside the range grid
        FarField,  // monotonically increasing towards the far end
        Ambiguous  // flat
    };

    inline const char *to_string(PatternLabel l)
    {
        switch (l)
        {
        case PatternLabel::NearField:
            return "near";
        case PatternLabel::FarField:
            return "far";
        default:
            return "ambiguous";
        }
    }

    struct PatternThresholds
    {
        double tau_amb = 2.0;     // minimum max/median prominence
        double tau_mono = 0.9;    // minimum weighted fraction of increasing steps
        double far_window = 0.02; // fraction of the grid counted as "far end"
    };

    struct Classification
    {
        PatternLabel label = PatternLabel::Ambiguous;
        double range_est = std::numeric_limits<double>::infinity();
        double prominence = 0.0;
        double monotonicity = 0.0;
        int argmax = -1;
    };

    inline double median(std::vector<double> v)
    {
        if (v.empty())
            return 0.0;
        const auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
        std::nth_element(v.begin(), mid, v.end());
        double m = *mid;
        if (v.size() % 2 == 0)
            m = 0.5 * (m + *std::max_element(v.begin(), mid));
        return m;
    }

    // Monotonicity is measured on the spectrum in dB, weighting each step by its size.
    inline Classification classify_pattern(const Spectrum &s, const PatternThresholds &th = {})
    {
        Classification c;
        const int n = int(s.size());
        if (n < 3)
            return c;
        const auto it = std::max_element(s.y.begin(), s.y.end());
        c.argmax = int(it - s.y.begin());
        const double med = median(s.y);
        c.prominence = med > 0.0 ? *it / med : std::numeric_limits<double>::infinity();
        double up = 0.0, total = 0.0;
        for (int i = 1; i < n; ++i)
        {
            const double d = 10.0 * (std::log10(std::max(s.y[std::size_t(i)], 1e-300)) -
                                     std::log10(std::max(s.y[std::size_t(i - 1)], 1e-300)));
            up += std::max(d, 0.0);
            total += std::abs(d);
        }
        c.monotonicity = total > 0.0 ? up / total : 0.0;

        if (c.prominence < th.tau_amb)
            return c;
        const int window = std::max(1, int(std::lround(th.far_window * n)));
        if (c.argmax >= n - window && c.monotonicity >= th.tau_mono)
        {
            c.label = PatternLabel::FarField;
            return c;
        }
        c.label = PatternLabel::NearField;
        c.range_est = s.x[std::size_t(c.argmax)];
        if (c.argmax > 0 && c.argmax < n - 1)
        {
            const int i = c.argmax;
            const double d = parabolic_offset(safe_log(s.y[std::size_t(i - 1)]), safe_log(s.y[std::size_t(i)]),
                                              safe_log(s.y[std::size_t(i + 1)]));
            const double l0 = std::log(s.x[std::size_t(i)]);
            const double h = d > 0 ? std::log(s.x[std::size_t(i + 1)]) - l0 : l0 - std::log(s.x[std::size_t(i - 1)]);
            c.range_est = std::exp(l0 + d * h);
        }
        return c;
    }

    // ------------------------------------------------------------ pipeline

    struct LocalizeOptions
    {
        PatternThresholds thresholds;
        double sigma2 = -1.0; // < 0: mean of the N - K smallest eigenvalues
        bool center_correct = true;
        SteeringModel model = SteeringModel::Exact;
        bool dft_coarse = false;
        bool keep_spectra = false;
    };

    struct TargetEstimate
    {
        TargetKind kind = TargetKind::FarField;
        double theta = 0.0;
        double phi = 0.0;
        double range = std::numeric_limits<double>::infinity();
        double alpha = 0.0;
        double beta = 0.0;
        double score = 0.0; // range-spectrum prominence
    };

    struct CandidateReport
    {
        CandidatePair pair;
        Classification cls;
        bool physical = true;
        Spectrum spectrum; // kept only on request
    };

    struct LocalizationResult
    {
        std::vector<TargetEstimate> targets;
        std::vector<CandidateReport> candidates;
        std::vector<std::string> warnings;
        bool mismatch = false;
        long evaluations = 0;
        Spectrum beta_spectrum; // kept only on request
    };

    // Everything the angular and range searches need, derived from one covariance.
    struct SubspaceBundle
    {
        SubspacePair full;
        double sigma2 = 0.0;
        AntiDiagonalVector anti;
        SupaCovariance supa;
        SubspacePair supa_sub;
    };

    inline SubspaceBundle prepare_subspaces(const Covariance &cov, int k, const UpaGeometry &g, const LocalizeOptions &opt = {})
    {
        require(cov.n() == g.n(), "covariance does not match the array");
        require(k >= 1 && k < g.supa_n(), "target count must satisfy 1 <= K < virtual aperture");
        SubspaceBundle b;
        b.full = eigendecompose_split(cov.matrix, k, EigenOrder::ByValue);
        b.sigma2 = opt.sigma2 >= 0.0 ? opt.sigma2 : noise_floor(b.full);
        b.anti = antidiagonal_extract(cov, b.sigma2, opt.center_correct);
        b.supa = build_supa_covariance(b.anti, g);
        b.supa_sub = eigendecompose_split(b.supa.matrix, k, EigenOrder::ByMagnitude);
        return b;
    }

    inline int beta_peaks_wanted(int k, const UpaGeometry &g) { return g.ambiguity_period() <= 1.0 + 1e-12 ? 2 * k : k; }
    inline int alpha_peaks_wanted(const UpaGeometry &g) { return g.ambiguity_period() <= 1.0 + 1e-12 ? 2 : 1; }

    inline CandidateAngleSet search_candidates(const SubspaceBundle &b, int k, const UpaGeometry &g, const GridSpec &grid,
                                               Spectrum *beta_dump = nullptr)
    {
        const Spectrum bs = beta_spectrum(b.supa_sub, g, grid);
        const auto bp = find_peaks(bs, beta_peaks_wanted(k, g));
        std::vector<std::vector<Peak>> ap;
        long evals = long(bs.size());
        for (const auto &p : bp)
        {
            const Spectrum as = alpha_spectrum(b.supa_sub, p.position, g, grid);
            evals += long(as.size());
            ap.push_back(find_peaks(as, alpha_peaks_wanted(g)));
        }
        CandidateAngleSet set = enumerate_candidates(bp, ap, g.ambiguity_period(), grid.alpha_cell(), grid.beta_cell());
        if (int(bp.size()) < beta_peaks_wanted(k, g))
            set.warnings.push_back("found " + std::to_string(bp.size()) + " beta peaks, expected " +
                                   std::to_string(beta_peaks_wanted(k, g)));
        set.evaluations = evals;
        if (beta_dump)
            *beta_dump = bs;
        return set;
    }

    // Range-domain classification of every candidate, then selection of the k strongest
    // non-ambiguous ones.
    inline LocalizationResult classify_candidates(const CandidateAngleSet &set, const SubspacePair &full, int k,
                                                  const UpaGeometry &g, const GridSpec &grid, const LocalizeOptions &opt)
    {
        LocalizationResult res;
        res.warnings = set.warnings;
        res.evaluations = set.evaluations;
        const GridSpec rg = grid.resolved(g);
        const std::vector<double> ranges = rg.range_grid();
        for (const auto &p : set.pairs)
        {
            CandidateReport rep;
            rep.pair = p;
            rep.physical = p.physical();
            if (rep.physical)
            {
                Spectrum s = range_spectrum(full, {p.alpha, p.beta}, ranges, g, opt.model);
                res.evaluations += long(s.size());
                rep.cls = classify_pattern(s, opt.thresholds);
                if (opt.keep_spectra)
                    rep.spectrum = std::move(s);
            }
            res.candidates.push_back(std::move(rep));
        }

        std::vector<const CandidateReport *> labelled;
        for (const auto &c : res.candidates)
            if (c.physical && c.cls.label != PatternLabel::Ambiguous)
                labelled.push_back(&c);
        std::stable_sort(labelled.begin(), labelled.end(),
                         [](const CandidateReport *a, const CandidateReport *b) { return a->cls.prominence > b->cls.prominence; });
        if (int(labelled.size()) != k)
        {
            res.mismatch = true;
            res.warnings.push_back("MismatchWarning: " + std::to_string(labelled.size()) + " candidates classified as targets, expected " +
                                   std::to_string(k));
        }
        for (std::size_t i = 0; i < labelled.size() && int(i) < k; ++i)
        {
            const auto &c = *labelled[i];
            TargetEstimate t;
            t.alpha = c.pair.alpha;
            t.beta = c.pair.beta;
            std::tie(t.theta, t.phi) = angles_from_cosines({t.alpha, t.beta});
            t.kind = c.cls.label == PatternLabel::NearField ? TargetKind::NearField : TargetKind::FarField;
            t.range = c.cls.range_est;
            t.score = c.cls.prominence;
            res.targets.push_back(t);
        }
        return res;
    }

} // namespace mixedfield

#endif
