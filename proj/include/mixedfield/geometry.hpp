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

#ifndef MIXEDFIELD_GEOMETRY_HPP
#define MIXEDFIELD_GEOMETRY_HPP

#include "mixedfield/core.hpp"

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace mixedfield
{
    // Uniform planar array in the xy-plane, centred at the origin.
    // Antenna (n_x, n_y) sits at (n_x d0, n_y d0, 0) with n_x in [-(nx-1)/2, (nx-1)/2].
    // Linear (0-based) index p = (n_x + hx) + (n_y + hy) nx, i.e. x runs fastest and
    // every array-domain vector is ordered as a_y (x) a_x.
    struct UpaGeometry
    {
        int nx = 1;
        int ny = 1;
        double d0 = 0.0;         // element spacing [m]
        double wavelength = 0.0; // [m]
        double frequency = 0.0;  // [Hz]

        static UpaGeometry from_frequency(int nx, int ny, double frequency_hz, double d0_over_lambda = 0.5)
        {
            require(frequency_hz > 0.0, "frequency must be positive");
            const double lambda = kSpeedOfLight / frequency_hz;
            UpaGeometry g{nx, ny, d0_over_lambda * lambda, lambda, frequency_hz};
            g.validate();
            return g;
        }

        static UpaGeometry from_wavelength(int nx, int ny, double d0, double wavelength)
        {
            require(wavelength > 0.0, "wavelength must be positive");
            UpaGeometry g{nx, ny, d0, wavelength, kSpeedOfLight / wavelength};
            g.validate();
            return g;
        }

        void validate() const
        {
            require(nx >= 1 && ny >= 1, "array dimensions must be positive");
            require(nx % 2 == 1 && ny % 2 == 1, "nx and ny must be odd (got " + std::to_string(nx) + "x" + std::to_string(ny) + ")");
            require(d0 > 0.0 && wavelength > 0.0, "spacing and wavelength must be positive");
        }

        int n() const { return nx * ny; }
        int half_x() const { return (nx - 1) / 2; }
        int half_y() const { return (ny - 1) / 2; }
        double wavenumber() const { return 2.0 * kPi / wavelength; }

        // Virtual sparse array built from anti-diagonals: ((nx+1)/2) x ((ny+1)/2), spacing 2 d0.
        int supa_nx() const { return (nx + 1) / 2; }
        int supa_ny() const { return (ny + 1) / 2; }
        int supa_n() const { return supa_nx() * supa_ny(); }
        // Phase advance per virtual element per unit direction cosine.
        double supa_phase() const { return wavenumber() * 2.0 * d0; }
        // Grating-lobe period of the virtual array in direction-cosine units (1 at d0 = lambda/2).
        double ambiguity_period() const { return wavelength / (2.0 * d0); }

        double aperture_diagonal() const
        {
            return d0 * std::hypot(double(nx - 1), double(ny - 1));
        }
    };

    inline double rayleigh_distance(const UpaGeometry &g)
    {
        return 2.0 * (double(g.nx) * g.nx * g.d0 * g.d0 + double(g.ny) * g.ny * g.d0 * g.d0) / g.wavelength;
    }

    // 1-based antenna number n -> signed lattice coordinates (n_x, n_y).
    inline std::pair<int, int> antenna_index(int n, const UpaGeometry &g)
    {
        if (n < 1 || n > g.n())
            throw ConfigError("antenna index " + std::to_string(n) + " outside 1.." + std::to_string(g.n()));
        const int p = n - 1;
        return {p % g.nx - g.half_x(), p / g.nx - g.half_y()};
    }

    inline int linear_index(int n_x, int n_y, const UpaGeometry &g)
    {
        if (std::abs(n_x) > g.half_x() || std::abs(n_y) > g.half_y())
            throw ConfigError("lattice coordinate outside the array");
        return n_x + n_y * g.nx + (g.n() - 1) / 2; // 0-based
    }

    struct DirectionCosines
    {
        double alpha = 0.0; // sin(theta) cos(phi), pairs with the x-axis
        double beta = 0.0;  // sin(theta) sin(phi), pairs with the y-axis

        bool physical() const { return alpha * alpha + beta * beta <= 1.0 + 1e-12; }
    };

    inline DirectionCosines direction_cosines(double theta, double phi)
    {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi)};
    }

    // (alpha, beta) -> (theta, phi). Throws NotPhysical outside the unit disc.
    inline std::pair<double, double> angles_from_cosines(const DirectionCosines &dc)
    {
        const double s2 = dc.alpha * dc.alpha + dc.beta * dc.beta;
        if (s2 > 1.0 + 1e-12)
            throw NotPhysical("direction cosines outside the unit disc");
        const double theta = std::asin(std::sqrt(std::min(s2, 1.0)));
        const double phi = std::arg(cplx(dc.alpha, dc.beta));
        return {theta, phi};
    }

    enum class TargetKind
    {
        FarField,
        NearField
    };

    struct TargetTruth
    {
        TargetKind kind = TargetKind::FarField;
        double theta = 0.0; // elevation [rad], [0, pi/2]
        double phi = 0.0;   // azimuth [rad], [-pi, pi]
        double range = std::numeric_limits<double>::infinity();
        double power = 1.0; // g_k

        DirectionCosines cosines() const { return direction_cosines(theta, phi); }
        bool near() const { return kind == TargetKind::NearField; }
    };

    inline TargetTruth far_target(double theta, double phi, double power = 1.0)
    {
        return {TargetKind::FarField, theta, phi, std::numeric_limits<double>::infinity(), power};
    }

    inline TargetTruth near_target(double theta, double phi, double range, double power = 1.0)
    {
        return {TargetKind::NearField, theta, phi, range, power};
    }

    // Targets are always held far-first, matching the column order of G = [A, B].
    class Scene
    {
    public:
        Scene() = default;
        explicit Scene(std::vector<TargetTruth> targets)
        {
            for (const auto &t : targets)
                add(t);
        }

        void add(const TargetTruth &t)
        {
            if (!(t.power > 0.0))
                throw ConfigError("target power must be positive");
            if (t.near())
            {
                if (!(t.range > 0.0) || !std::isfinite(t.range))
                    throw ConfigError("near-field target needs a finite positive range");
                targets_.push_back(t);
            }
            else
            {
                auto pos = targets_.begin() + far_count();
                targets_.insert(pos, t);
            }
        }

        // Rejects near targets at or beyond the Rayleigh distance of g.
        void validate_against(const UpaGeometry &g) const
        {
            const double zr = rayleigh_distance(g);
            for (const auto &t : targets_)
                if (t.near() && t.range >= zr)
                    throw ConfigError("near-field target range " + std::to_string(t.range) +
                                      " m is not below the Rayleigh distance " + std::to_string(zr) + " m");
        }

        const std::vector<TargetTruth> &targets() const { return targets_; }
        int size() const { return int(targets_.size()); }
        bool empty() const { return targets_.empty(); }
        int far_count() const
        {
            int c = 0;
            for (const auto &t : targets_)
                c += t.near() ? 0 : 1;
            return c;
        }
        int near_count() const { return size() - far_count(); }
        const TargetTruth &operator[](int k) const { return targets_[std::size_t(k)]; }

    private:
        std::vector<TargetTruth> targets_;
    };

    // ---------------------------------------------------------------- steering

    enum class SteeringModel
    {
        Exact,
        Fresnel
    };

    // Far-field steering: unit-modulus entries, norm sqrt(N).
    inline CVec far_steering(const DirectionCosines &dc, const UpaGeometry &g)
    {
        const double kd = g.wavenumber() * g.d0;
        CVec ax(g.nx), ay(g.ny);
        for (int i = 0; i < g.nx; ++i)
            ax(i) = std::polar(1.0, kd * (i - g.half_x()) * dc.alpha);
        for (int i = 0; i < g.ny; ++i)
            ay(i) = std::polar(1.0, kd * (i - g.half_y()) * dc.beta);
        CVec a(g.n());
        for (int iy = 0; iy < g.ny; ++iy)
            a.segment(iy * g.nx, g.nx) = ay(iy) * ax;
        return a;
    }

    // Exact spherical-wavefront steering, entries exp(-j k (r_n - r)) / sqrt(N), norm 1.
    inline CVec near_steering_exact(const DirectionCosines &dc, double range, const UpaGeometry &g)
    {
        if (!(range > 0.0))
            throw ConfigError("near-field range must be positive");
        const double k = g.wavenumber();
        const double scale = 1.0 / std::sqrt(double(g.n()));
        CVec b(g.n());
        if (std::isinf(range))
            return far_steering(dc, g) * scale;
        for (int iy = 0; iy < g.ny; ++iy)
        {
            const double y = (iy - g.half_y()) * g.d0;
            for (int ix = 0; ix < g.nx; ++ix)
            {
                const double x = (ix - g.half_x()) * g.d0;
                // r_n - r computed as q / (r_n + r) to stay accurate for r >> aperture.
                const double q = x * x + y * y - 2.0 * range * (x * dc.alpha + y * dc.beta);
                const double rn = std::sqrt(range * range + q);
                b(iy * g.nx + ix) = std::polar(scale, -k * q / (rn + range));
            }
        }
        return b;
    }

    // Second-order (Fresnel) approximation of near_steering_exact.
    inline CVec near_steering_fresnel(const DirectionCosines &dc, double range, const UpaGeometry &g)
    {
        if (!(range > 0.0))
            throw ConfigError("near-field range must be positive");
        const double k = g.wavenumber();
        const double scale = 1.0 / std::sqrt(double(g.n()));
        const double a = dc.alpha, b = dc.beta, d2 = g.d0 * g.d0;
        CVec out(g.n());
        for (int iy = 0; iy < g.ny; ++iy)
        {
            const double ny = iy - g.half_y();
            for (int ix = 0; ix < g.nx; ++ix)
            {
                const double nx = ix - g.half_x();
                const double u = g.d0 * (nx * a + ny * b);
                double v = 0.0;
                if (std::isfinite(range))
                    v = nx * ny * d2 * a * b / range - (nx * nx * d2 * (1 - a * a) + ny * ny * d2 * (1 - b * b)) / (2.0 * range);
                out(iy * g.nx + ix) = std::polar(scale, k * (u + v));
            }
        }
        return out;
    }

    inline CVec near_steering(SteeringModel model, const DirectionCosines &dc, double range, const UpaGeometry &g)
    {
        return model == SteeringModel::Exact ? near_steering_exact(dc, range, g) : near_steering_fresnel(dc, range, g);
    }

    inline CVec near_steering_exact(const TargetTruth &t, const UpaGeometry &g)
    {
        return near_steering_exact(t.cosines(), t.range, g);
    }

    inline CVec near_steering_fresnel(const TargetTruth &t, const UpaGeometry &g)
    {
        return near_steering_fresnel(t.cosines(), t.range, g);
    }

    // Effective channel column used in G: far targets contribute a (unit modulus),
    // near targets sqrt(N) b (unit modulus), so every target's per-antenna power is g_k.
    inline CVec channel_column(const TargetTruth &t, const UpaGeometry &g, SteeringModel model = SteeringModel::Exact)
    {
        if (!t.near())
            return far_steering(t.cosines(), g);
        return near_steering(model, t.cosines(), t.range, g) * std::sqrt(double(g.n()));
    }

    inline CMat steering_matrix(const Scene &scene, const UpaGeometry &g, SteeringModel model = SteeringModel::Exact)
    {
        CMat G(g.n(), scene.size());
        for (int k = 0; k < scene.size(); ++k)
            G.col(k) = channel_column(scene[k], g, model);
        return G;
    }

} // namespace mixedfield

#endif
