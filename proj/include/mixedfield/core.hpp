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

#ifndef MIXEDFIELD_CORE_HPP
#define MIXEDFIELD_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixedfield
{
    using cplx = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kSpeedOfLight = 299792458.0; // m/s
    inline constexpr cplx kJ{0.0, 1.0};

    // Error hierarchy. Everything thrown by the library derives from Error.
    class Error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Invalid input or configuration (bad geometry, non-tiling layout, unknown key ...).
    class ConfigError : public Error
    {
    public:
        using Error::Error;
    };

    // Direction cosines outside the unit disc.
    class NotPhysical : public Error
    {
    public:
        using Error::Error;
    };

    // A matrix that must be invertible is not (combiner, FIM, steering matrix).
    class RankDeficient : public Error
    {
    public:
        using Error::Error;
    };

    class IllConditioned : public Error
    {
    public:
        IllConditioned(const std::string &what, double cond) : Error(what), condition_number(cond) {}
        double condition_number;
    };

    inline void require(bool ok, const std::string &msg)
    {
        if (!ok)
            throw ConfigError(msg);
    }

    inline std::vector<double> linspace(double lo, double hi, std::size_t n)
    {
        std::vector<double> v(n);
        if (n == 1)
        {
            v[0] = lo;
            return v;
        }
        const double step = (hi - lo) / double(n - 1);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = lo + step * double(i);
        v.back() = hi;
        return v;
    }

    inline std::vector<double> logspace(double lo, double hi, std::size_t n)
    {
        std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
        for (auto &x : v)
            x = std::exp(x);
        if (n > 1)
        {
            v.front() = lo;
            v.back() = hi;
        }
        return v;
    }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

    // SplitMix64 finalizer; used to derive independent RNG streams from (seed, index).
    inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
    {
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Hermitian part of a square matrix.
    inline CMat hermitian_part(const CMat &m) { return 0.5 * (m + m.adjoint()); }

} // namespace mixedfield

#endif
