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

#ifndef MIXEDFIELD_FRONTEND_HPP
#define MIXEDFIELD_FRONTEND_HPP

#include "mixedfield/geometry.hpp"

#include <Eigen/LU>

#include <random>
#include <string>
#include <vector>

namespace mixedfield
{
    // Sub-connected hybrid array: n_rf RF chains, each wired through u = ux*uy phase
    // shifters to one contiguous ux x uy block of the array. Blocks and the elements
    // inside a block are both enumerated x-fastest.
    struct SubConnectedLayout
    {
        int nx = 1, ny = 1;
        int n_rf = 1;
        int u = 1;
        int ux = 1, uy = 1;
        // row_order[n] = q: row n of the permutation matrix is e_q^T, where q indexes
        // the block-diagonal ordering (chain-major, element-minor). 0-based.
        std::vector<int> row_order;
        std::vector<int> chain_of;   // antenna -> RF chain
        std::vector<int> element_of; // antenna -> position inside its chain, 0..u-1
        std::vector<std::vector<int>> antennas_of; // chain -> antennas in element order

        int n() const { return nx * ny; }
    };

    inline SubConnectedLayout build_layout(int nx, int ny, int n_rf, int ux, int uy)
    {
        require(nx > 0 && ny > 0 && n_rf > 0 && ux > 0 && uy > 0, "layout dimensions must be positive");
        require((nx * ny) % n_rf == 0, "n_rf must divide the antenna count");
        require(ux * uy == nx * ny / n_rf, "ux*uy must equal N/n_rf");
        require(nx % ux == 0 && ny % uy == 0, "ux x uy blocks must tile the array");
        require((nx / ux) * (ny / uy) == n_rf, "block count must equal n_rf");

        SubConnectedLayout l;
        l.nx = nx;
        l.ny = ny;
        l.n_rf = n_rf;
        l.ux = ux;
        l.uy = uy;
        l.u = ux * uy;
        const int n = nx * ny;
        const int bx = nx / ux;
        l.row_order.assign(std::size_t(n), 0);
        l.chain_of.assign(std::size_t(n), 0);
        l.element_of.assign(std::size_t(n), 0);
        l.antennas_of.assign(std::size_t(n_rf), std::vector<int>(std::size_t(l.u)));
        for (int iy = 0; iy < ny; ++iy)
            for (int ix = 0; ix < nx; ++ix)
            {
                const int p = ix + iy * nx;
                const int chain = ix / ux + (iy / uy) * bx;
                const int elem = ix % ux + (iy % uy) * ux;
                l.chain_of[std::size_t(p)] = chain;
                l.element_of[std::size_t(p)] = elem;
                l.row_order[std::size_t(p)] = chain * l.u + elem;
                l.antennas_of[std::size_t(chain)][std::size_t(elem)] = p;
            }
        return l;
    }

    inline SubConnectedLayout build_layout(const UpaGeometry &g, int n_rf, int ux, int uy)
    {
        return build_layout(g.nx, g.ny, n_rf, ux, uy);
    }

    inline RMat permutation_matrix(const SubConnectedLayout &l)
    {
        RMat pi = RMat::Zero(l.n(), l.n());
        for (int p = 0; p < l.n(); ++p)
            pi(p, l.row_order[std::size_t(p)]) = 1.0;
        return pi;
    }

    // U combining matrices W(1..U), each n_rf x N with one unit-modulus entry per
    // antenna column. Stored compactly: weights(u, n) is the entry of W(u) in row
    // chain_of[n], column n.
    struct CombinerSchedule
    {
        SubConnectedLayout layout;
        CMat weights; // U x N
        bool dft = false; // W0^H W0 = U I holds by construction

        int u() const { return int(weights.rows()); }

        CMat matrix(int slot) const
        {
            CMat w = CMat::Zero(layout.n_rf, layout.n());
            for (int p = 0; p < layout.n(); ++p)
                w(layout.chain_of[std::size_t(p)], p) = weights(slot, p);
            return w;
        }

        // W0 = [W(1); ...; W(U)], N x N.
        CMat stacked() const
        {
            CMat w0(layout.n(), layout.n());
            for (int s = 0; s < u(); ++s)
                w0.middleRows(s * layout.n_rf, layout.n_rf) = matrix(s);
            return w0;
        }

        // Per-chain U x U block: entry (slot, element) of the equations seen by one RF chain.
        CMat chain_block(int chain) const
        {
            const auto &ants = layout.antennas_of[std::size_t(chain)];
            CMat b(u(), layout.u);
            for (int s = 0; s < u(); ++s)
                for (int e = 0; e < layout.u; ++e)
                    b(s, e) = weights(s, ants[std::size_t(e)]);
            return b;
        }
    };

    // f_u = [1, e^{j2pi(u-1)/U}, ..., e^{j2pi(U-1)(u-1)/U}]^H  (0-based slot here).
    inline CVec dft_column(int slot, int U)
    {
        CVec f(U);
        for (int i = 0; i < U; ++i)
            f(i) = std::polar(1.0, -2.0 * kPi * double(i) * double(slot) / double(U));
        return f;
    }

    inline CombinerSchedule dft_combiner_schedule(const SubConnectedLayout &layout)
    {
        CombinerSchedule s;
        s.layout = layout;
        s.dft = true;
        const int U = layout.u;
        s.weights.resize(U, layout.n());
        for (int slot = 0; slot < U; ++slot)
        {
            const CVec f = dft_column(slot, U);
            for (int p = 0; p < layout.n(); ++p)
                s.weights(slot, p) = std::conj(f(layout.element_of[std::size_t(p)]));
        }
        return s;
    }

    // Seeded random-phase schedule; only used to exercise the general reconstruction path.
    inline CombinerSchedule random_combiner_schedule(const SubConnectedLayout &layout, std::uint64_t seed)
    {
        CombinerSchedule s;
        s.layout = layout;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ph(-kPi, kPi);
        s.weights.resize(layout.u, layout.n());
        for (int slot = 0; slot < layout.u; ++slot)
            for (int p = 0; p < layout.n(); ++p)
                s.weights(slot, p) = std::polar(1.0, ph(rng));
        return s;
    }

    // Necessary optimality conditions for the recovery-error problem:
    // rank(W0) = N and sum_u W(u)^H W(u) diagonal.
    inline bool verify_recoverable(const CombinerSchedule &s, double tol = 1e-10)
    {
        const auto &l = s.layout;
        double off = 0.0, diag = 0.0;
        for (int chain = 0; chain < l.n_rf; ++chain)
        {
            const CMat b = s.chain_block(chain);
            Eigen::FullPivLU<CMat> lu(b);
            lu.setThreshold(1e-10);
            if (lu.rank() < l.u)
                return false;
            const CMat gram = b.adjoint() * b;
            for (int i = 0; i < gram.rows(); ++i)
                for (int j = 0; j < gram.cols(); ++j)
                    (i == j ? diag : off) += std::norm(gram(i, j));
        }
        return std::sqrt(off) <= tol * std::max(1.0, std::sqrt(diag));
    }

    // ----------------------------------------------------------------- signals

    struct SnapshotBatch
    {
        CMat snapshots; // N x L
        double noise_power = 0.0;
        std::vector<double> source_powers;

        int n() const { return int(snapshots.rows()); }
        int l() const { return int(snapshots.cols()); }
    };

    enum class SourceKind
    {
        ComplexGaussian,
        UnitModulusRandomPhase
    };

    struct SourceModel
    {
        SourceKind kind = SourceKind::ComplexGaussian;
        std::uint64_t seed = 0;
    };

    struct ReceivedSignals
    {
        std::vector<CVec> y;  // M = L*U combiner outputs, each n_rf long
        SnapshotBatch clean;  // noiseless G s_l per group
        CMat sources;         // K x L
    };

    // Symbols are constant across the U pilots of one group; noise is drawn fresh per slot.
    // Group l uses RNG streams derived from (seed, l) so the output does not depend on
    // how groups are scheduled.
    inline ReceivedSignals synthesize_received(const Scene &scene, const UpaGeometry &g, const CombinerSchedule &sched,
                                               const SourceModel &src, int L, double sigma2, std::uint64_t seed,
                                               SteeringModel model = SteeringModel::Exact)
    {
        if (scene.empty())
            throw ConfigError("cannot synthesize an empty scene");
        require(L >= 1, "need at least one snapshot group");
        require(sigma2 >= 0.0, "noise power must be non-negative");
        require(sched.layout.n() == g.n(), "schedule does not match the array");

        const CMat G = steering_matrix(scene, g, model);
        const int K = scene.size(), N = g.n(), U = sched.u(), nrf = sched.layout.n_rf;
        const auto &chain_of = sched.layout.chain_of;

        ReceivedSignals out;
        out.y.reserve(std::size_t(L) * std::size_t(U));
        out.sources.resize(K, L);
        out.clean.snapshots.resize(N, L);
        out.clean.noise_power = sigma2;
        for (int k = 0; k < K; ++k)
            out.clean.source_powers.push_back(scene[k].power);

        const double ns = std::sqrt(sigma2 / 2.0);
        CVec eta(N);
        for (int l = 0; l < L; ++l)
        {
            std::mt19937_64 srng(mix_seed(src.seed ^ 0x5eedf00dull, std::uint64_t(l)));
            std::mt19937_64 nrng(mix_seed(seed, std::uint64_t(l)));
            std::normal_distribution<double> normal(0.0, 1.0);
            std::uniform_real_distribution<double> phase(-kPi, kPi);

            CVec s(K);
            for (int k = 0; k < K; ++k)
            {
                const double gk = scene[k].power;
                if (src.kind == SourceKind::ComplexGaussian)
                {
                    const double re = normal(srng), im = normal(srng);
                    s(k) = std::sqrt(gk / 2.0) * cplx(re, im);
                }
                else
                    s(k) = std::polar(std::sqrt(gk), phase(srng));
            }
            out.sources.col(l) = s;
            const CVec clean = G * s;
            out.clean.snapshots.col(l) = clean;

            for (int slot = 0; slot < U; ++slot)
            {
                for (int p = 0; p < N; ++p)
                {
                    const double re = normal(nrng), im = normal(nrng);
                    eta(p) = clean(p) + ns * cplx(re, im);
                }
                CVec y = CVec::Zero(nrf);
                for (int p = 0; p < N; ++p)
                    y(chain_of[std::size_t(p)]) += sched.weights(slot, p) * eta(p);
                out.y.push_back(std::move(y));
            }
        }
        return out;
    }

    // eta_hat(l) = W0^{-1} Y_l. With a DFT schedule W0^{-1} = W0^H / U; otherwise each
    // chain's U x U system is solved by LU.
    inline SnapshotBatch reconstruct_snapshots(const std::vector<CVec> &raw, const CombinerSchedule &sched,
                                               double noise_power = 0.0, std::vector<double> source_powers = {})
    {
        const auto &lay = sched.layout;
        const int U = sched.u(), N = lay.n();
        require(U >= 1 && raw.size() % std::size_t(U) == 0, "raw sample count must be a multiple of U");
        const int L = int(raw.size()) / U;

        SnapshotBatch out;
        out.noise_power = noise_power;
        out.source_powers = std::move(source_powers);
        out.snapshots.resize(N, L);

        if (sched.dft)
        {
            const double inv_u = 1.0 / double(U);
            for (int l = 0; l < L; ++l)
            {
                auto col = out.snapshots.col(l);
                col.setZero();
                for (int slot = 0; slot < U; ++slot)
                {
                    const CVec &y = raw[std::size_t(l * U + slot)];
                    for (int p = 0; p < N; ++p)
                        col(p) += std::conj(sched.weights(slot, p)) * y(lay.chain_of[std::size_t(p)]);
                }
                col *= inv_u;
            }
            return out;
        }

        std::vector<Eigen::FullPivLU<CMat>> lus;
        lus.reserve(std::size_t(lay.n_rf));
        for (int c = 0; c < lay.n_rf; ++c)
        {
            lus.emplace_back(sched.chain_block(c));
            lus.back().setThreshold(1e-10);
            if (!lus.back().isInvertible())
                throw RankDeficient("combiner schedule is rank deficient on chain " + std::to_string(c));
        }
        CVec rhs(U);
        for (int l = 0; l < L; ++l)
            for (int c = 0; c < lay.n_rf; ++c)
            {
                for (int slot = 0; slot < U; ++slot)
                    rhs(slot) = raw[std::size_t(l * U + slot)](c);
                const CVec x = lus[std::size_t(c)].solve(rhs);
                const auto &ants = lay.antennas_of[std::size_t(c)];
                for (int e = 0; e < lay.u; ++e)
                    out.snapshots(ants[std::size_t(e)], l) = x(e);
            }
        return out;
    }

} // namespace mixedfield

#endif
