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

#ifndef MIXEDFIELD_CRB_HPP
#define MIXEDFIELD_CRB_HPP

#include "mixedfield/subspace.hpp"

#include <Eigen/SVD>

#include <string>
#include <vector>

namespace mixedfield
{
    enum class ParamKind
    {
        Theta,
        Phi,
        Range
    };

    struct ParamInfo
    {
        std::string name;
        ParamKind kind = ParamKind::Theta;
        int source = 0; // index into the scene (far targets first)
        double value = 0.0;
    };

    // theta_far, phi_far, theta_near, phi_near, r_near, each group in scene order.
    inline std::vector<ParamInfo> parameter_vector(const Scene &scene)
    {
        const int k1 = scene.far_count(), k = scene.size();
        std::vector<ParamInfo> p;
        auto group = [&](int from, int to, ParamKind kind, const char *prefix) {
            for (int s = from; s < to; ++s)
            {
                const auto &t = scene[s];
                const double v = kind == ParamKind::Theta ? t.theta : kind == ParamKind::Phi ? t.phi : t.range;
                p.push_back({std::string(prefix) + "_" + std::to_string(s + 1), kind, s, v});
            }
        };
        group(0, k1, ParamKind::Theta, "theta");
        group(0, k1, ParamKind::Phi, "phi");
        group(k1, k, ParamKind::Theta, "theta");
        group(k1, k, ParamKind::Phi, "phi");
        group(k1, k, ParamKind::Range, "r");
        return p;
    }

    struct SteeringDerivatives
    {
        CMat d_f; // N x 2K1: d/dtheta of every far column, then d/dphi
        CMat d_n; // N x 3K2: d/dtheta, d/dphi, d/dr of every near column
    };

    // Derivatives of the columns of G (unit-modulus far steering, sqrt(N)-scaled exact near steering).
    inline SteeringDerivatives steering_derivatives(const Scene &scene, const UpaGeometry &g)
    {
        const int k1 = scene.far_count(), k2 = scene.near_count(), n = g.n();
        const double k = g.wavenumber();
        SteeringDerivatives d;
        d.d_f.resize(n, 2 * k1);
        d.d_n.resize(n, 3 * k2);
        for (int s = 0; s < k1; ++s)
        {
            const auto &t = scene[s];
            const CVec a = far_steering(t.cosines(), g);
            const double ct = std::cos(t.theta), st = std::sin(t.theta), cp = std::cos(t.phi), sp = std::sin(t.phi);
            for (int p = 0; p < n; ++p)
            {
                const double x = (p % g.nx - g.half_x()) * g.d0, y = (p / g.nx - g.half_y()) * g.d0;
                d.d_f(p, s) = kJ * k * (x * ct * cp + y * ct * sp) * a(p);
                d.d_f(p, k1 + s) = kJ * k * (-x * st * sp + y * st * cp) * a(p);
            }
        }
        for (int j = 0; j < k2; ++j)
        {
            const auto &t = scene[k1 + j];
            const double r = t.range;
            const CVec b = channel_column(t, g, SteeringModel::Exact);
            const DirectionCosines dc = t.cosines();
            const double ct = std::cos(t.theta), st = std::sin(t.theta), cp = std::cos(t.phi), sp = std::sin(t.phi);
            for (int p = 0; p < n; ++p)
            {
                const double x = (p % g.nx - g.half_x()) * g.d0, y = (p / g.nx - g.half_y()) * g.d0;
                const double proj = x * dc.alpha + y * dc.beta;
                const double rn = std::sqrt(r * r + x * x + y * y - 2.0 * r * proj);
                // column entry is exp(-j k (r_n - r))
                const double drn_dt = -r * (x * ct * cp + y * ct * sp) / rn;
                const double drn_dp = -r * (-x * st * sp + y * st * cp) / rn;
                const double drn_dr = (r - proj) / rn - 1.0;
                d.d_n(p, j) = -kJ * k * drn_dt * b(p);
                d.d_n(p, k2 + j) = -kJ * k * drn_dp * b(p);
                d.d_n(p, 2 * k2 + j) = -kJ * k * drn_dr * b(p);
            }
        }
        return d;
    }

    struct FimBlocks
    {
        RMat f_ff, f_fn, f_nf, f_nn; // without the leading factor
        double scale = 0.0;          // 2L / sigma^2
        int k1 = 0, k2 = 0;

        RMat assembled() const
        {
            const int a = 2 * k1, b = 3 * k2;
            RMat f(a + b, a + b);
            f.topLeftCorner(a, a) = f_ff;
            f.topRightCorner(a, b) = f_fn;
            f.bottomLeftCorner(b, a) = f_nf;
            f.bottomRightCorner(b, b) = f_nn;
            return scale * f;
        }
    };

    // Source index of every derivative column of d_f / d_n.
    inline std::vector<int> derivative_sources(int k1, int k2, bool near)
    {
        std::vector<int> s;
        const int reps = near ? 3 : 2, count = near ? k2 : k1, offset = near ? k1 : 0;
        for (int r = 0; r < reps; ++r)
            for (int i = 0; i < count; ++i)
                s.push_back(offset + i);
        return s;
    }

    // Stochastic CRB information: Re{(D^H P D) .* Q^T} per block, P the projector onto the
    // orthogonal complement of G and Q = S G^H R^{-1} G S.
    inline FimBlocks fim(const Scene &scene, const UpaGeometry &g, double sigma2, int L)
    {
        require(sigma2 > 0.0 && L >= 1, "FIM needs sigma^2 > 0 and L >= 1");
        require(!scene.empty(), "FIM needs at least one target");
        const int k = scene.size(), n = g.n();
        const CMat G = steering_matrix(scene, g);
        Eigen::JacobiSVD<CMat> svd(G);
        const RVec sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-10 * sv(0)) || k >= n)
            throw RankDeficient("steering matrix is rank deficient (coincident targets)");

        CMat S = CMat::Zero(k, k);
        for (int i = 0; i < k; ++i)
            S(i, i) = scene[i].power;
        const CMat R = hermitian_part(G * S * G.adjoint() + sigma2 * CMat::Identity(n, n));
        Eigen::LLT<CMat> llt(R);
        const CMat Q = S * G.adjoint() * llt.solve(G) * S;
        const CMat gram = G.adjoint() * G;
        const CMat P = CMat::Identity(n, n) - G * gram.ldlt().solve(G.adjoint());

        const SteeringDerivatives d = steering_derivatives(scene, g);
        FimBlocks f;
        f.k1 = scene.far_count();
        f.k2 = scene.near_count();
        f.scale = 2.0 * L / sigma2;
        const auto sf = derivative_sources(f.k1, f.k2, false), sn = derivative_sources(f.k1, f.k2, true);
        auto block = [&](const CMat &da, const std::vector<int> &sa, const CMat &db, const std::vector<int> &sb) {
            const CMat m = da.adjoint() * P * db;
            RMat out(m.rows(), m.cols());
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j)
                    out(i, j) = (m(i, j) * Q(sb[std::size_t(j)], sa[std::size_t(i)])).real();
            return out;
        };
        f.f_ff = block(d.d_f, sf, d.d_f, sf);
        f.f_fn = block(d.d_f, sf, d.d_n, sn);
        f.f_nf = block(d.d_n, sn, d.d_f, sf);
        f.f_nn = block(d.d_n, sn, d.d_n, sn);
        return f;
    }

    struct CrbReport
    {
        RMat crb;
        RVec rcrb;
        std::vector<ParamInfo> params; // filled when built from a scene
    };

    // Inverse of the assembled FIM. Conditioning is judged after diagonal equilibration,
    // since angles and ranges live on very different scales.
    inline CrbReport crb_matrix(const FimBlocks &blocks, double max_condition = 1e14)
    {
        const RMat f = 0.5 * (blocks.assembled() + blocks.assembled().transpose());
        const int m = int(f.rows());
        RVec dsq(m);
        for (int i = 0; i < m; ++i)
        {
            if (!(f(i, i) > 0.0))
                throw IllConditioned("FIM has a non-positive diagonal entry", std::numeric_limits<double>::infinity());
            dsq(i) = 1.0 / std::sqrt(f(i, i));
        }
        const RMat fn = dsq.asDiagonal() * f * dsq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<RMat> es(fn);
        const RVec ev = es.eigenvalues();
        const double cond = ev(m - 1) / ev(0);
        if (!(ev(0) > 0.0) || !(cond <= max_condition))
            throw IllConditioned("FIM is singular or ill-conditioned (condition number " + std::to_string(cond) + ")",
                                 ev(0) > 0.0 ? cond : std::numeric_limits<double>::infinity());
        const RMat inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
        CrbReport r;
        r.crb = dsq.asDiagonal() * inv * dsq.asDiagonal();
        r.crb = 0.5 * (r.crb + r.crb.transpose()).eval();
        r.rcrb = r.crb.diagonal().cwiseMax(0.0).cwiseSqrt();
        return r;
    }

    inline CrbReport crb(const Scene &scene, const UpaGeometry &g, double sigma2, int L)
    {
        CrbReport r = crb_matrix(fim(scene, g, sigma2, L));
        r.params = parameter_vector(scene);
        return r;
    }

} // namespace mixedfield

#endif
