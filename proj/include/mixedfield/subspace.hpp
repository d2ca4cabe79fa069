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

#ifndef MIXEDFIELD_SUBSPACE_HPP
#define MIXEDFIELD_SUBSPACE_HPP

#include "mixedfield/frontend.hpp"
#include "mixedfield/geometry.hpp"

#include <Eigen/Eigenvalues>

#ifdef MIXEDFIELD_HAVE_LAPACKE
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
extern "C" void openblas_set_num_threads(int);
#endif

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

namespace mixedfield
{
    enum class CovarianceKind
    {
        Sample,
        Theoretical
    };

    struct Covariance
    {
        CMat matrix; // Hermitian N x N
        int snapshots_used = 0;
        CovarianceKind kind = CovarianceKind::Sample;

        int n() const { return int(matrix.rows()); }
    };

    inline Covariance sample_covariance(const SnapshotBatch &batch)
    {
        require(batch.l() >= 1, "sample covariance needs at least one snapshot");
        const CMat &x = batch.snapshots;
        CMat r = x * x.adjoint() / double(x.cols());
        return {hermitian_part(r), int(x.cols()), CovarianceKind::Sample};
    }

    // A S_F A^H + B S_N B^H + sigma^2 I with the effective (unit-modulus) columns of G.
    inline Covariance theoretical_covariance(const Scene &scene, const UpaGeometry &g, double sigma2,
                                             SteeringModel model = SteeringModel::Exact)
    {
        CMat r = sigma2 * CMat::Identity(g.n(), g.n());
        if (!scene.empty())
        {
            const CMat G = steering_matrix(scene, g, model);
            RVec p(scene.size());
            for (int k = 0; k < scene.size(); ++k)
                p(k) = scene[k].power;
            r += G * p.asDiagonal() * G.adjoint();
        }
        return {hermitian_part(r), 0, CovarianceKind::Theoretical};
    }

    // ------------------------------------------------------------ anti-diagonal

    struct AntiDiagonalVector
    {
        CVec entries; // entries(p) = R(p, N-1-p), 0-based
        bool center_corrected = false;
    };

    // Only the centre element of the anti-diagonal sits on the main diagonal, so it is the
    // only one carrying sigma^2. The result is conjugate-symmetrised, which is a no-op for
    // an exactly Hermitian input.
    inline AntiDiagonalVector antidiagonal_extract(const Covariance &cov, double sigma2_estimate, bool center_correct = true)
    {
        const int n = cov.n();
        require(n % 2 == 1, "anti-diagonal extraction needs an odd antenna count");
        AntiDiagonalVector out;
        out.entries.resize(n);
        for (int p = 0; p < n; ++p)
            out.entries(p) = cov.matrix(p, n - 1 - p);
        CVec sym(n);
        for (int p = 0; p < n; ++p)
            sym(p) = 0.5 * (out.entries(p) + std::conj(out.entries(n - 1 - p)));
        out.entries = sym;
        if (center_correct)
        {
            out.entries((n - 1) / 2) -= sigma2_estimate;
            out.center_corrected = true;
        }
        return out;
    }

    // Noise-free anti-diagonal of theoretical_covariance without forming the N x N matrix.
    inline AntiDiagonalVector theoretical_antidiagonal(const Scene &scene, const UpaGeometry &g,
                                                       SteeringModel model = SteeringModel::Exact)
    {
        AntiDiagonalVector out;
        out.entries = CVec::Zero(g.n());
        out.center_corrected = true;
        const int n = g.n();
        for (int k = 0; k < scene.size(); ++k)
        {
            const CVec c = channel_column(scene[k], g, model);
            for (int p = 0; p < n; ++p)
                out.entries(p) += scene[k].power * c(p) * std::conj(c(n - 1 - p));
        }
        return out;
    }

    // ----------------------------------------------------------- virtual S-UPA

    struct SupaCovariance
    {
        CMat matrix; // (supa_nx*supa_ny)^2, x-fastest ordering
        int nx = 0;  // virtual elements along x
        int ny = 0;

        int n() const { return nx * ny; }
        CMat block(int i, int j) const { return matrix.block(i * nx, j * nx, nx, nx); }
    };

    inline CMat toeplitz(const CVec &first_col, const CVec &first_row)
    {
        const int r = int(first_col.size()), c = int(first_row.size());
        CMat t(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                t(i, j) = i >= j ? first_col(i - j) : first_row(j - i);
        return t;
    }

    // Block (i, j) is Toeplitz, filled from the anti-diagonal entries whose y-offset is
    // i - j: its first column holds x-offsets 0, 1, ..., its first row x-offsets 0, -1, ....
    // The virtual element (mx, my) then sees steering exp(j psi (mx alpha + my beta)),
    // psi = 2 k d0, so the matrix equals sum_k g_k a~ a~^H for a noiseless input.
    inline SupaCovariance build_supa_covariance(const AntiDiagonalVector &anti, const UpaGeometry &g)
    {
        g.validate();
        require(anti.entries.size() == g.n(), "anti-diagonal length does not match the geometry");
        SupaCovariance s;
        s.nx = g.supa_nx();
        s.ny = g.supa_ny();
        s.matrix.resize(s.n(), s.n());
        const int hx = g.half_x(), hy = g.half_y();
        auto at = [&](int ox, int oy) { return anti.entries((ox + hx) + (oy + hy) * g.nx); };
        CVec col(s.nx), row(s.nx);
        for (int i = 0; i < s.ny; ++i)
            for (int j = 0; j < s.ny; ++j)
            {
                for (int m = 0; m < s.nx; ++m)
                {
                    col(m) = at(m, i - j);
                    row(m) = at(-m, i - j);
                }
                s.matrix.block(i * s.nx, j * s.nx, s.nx, s.nx) = toeplitz(col, row);
            }
        return s;
    }

    // ----------------------------------------------------------- eigen-split

    enum class EigenOrder
    {
        ByValue,    // descending eigenvalue (covariance matrices)
        ByMagnitude // descending |eigenvalue| (constructed, possibly indefinite matrices)
    };

    struct SubspacePair
    {
        CMat signal; // dim x k
        CMat noise;  // dim x (dim - k)
        RVec eigenvalues; // sorted per the requested order
        bool degenerate = false; // no usable gap between the k-th and (k+1)-th eigenvalue

        int dim() const { return int(signal.rows()); }
        int k() const { return int(signal.cols()); }
    };

    struct HermitianEigen
    {
        RVec values;  // ascending
        CMat vectors; // orthonormal columns
    };

    inline HermitianEigen hermitian_eigen(const CMat &h)
    {
        HermitianEigen out;
#ifdef MIXEDFIELD_HAVE_LAPACKE
        // single-threaded BLAS keeps results identical however many trial workers run
        static const bool pinned = (openblas_set_num_threads(1), true);
        (void)pinned;
        const lapack_int n = lapack_int(h.rows());
        out.vectors = hermitian_part(h);
        out.values.resize(n);
        if (n > 0 &&
            LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data()) != 0)
            throw Error("Hermitian eigensolver failed");
#else
        Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(h));
        if (es.info() != Eigen::Success)
            throw Error("Hermitian eigensolver failed");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
#endif
        return out;
    }

    inline SubspacePair eigendecompose_split(const CMat &h, int k, EigenOrder order = EigenOrder::ByValue)
    {
        const int dim = int(h.rows());
        require(h.cols() == dim, "eigendecomposition needs a square matrix");
        require(k >= 0 && k < dim, "signal dimension must satisfy 0 <= k < dim");
        const HermitianEigen es = hermitian_eigen(h);
        const RVec &ev = es.values;
        std::vector<int> idx(static_cast<std::size_t>(dim));
        std::iota(idx.begin(), idx.end(), 0);
        if (order == EigenOrder::ByValue)
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return ev(a) > ev(b); });
        else
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(ev(a)) > std::abs(ev(b)); });

        SubspacePair sp;
        sp.signal.resize(dim, k);
        sp.noise.resize(dim, dim - k);
        sp.eigenvalues.resize(dim);
        for (int i = 0; i < dim; ++i)
        {
            sp.eigenvalues(i) = ev(idx[std::size_t(i)]);
            if (i < k)
                sp.signal.col(i) = es.vectors.col(idx[std::size_t(i)]);
            else
                sp.noise.col(i - k) = es.vectors.col(idx[std::size_t(i)]);
        }
        const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
        if (k == 0)
            sp.degenerate = std::abs(sp.eigenvalues(0) - sp.eigenvalues(dim - 1)) < 1e-9 * scale;
        else
            sp.degenerate = std::abs(std::abs(sp.eigenvalues(k - 1)) - std::abs(sp.eigenvalues(k))) < 1e-9 * scale;
        return sp;
    }

    // Mean of the dim-k smallest eigenvalues; the default noise-power estimate.
    inline double noise_floor(const SubspacePair &sp)
    {
        const int dim = int(sp.eigenvalues.size()), k = sp.k();
        if (dim == k)
            return 0.0;
        return sp.eigenvalues.tail(dim - k).mean();
    }

    // Row-major complex pairs, little-endian IEEE-754 binary64, no header.
    inline void write_matrix_binary(const std::string &path, const CMat &m)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw Error("cannot open " + path + " for writing");
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j)
            {
                const double parts[2] = {m(i, j).real(), m(i, j).imag()};
                unsigned char buf[16];
                std::memcpy(buf, parts, 16);
                if constexpr (std::endian::native == std::endian::big)
                {
                    std::reverse(buf, buf + 8);
                    std::reverse(buf + 8, buf + 16);
                }
                f.write(reinterpret_cast<const char *>(buf), 16);
            }
        if (!f)
            throw Error("write failed for " + path);
    }

} // namespace mixedfield

#endif
