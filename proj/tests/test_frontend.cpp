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

#include <catch_amalgamated.hpp>

#include <mixedfield/frontend.hpp>

#include <random>

using namespace mixedfield;
using Catch::Approx;

namespace
{
    UpaGeometry half_wave(int nx, int ny) { return UpaGeometry::from_wavelength(nx, ny, 0.015, 0.03); }

    double unitarity_gap(const CombinerSchedule &s)
    {
        const CMat w0 = s.stacked();
        return (w0.adjoint() * w0 - double(s.u()) * CMat::Identity(w0.cols(), w0.cols())).norm();
    }
}

TEST_CASE("layout reproduces the two-chain permutation example", "[frontend]")
{
    const auto l = build_layout(4, 2, 2, 2, 2);
    CHECK(l.row_order == std::vector<int>{0, 1, 4, 5, 2, 3, 6, 7});
    CHECK(l.u == 4);
    const RMat pi = permutation_matrix(l);
    CHECK((pi * pi.transpose() - RMat::Identity(8, 8)).norm() == 0.0);
    CHECK(l.antennas_of[0] == std::vector<int>{0, 1, 4, 5});
    CHECK(l.antennas_of[1] == std::vector<int>{2, 3, 6, 7});
}

TEST_CASE("layout degenerate cases and validation", "[frontend]")
{
    const auto single = build_layout(3, 3, 1, 3, 3);
    for (int p = 0; p < 9; ++p)
        CHECK(single.row_order[std::size_t(p)] == p);
    const auto digital = build_layout(3, 3, 9, 1, 1);
    CHECK(digital.u == 1);
    for (int p = 0; p < 9; ++p)
        CHECK(digital.chain_of[std::size_t(p)] == p);

    CHECK_THROWS_AS(build_layout(3, 3, 2, 3, 3), ConfigError);  // 2 does not divide 9
    CHECK_THROWS_AS(build_layout(5, 5, 5, 2, 2), ConfigError);  // u does not match N/n_rf
    CHECK_THROWS_AS(build_layout(6, 3, 6, 2, 2), ConfigError);  // 2x2 blocks do not tile 6x3
    CHECK_NOTHROW(build_layout(5, 5, 5, 5, 1));

    // every antenna appears exactly once
    const auto l = build_layout(21, 21, 21, 21, 1);
    std::vector<int> seen(std::size_t(l.n()), 0);
    for (int q : l.row_order)
        ++seen[std::size_t(q)];
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
}

TEST_CASE("DFT combiner is unitary up to U", "[frontend][property]")
{
    for (auto [nx, ny, nrf, ux, uy] : std::vector<std::array<int, 5>>{
             {3, 3, 1, 3, 3}, {3, 3, 3, 3, 1}, {5, 5, 5, 5, 1}, {5, 5, 5, 1, 5}, {9, 9, 9, 3, 3}, {21, 21, 21, 21, 1}, {3, 3, 9, 1, 1}})
    {
        const auto s = dft_combiner_schedule(build_layout(nx, ny, nrf, ux, uy));
        CHECK(unitarity_gap(s) < 1e-10);
        CHECK(verify_recoverable(s));
        CHECK(s.weights.cwiseAbs().minCoeff() == Approx(1.0));
        CHECK(s.weights.cwiseAbs().maxCoeff() == Approx(1.0));
    }
    const auto digital = dft_combiner_schedule(build_layout(3, 3, 9, 1, 1));
    CHECK((digital.stacked() - permutation_matrix(digital.layout).cast<cplx>()).norm() < 1e-15);
}

TEST_CASE("DFT column", "[frontend]")
{
    const CVec f2 = dft_column(1, 4);
    const CVec expect = (CVec(4) << 1.0, std::polar(1.0, -kPi / 2), std::polar(1.0, -kPi), std::polar(1.0, -1.5 * kPi)).finished();
    CHECK((f2 - expect).norm() < 1e-14);
}

TEST_CASE("recoverability check rejects bad schedules", "[frontend]")
{
    const auto l = build_layout(5, 5, 5, 5, 1);
    auto same = dft_combiner_schedule(l);
    for (int s = 1; s < same.u(); ++s)
        same.weights.row(s) = same.weights.row(0);
    same.dft = false;
    CHECK_FALSE(verify_recoverable(same));

    int diagonal = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
        diagonal += verify_recoverable(random_combiner_schedule(l, seed)) ? 1 : 0;
    CHECK(diagonal == 0);
}

TEST_CASE("noiseless synthesis and reconstruction", "[frontend]")
{
    const auto g = half_wave(5, 5);
    const auto l = build_layout(g, 5, 5, 1);
    const auto s = dft_combiner_schedule(l);

    // single broadside far target
    const Scene one({far_target(0.0, 0.0, 1.0)});
    const auto rx = synthesize_received(one, g, s, {SourceKind::UnitModulusRandomPhase, 4}, 3, 0.0, 7);
    REQUIRE(rx.y.size() == 15);
    for (int l0 = 0; l0 < 3; ++l0)
        for (int slot = 0; slot < 5; ++slot)
        {
            const CVec expect = s.matrix(slot) * CVec::Ones(g.n()) * rx.sources(0, l0);
            CHECK((rx.y[std::size_t(l0 * 5 + slot)] - expect).norm() < 1e-12);
        }

    const Scene sc({far_target(0.4, 0.3), near_target(0.7, -1.0, 0.5)});
    for (const auto &sched : {s, random_combiner_schedule(l, 99)})
    {
        const auto r = synthesize_received(sc, g, sched, {SourceKind::ComplexGaussian, 1}, 10, 0.0, 2);
        const SnapshotBatch b = reconstruct_snapshots(r.y, sched);
        CHECK((b.snapshots - r.clean.snapshots).norm() < 1e-10 * r.clean.snapshots.norm());
        CHECK((b.snapshots - steering_matrix(sc, g) * r.sources).norm() < 1e-10 * r.clean.snapshots.norm());
    }

    // fully digital: reconstruction only undoes the permutation
    const auto d = dft_combiner_schedule(build_layout(g, 25, 1, 1));
    const auto rd = synthesize_received(sc, g, d, {}, 4, 0.0, 3);
    const SnapshotBatch bd = reconstruct_snapshots(rd.y, d);
    for (int l0 = 0; l0 < 4; ++l0)
        for (int p = 0; p < g.n(); ++p)
            CHECK(bd.snapshots(p, l0) == rd.y[std::size_t(l0)](d.layout.chain_of[std::size_t(p)]));
}

TEST_CASE("synthesis is seeded and validated", "[frontend]")
{
    const auto g = half_wave(5, 5);
    const auto s = dft_combiner_schedule(build_layout(g, 5, 5, 1));
    const Scene sc({far_target(0.4, 0.3), near_target(0.7, -1.0, 0.5)});
    const auto a = synthesize_received(sc, g, s, {SourceKind::ComplexGaussian, 5}, 8, 0.3, 17);
    const auto b = synthesize_received(sc, g, s, {SourceKind::ComplexGaussian, 5}, 8, 0.3, 17);
    for (std::size_t m = 0; m < a.y.size(); ++m)
        CHECK(a.y[m] == b.y[m]);
    const auto c = synthesize_received(sc, g, s, {SourceKind::ComplexGaussian, 5}, 8, 0.3, 18);
    CHECK(a.y[0] != c.y[0]);

    CHECK_THROWS_AS(synthesize_received(Scene{}, g, s, {}, 8, 0.3, 1), ConfigError);

    auto bad = s;
    bad.weights.row(1) = bad.weights.row(0);
    bad.dft = false;
    CHECK_THROWS_AS(reconstruct_snapshots(a.y, bad), RankDeficient);
}

TEST_CASE("received power matches the second moment", "[frontend][statistics]")
{
    const auto g = half_wave(5, 5);
    const auto l = build_layout(g, 25, 1, 1); // U = 1: every slot exposes the full eta(m)
    const auto s = dft_combiner_schedule(l);
    const Scene sc({far_target(0.4, 0.3, 2.0), near_target(0.7, -1.0, 0.5, 0.5)});
    const double sigma2 = 0.7;
    const auto r = synthesize_received(sc, g, s, {SourceKind::ComplexGaussian, 21}, 10000, sigma2, 22);
    double power = 0.0;
    for (const auto &y : r.y)
        power += y.squaredNorm();
    power /= double(r.y.size());
    const double expect = (2.0 + 0.5) * g.n() + g.n() * sigma2;
    CHECK(std::abs(power - expect) < 0.05 * expect);
}

TEST_CASE("reconstruction leaves the noise white", "[frontend][statistics]")
{
    const auto g = half_wave(5, 5);
    const auto s = dft_combiner_schedule(build_layout(g, 5, 5, 1));
    // a target with negligible power turns the synthesizer into a pure-noise source
    const Scene quiet({far_target(0.3, 0.2, 1e-30)});
    const double sigma2 = 2.0;
    const auto r = synthesize_received(quiet, g, s, {}, 10000, sigma2, 5);
    const SnapshotBatch b = reconstruct_snapshots(r.y, s);
    const CMat cov = b.snapshots * b.snapshots.adjoint() / double(b.l());
    const double trace = cov.trace().real();
    CHECK(std::abs(trace - g.n() * sigma2) < 0.02 * g.n() * sigma2);
    const CMat off = cov - CMat(cov.diagonal().asDiagonal());
    CHECK(off.norm() < 0.05 * trace);
}
