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

#include <mixedfield/mixedfield.hpp>

#include <cstring>
#include <filesystem>

using namespace mixedfield;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace
{
    const char *kDeskConfig = R"(# two far, two near
frequency_hz = 10e9
nx = 9
ny = 9
n_rf = 9
ux = 9
uy = 1
snapshots_L = 40
snr_db = 0, 20
trials_Q = 3
seed = 11
algorithm = Proposed, LegacyFarDetector
grid.alpha_points = 801
grid.beta_points = 801
grid.range_points = 120

target.kind = far
target.theta = pi/4
target.phi = -pi/3
target.kind = near
target.theta = pi/4
target.phi = pi/4
target.range_zr = 0.3
)";

    std::filesystem::path temp_path(const std::string &name)
    {
        return std::filesystem::temp_directory_path() / ("mixedfield_test_" + name);
    }

    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream f(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }
}

TEST_CASE("expressions", "[config]")
{
    CHECK(evaluate_expression("pi/4") == kPi / 4);
    CHECK(evaluate_expression("-pi/3") == -kPi / 3);
    CHECK(evaluate_expression("5*pi/13") == Approx(5 * kPi / 13));
    CHECK(evaluate_expression("0.23 * pi") == Approx(0.23 * kPi));
    CHECK(evaluate_expression("2*(1+3) - 1") == 7.0);
    CHECK(evaluate_expression("1e-3") == 1e-3);
    CHECK(evaluate_expression("--2") == 2.0);
    for (const char *bad : {"pi/0", "3+", "abc", "(1", "1 2", ""})
        CHECK_THROWS_AS(evaluate_expression(bad), ConfigError);
}

TEST_CASE("config parsing", "[config]")
{
    const ScenarioConfig c = parse_config_string(kDeskConfig);
    CHECK(c.nx == 9);
    CHECK(c.snr_db == std::vector<double>{0.0, 20.0});
    CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::Proposed, Algorithm::LegacyFarDetector});
    REQUIRE(c.targets.size() == 2);
    CHECK(c.targets[0].phi == -kPi / 3);
    CHECK(c.targets[1].kind == TargetKind::NearField);
    CHECK(c.grids.range_points == 120);
    CHECK_NOTHROW(c.validate());
    const Scene sc = c.scene();
    CHECK(sc[1].range == Approx(0.3 * rayleigh_distance(c.geometry())));

    auto error_of = [](const std::string &text) {
        try
        {
            parse_config_string(text).validate();
        }
        catch (const ConfigError &e)
        {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK_THAT(error_of("nx = 9\nbogus = 1\n"), ContainsSubstring(":2: bogus: unknown key"));
    CHECK_THAT(error_of("target.kind = far\ntarget.colour = red\n"), ContainsSubstring("target[1].colour: unknown key"));
    CHECK_THAT(error_of("target.theta = 1\n"), ContainsSubstring("target.kind must open"));
    CHECK_THAT(error_of("nx = 9\nnx\n"), ContainsSubstring("expected 'key = value'"));
    CHECK_THAT(error_of("nx = 9.5\n"), ContainsSubstring("nx: expected an integer"));
    CHECK_THAT(error_of("algorithm = Proposed, Magic\n"), ContainsSubstring("unknown algorithm 'Magic'"));
    CHECK_THAT(error_of("seed = -4\n"), ContainsSubstring("seed: expected an unsigned integer"));
}

TEST_CASE("config validation", "[config]")
{
    const ScenarioConfig base = parse_config_string(kDeskConfig);
    auto rejects = [&](auto mutate, const std::string &needle) {
        ScenarioConfig c = base;
        mutate(c);
        try
        {
            c.validate();
        }
        catch (const ConfigError &e)
        {
            CHECK_THAT(std::string(e.what()), ContainsSubstring(needle));
            return;
        }
        FAIL("accepted an invalid configuration: " << needle);
    };
    rejects([](ScenarioConfig &c) { c.nx = 10; }, "odd");
    rejects([](ScenarioConfig &c) { c.n_rf = 4; }, "");
    rejects([](ScenarioConfig &c) { c.ux = 2; }, "");
    rejects([](ScenarioConfig &c) { c.d0_over_lambda = 0.3; }, "d0_over_lambda");
    rejects([](ScenarioConfig &c) { c.targets[1].range_zr = 1.0; }, "target[2].range");
    rejects([](ScenarioConfig &c) { c.targets[1].range = 3.0; }, "exactly one of range and range_zr");
    rejects([](ScenarioConfig &c) { c.targets[0].theta = 2.0; }, "target[1].theta");
    rejects([](ScenarioConfig &c) { c.targets.clear(); }, "at least one target");
    rejects([](ScenarioConfig &c) { c.snr_db.clear(); }, "snr_db");
    rejects([](ScenarioConfig &c) { c.trials_Q = 0; }, "trials_Q");

    ScenarioConfig quarter = base;
    quarter.d0_over_lambda = 0.25;
    CHECK_NOTHROW(quarter.validate());
    ScenarioConfig full = base;
    full.apply_full_scale();
    CHECK_NOTHROW(full.validate());
    CHECK(full.geometry().n() == 3721);
}

TEST_CASE("estimate matching", "[harness]")
{
    const Scene truth({far_target(0.5, 1.0), near_target(0.7, -2.0, 5.0)});
    SECTION("a planted error is reported exactly")
    {
        const double delta = -0.00390625;
        const Scene one({far_target(0.5, 1.0)});
        TargetEstimate e;
        e.theta = 0.5 + delta;
        e.phi = 1.0;
        RmseAccumulator acc;
        acc.add(match_estimates(one, {e}, 100.0));
        const RmseRow row = acc.row(10.0, "x");
        CHECK(row.theta_rmse == std::abs(delta));
        CHECK(row.phi_rmse == 0.0);
        CHECK(row.r_rmse == 0.0);
    }
    SECTION("greedy nearest neighbour with kinds")
    {
        TargetEstimate a, b;
        a.theta = 0.51;
        a.phi = 1.0;
        b.theta = 0.69;
        b.phi = -2.0;
        const auto m = match_estimates(truth, {b, a}, 100.0);
        CHECK(m.matched == 1);
        CHECK(m.estimate_of == std::vector<int>{1, -1});
        CHECK(m.theta_error[1] == kPi / 2);
        CHECK(m.phi_error[1] == kPi / 2);
        CHECK(m.range_error == std::vector<double>{100.0});

        a.kind = TargetKind::NearField;
        a.range = 6.0;

        a.theta = 0.69;
        a.phi = -2.0 + 2 * kPi - 0.01;
        b.theta = 0.49;
        b.phi = 1.02;
        const auto n = match_estimates(truth, {a, b}, 100.0);
        CHECK(n.complete());
        CHECK(n.estimate_of == std::vector<int>{1, 0});
        CHECK(n.phi_error[1] == Approx(-0.01));
        CHECK(n.range_error[0] == Approx(1.0));
    }
    SECTION("surplus estimates of the same kind lose to the closest one")
    {
        TargetEstimate near1, near2;
        near1.kind = near2.kind = TargetKind::NearField;
        near1.theta = 0.9;
        near2.theta = 0.71;
        near1.phi = near2.phi = -2.0;
        near1.range = near2.range = 5.0;
        const auto m = match_estimates(truth, {near1, near2}, 100.0);
        CHECK(m.estimate_of[1] == 1);
        CHECK(m.estimate_of[0] == -1);
    }
}

TEST_CASE("csv emission", "[harness]")
{
    const auto path = temp_path("table.csv");
    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit_csv(to_csv(RmseTable{}), path.string()), Error);
    CHECK_FALSE(std::filesystem::exists(path));

    RmseRow row;
    row.snr_db = -5.0;
    row.theta_rmse = 0.1 + 0.2;
    row.phi_rmse = 1.0 / 3.0;
    row.r_rmse = 12345.678901234567;
    row.algorithm = "Proposed";
    emit_csv(to_csv(RmseTable{row}), path.string());
    const std::string text = slurp(path);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(text.rfind("snr_db,theta_rmse,phi_rmse,r_rmse,algorithm\n", 0) == 0);
    std::istringstream in(text);
    std::string header, data;
    std::getline(in, header);
    std::getline(in, data);
    std::vector<std::string> cells;
    std::stringstream ss(data);
    for (std::string cell; std::getline(ss, cell, ',');)
        cells.push_back(cell);
    REQUIRE(cells.size() == 5);
    CHECK(std::strtod(cells[0].c_str(), nullptr) == row.snr_db);
    CHECK(std::strtod(cells[1].c_str(), nullptr) == row.theta_rmse);
    CHECK(std::strtod(cells[2].c_str(), nullptr) == row.phi_rmse);
    CHECK(std::strtod(cells[3].c_str(), nullptr) == row.r_rmse);
    CHECK(cells[4] == "Proposed");
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_csv(to_csv(RmseTable{row}), "/nonexistent-dir/x.csv"), Error);

    Spectrum s;
    s.x = {0.5, -0.25, 0.0};
    s.y = {1.0, 2.0, 3.0};
    CHECK(render_spectrum(s, "beta") == "beta,spectrum\n-0.25,2\n0,3\n0.5,1\n");
    CHECK_THROWS_AS(emit_spectrum(Spectrum{}, "beta", temp_path("s.csv").string()), Error);
}

TEST_CASE("monte carlo is deterministic across worker counts", "[harness]")
{
    const ScenarioConfig c = parse_config_string(kDeskConfig);
    const std::string one = render_csv(to_csv(run_monte_carlo(c, 1)));
    const std::string three = render_csv(to_csv(run_monte_carlo(c, 3)));
    CHECK(one == three);
    const RmseTable t = run_monte_carlo(c, 2);
    CHECK(t.size() == c.snr_db.size() * c.algorithms.size());
    CHECK(t[0].algorithm == "Proposed");
    CHECK(t[1].algorithm == "LegacyFarDetector");
    CHECK(t[2].snr_db == 20.0);
    for (const auto &r : t)
        CHECK((r.theta_rmse >= 0.0 && r.phi_rmse >= 0.0 && r.r_rmse >= 0.0));
    ScenarioConfig other = c;
    other.seed = 12;
    CHECK(render_csv(to_csv(run_monte_carlo(other, 1))) != one);
}

TEST_CASE("high-SNR errors stay within a grid cell", "[harness]")
{
    ScenarioConfig c;
    c.nx = c.ny = 15;
    c.n_rf = 15;
    c.ux = 15;
    c.uy = 1;
    c.snapshots_L = 100;
    c.trials_Q = 2;
    c.snr_db = {60.0};
    c.targets = {{TargetKind::FarField, 0.6, 2.0, 0.0, 0.0, 1.0}, {TargetKind::NearField, 0.4, -0.9, 0.0, 0.3, 1.0}};
    const AlgorithmSetup s = make_setup(c, Algorithm::Proposed);
    const auto rows = run_monte_carlo(c, 1);
    REQUIRE(rows.size() == 1);
    const double cell = c.grids.alpha_cell();
    double theta_cell = 0.0, phi_cell = 0.0;
    for (const auto &t : s.scene.targets())
    {
        theta_cell = std::max(theta_cell, 2.0 * cell / std::cos(t.theta));
        phi_cell = std::max(phi_cell, 2.0 * cell / std::sin(t.theta));
    }
    const auto r = s.grid.range_grid();
    CHECK(rows[0].theta_rmse < theta_cell);
    CHECK(rows[0].phi_rmse < phi_cell);
    CHECK(rows[0].r_rmse < (r[1] / r[0] - 1.0) * s.scene[1].range);
}

TEST_CASE("errors shrink as SNR grows", "[harness][property]")
{
    ScenarioConfig c;
    c.nx = c.ny = 11;
    c.n_rf = 11;
    c.ux = 11;
    c.uy = 1;
    c.snapshots_L = 60;
    c.trials_Q = 8;
    c.snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
    c.targets = reference_targets(0.27, 0.36);
    const auto rows = run_monte_carlo(c, 1);
    for (std::size_t i = 1; i < rows.size(); ++i)
    {
        // Monte-Carlo slack: one standard error of a Q=8 RMSE is about 25%
        CHECK(rows[i].theta_rmse <= 1.25 * rows[i - 1].theta_rmse + 1e-4);
        CHECK(rows[i].phi_rmse <= 1.25 * rows[i - 1].phi_rmse + 1e-4);
        CHECK(rows[i].r_rmse <= 1.25 * rows[i - 1].r_rmse + 1e-2);
    }
}

TEST_CASE("runtime report", "[harness]")
{
    ScenarioConfig c = parse_config_string(kDeskConfig);
    c.algorithms = {Algorithm::Proposed, Algorithm::ProposedDft};
    const auto rep = bench_runtime(c, {{7, 7}, {9, 9}}, 3);
    REQUIRE(rep.size() == 4);
    CHECK(rep[0].nx == 7);
    CHECK(rep[3].algorithm == "ProposedDft");
    for (const auto &r : rep)
        CHECK(r.wall_seconds > 0.0);
    const ScenarioConfig big = resized(c, 15, 15);
    CHECK(big.scene()[1].range == Approx(0.3 * rayleigh_distance(big.geometry())));
}
