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

#ifndef MIXEDFIELD_CONFIG_HPP
#define MIXEDFIELD_CONFIG_HPP

#include "mixedfield/frontend.hpp"
#include "mixedfield/music3d.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mixedfield
{
    enum class Algorithm
    {
        Proposed,
        ProposedDft,
        Music3D,
        QuarterWave,
        LegacyFarDetector
    };

    inline const std::vector<std::pair<Algorithm, std::string>> &algorithm_names()
    {
        static const std::vector<std::pair<Algorithm, std::string>> names{{Algorithm::Proposed, "Proposed"},
                                                                           {Algorithm::ProposedDft, "ProposedDft"},
                                                                           {Algorithm::Music3D, "Music3D"},
                                                                           {Algorithm::QuarterWave, "QuarterWave"},
                                                                           {Algorithm::LegacyFarDetector, "LegacyFarDetector"}};
        return names;
    }

    inline std::string to_string(Algorithm a)
    {
        for (const auto &[k, v] : algorithm_names())
            if (k == a)
                return v;
        return "?";
    }

    inline Algorithm parse_algorithm(const std::string &s)
    {
        for (const auto &[k, v] : algorithm_names())
            if (v == s)
                return k;
        throw ConfigError("unknown algorithm '" + s + "'");
    }

    enum class CombinerKind
    {
        Dft,
        Random
    };

    // A target as written in a config: near ranges may be absolute or a fraction of Z_R.
    struct TargetSpec
    {
        TargetKind kind = TargetKind::FarField;
        double theta = 0.0;
        double phi = 0.0;
        double range = 0.0;    // metres; 0 when range_zr is used
        double range_zr = 0.0; // fraction of the Rayleigh distance
        double power = 1.0;

        TargetTruth resolve(const UpaGeometry &g) const
        {
            if (kind == TargetKind::FarField)
                return far_target(theta, phi, power);
            return near_target(theta, phi, range_zr > 0.0 ? range_zr * rayleigh_distance(g) : range, power);
        }
    };

    struct ScenarioConfig
    {
        double frequency_hz = 10e9;
        int nx = 21, ny = 21;
        double d0_over_lambda = 0.5;
        int n_rf = 21, ux = 21, uy = 1;
        int snapshots_L = 200;
        std::vector<double> snr_db{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
        std::vector<TargetSpec> targets;
        GridSpec grids;
        Music3DGrid music3d;
        PatternThresholds thresholds;
        std::uint64_t seed = 1;
        std::vector<Algorithm> algorithms{Algorithm::Proposed};
        int trials_Q = 20;
        CombinerKind combiner = CombinerKind::Dft;
        SourceKind source = SourceKind::ComplexGaussian;

        UpaGeometry geometry() const { return UpaGeometry::from_frequency(nx, ny, frequency_hz, d0_over_lambda); }

        Scene scene() const { return scene_for(geometry()); }

        // Near ranges given relative to Z_R follow the geometry they are resolved against.
        Scene scene_for(const UpaGeometry &g) const
        {
            Scene s;
            for (const auto &t : targets)
                s.add(t.resolve(g));
            return s;
        }

        void validate() const
        {
            require(d0_over_lambda == 0.5 || d0_over_lambda == 0.25, "d0_over_lambda: must be 0.5 or 0.25");
            UpaGeometry g;
            try
            {
                g = geometry();
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(std::string("nx/ny: ") + e.what());
            }
            try
            {
                build_layout(g, n_rf, ux, uy);
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(std::string("n_rf/ux/uy: ") + e.what());
            }
            require(snapshots_L >= 1, "snapshots_L: must be at least 1");
            require(trials_Q >= 1, "trials_Q: must be at least 1");
            require(!snr_db.empty(), "snr_db: at least one value is required");
            require(!algorithms.empty(), "algorithm: at least one algorithm is required");
            require(!targets.empty(), "target: at least one target is required");
            require(int(targets.size()) < g.n(), "target: more targets than antennas");
            grids.resolved(g);
            for (std::size_t i = 0; i < targets.size(); ++i)
            {
                const auto &t = targets[i];
                const std::string path = "target[" + std::to_string(i + 1) + "]";
                require(t.theta >= 0.0 && t.theta <= kPi / 2, path + ".theta: must lie in [0, pi/2]");
                require(t.phi >= -kPi && t.phi <= kPi, path + ".phi: must lie in [-pi, pi]");
                require(t.power > 0.0, path + ".power: must be positive");
                if (t.kind == TargetKind::NearField)
                {
                    require((t.range > 0.0) != (t.range_zr > 0.0), path + ": give exactly one of range and range_zr");
                    const double r = t.resolve(g).range;
                    require(r < rayleigh_distance(g), path + ".range: " + std::to_string(r) +
                                                          " m is not below the Rayleigh distance " +
                                                          std::to_string(rayleigh_distance(g)) + " m");
                    require(r > g.d0 * std::hypot(g.half_x(), g.half_y()), path + ".range: target lies inside the aperture");
                }
            }
        }

        // Full-scale setting: 61 x 61 array, one RF chain per row, fine grids.
        void apply_full_scale()
        {
            nx = ny = 61;
            n_rf = 61;
            ux = 61;
            uy = 1;
            snapshots_L = 500;
            trials_Q = 100;
            grids.alpha_points = grids.beta_points = 10000;
            grids.range_points = 1000;
        }
    };

    // ------------------------------------------------------------ expressions

    // Arithmetic on numbers and the constant pi: + - * / and parentheses.
    class ExpressionParser
    {
    public:
        explicit ExpressionParser(std::string text) : s_(std::move(text)) {}

        double parse()
        {
            const double v = sum();
            skip();
            if (pos_ != s_.size())
                fail("unexpected '" + s_.substr(pos_, 1) + "'");
            return v;
        }

    private:
        std::string s_;
        std::size_t pos_ = 0;

        [[noreturn]] void fail(const std::string &why) const { throw ConfigError("cannot evaluate '" + s_ + "': " + why); }

        void skip()
        {
            while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
                ++pos_;
        }

        bool eat(char c)
        {
            skip();
            if (pos_ < s_.size() && s_[pos_] == c)
            {
                ++pos_;
                return true;
            }
            return false;
        }

        double sum()
        {
            double v = product();
            for (;;)
            {
                if (eat('+'))
                    v += product();
                else if (eat('-'))
                    v -= product();
                else
                    return v;
            }
        }

        double product()
        {
            double v = unary();
            for (;;)
            {
                if (eat('*'))
                    v *= unary();
                else if (eat('/'))
                {
                    const double d = unary();
                    if (d == 0.0)
                        fail("division by zero");
                    v /= d;
                }
                else
                    return v;
            }
        }

        double unary()
        {
            if (eat('-'))
                return -unary();
            if (eat('+'))
                return unary();
            return atom();
        }

        double atom()
        {
            skip();
            if (eat('('))
            {
                const double v = sum();
                if (!eat(')'))
                    fail("missing ')'");
                return v;
            }
            if (s_.compare(pos_, 2, "pi") == 0)
            {
                pos_ += 2;
                return kPi;
            }
            const char *begin = s_.c_str() + pos_;
            char *end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin)
                fail(pos_ < s_.size() ? "unexpected '" + s_.substr(pos_, 1) + "'" : "unexpected end");
            pos_ += std::size_t(end - begin);
            return v;
        }
    };

    inline double evaluate_expression(const std::string &text) { return ExpressionParser(text).parse(); }

    // ----------------------------------------------------------------- parsing

    namespace detail
    {
        inline std::string trim(const std::string &s)
        {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos)
                return {};
            return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
        }

        inline std::vector<std::string> split_list(const std::string &s)
        {
            std::vector<std::string> out;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!trim(item).empty())
                    out.push_back(trim(item));
            return out;
        }

        inline int as_int(const std::string &v)
        {
            const double d = evaluate_expression(v);
            if (d != std::floor(d) || std::abs(d) > 1e9)
                throw ConfigError("expected an integer, got '" + v + "'");
            return int(d);
        }

        inline std::uint64_t as_u64(const std::string &v)
        {
            std::size_t used = 0;
            unsigned long long x = 0;
            try
            {
                x = std::stoull(v, &used, 0);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used != v.size() || v.empty() || v[0] == '-')
                throw ConfigError("expected an unsigned integer, got '" + v + "'");
            return x;
        }
    }

    // Flat "key = value" text. '#' starts a comment. Each "target.kind" line opens a new
    // target group; the other target.* keys fill the most recent group.
    inline ScenarioConfig parse_config(std::istream &in, const std::string &source = "<config>")
    {
        using namespace detail;
        ScenarioConfig c;
        c.targets.clear();
        std::map<std::string, std::function<void(const std::string &)>> keys{
            {"frequency_hz", [&](const std::string &v) { c.frequency_hz = evaluate_expression(v); }},
            {"nx", [&](const std::string &v) { c.nx = as_int(v); }},
            {"ny", [&](const std::string &v) { c.ny = as_int(v); }},
            {"d0_over_lambda", [&](const std::string &v) { c.d0_over_lambda = evaluate_expression(v); }},
            {"n_rf", [&](const std::string &v) { c.n_rf = as_int(v); }},
            {"ux", [&](const std::string &v) { c.ux = as_int(v); }},
            {"uy", [&](const std::string &v) { c.uy = as_int(v); }},
            {"snapshots_L", [&](const std::string &v) { c.snapshots_L = as_int(v); }},
            {"trials_Q", [&](const std::string &v) { c.trials_Q = as_int(v); }},
            {"seed", [&](const std::string &v) { c.seed = as_u64(v); }},
            {"snr_db",
             [&](const std::string &v) {
                 c.snr_db.clear();
                 for (const auto &x : split_list(v))
                     c.snr_db.push_back(evaluate_expression(x));
             }},
            {"algorithm",
             [&](const std::string &v) {
                 c.algorithms.clear();
                 for (const auto &x : split_list(v))
                     c.algorithms.push_back(parse_algorithm(x));
             }},
            {"combiner",
             [&](const std::string &v) {
                 if (v != "dft" && v != "random")
                     throw ConfigError("expected dft or random, got '" + v + "'");
                 c.combiner = v == "dft" ? CombinerKind::Dft : CombinerKind::Random;
             }},
            {"source",
             [&](const std::string &v) {
                 if (v != "gaussian" && v != "unit_modulus")
                     throw ConfigError("expected gaussian or unit_modulus, got '" + v + "'");
                 c.source = v == "gaussian" ? SourceKind::ComplexGaussian : SourceKind::UnitModulusRandomPhase;
             }},
            {"grid.alpha_points", [&](const std::string &v) { c.grids.alpha_points = as_int(v); }},
            {"grid.beta_points", [&](const std::string &v) { c.grids.beta_points = as_int(v); }},
            {"grid.range_points", [&](const std::string &v) { c.grids.range_points = as_int(v); }},
            {"grid.range_min", [&](const std::string &v) { c.grids.range_min = evaluate_expression(v); }},
            {"grid.range_max", [&](const std::string &v) { c.grids.range_max = evaluate_expression(v); }},
            {"grid.range_scale",
             [&](const std::string &v) {
                 if (v != "log" && v != "linear")
                     throw ConfigError("expected log or linear, got '" + v + "'");
                 c.grids.range_scale = v == "log" ? RangeScale::Logarithmic : RangeScale::Linear;
             }},
            {"music3d.theta_points", [&](const std::string &v) { c.music3d.theta_points = as_int(v); }},
            {"music3d.phi_points", [&](const std::string &v) { c.music3d.phi_points = as_int(v); }},
            {"music3d.range_points", [&](const std::string &v) { c.music3d.range_points = as_int(v); }},
            {"music3d.zoom_levels", [&](const std::string &v) { c.music3d.zoom_levels = as_int(v); }},
            {"music3d.zoom_points", [&](const std::string &v) { c.music3d.zoom_points = as_int(v); }},
            {"thresholds.tau_amb", [&](const std::string &v) { c.thresholds.tau_amb = evaluate_expression(v); }},
            {"thresholds.tau_mono", [&](const std::string &v) { c.thresholds.tau_mono = evaluate_expression(v); }},
            {"thresholds.far_window", [&](const std::string &v) { c.thresholds.far_window = evaluate_expression(v); }},
        };
        auto current = [&]() -> TargetSpec & {
            if (c.targets.empty())
                throw ConfigError("target.kind must open each target group");
            return c.targets.back();
        };
        std::map<std::string, std::function<void(const std::string &)>> target_keys{
            {"kind",
             [&](const std::string &v) {
                 if (v != "far" && v != "near")
                     throw ConfigError("expected far or near, got '" + v + "'");
                 c.targets.push_back({});
                 c.targets.back().kind = v == "far" ? TargetKind::FarField : TargetKind::NearField;
             }},
            {"theta", [&](const std::string &v) { current().theta = evaluate_expression(v); }},
            {"phi", [&](const std::string &v) { current().phi = evaluate_expression(v); }},
            {"range", [&](const std::string &v) { current().range = evaluate_expression(v); }},
            {"range_zr", [&](const std::string &v) { current().range_zr = evaluate_expression(v); }},
            {"power", [&](const std::string &v) { current().power = evaluate_expression(v); }},
        };

        std::string line;
        int lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.resize(hash);
            line = trim(line);
            if (line.empty())
                continue;
            const std::string where = source + ":" + std::to_string(lineno);
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(where + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
            std::string path = key;
            try
            {
                if (key.rfind("target.", 0) == 0)
                {
                    path = "target[" + std::to_string(c.targets.size() + (key == "target.kind" ? 1 : 0)) + "]." + key.substr(7);
                    const auto it = target_keys.find(key.substr(7));
                    if (it == target_keys.end())
                        throw ConfigError("unknown key");
                    it->second(value);
                }
                else
                {
                    const auto it = keys.find(key);
                    if (it == keys.end())
                        throw ConfigError("unknown key");
                    it->second(value);
                }
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(where + ": " + path + ": " + e.what());
            }
        }
        return c;
    }

    inline ScenarioConfig parse_config_string(const std::string &text)
    {
        std::istringstream in(text);
        return parse_config(in);
    }

    inline ScenarioConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file '" + path + "'");
        return parse_config(in, path);
    }

    // The two-far two-near evaluation scene with near ranges relative to Z_R.
    inline std::vector<TargetSpec> reference_targets(double r3_zr = 0.27, double r4_zr = 0.36)
    {
        return {{TargetKind::FarField, kPi / 4, -kPi / 3, 0.0, 0.0, 1.0},
                {TargetKind::FarField, kPi / 8, kPi / 3, 0.0, 0.0, 1.0},
                {TargetKind::NearField, kPi / 4, kPi / 4, 0.0, r3_zr, 1.0},
                {TargetKind::NearField, kPi / 8, kPi / 4, 0.0, r4_zr, 1.0}};
    }

} // namespace mixedfield

#endif
