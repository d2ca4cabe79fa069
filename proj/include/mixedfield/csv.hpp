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

#ifndef MIXEDFIELD_CSV_HPP
#define MIXEDFIELD_CSV_HPP

#include "mixedfield/crb.hpp"
#include "mixedfield/experiment.hpp"
#include "mixedfield/peaks.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace mixedfield
{
    struct CsvTable
    {
        std::vector<std::string> header;
        std::vector<std::vector<std::string>> rows;
    };

    // Shortest text that always reads back to the same double.
    inline std::string format_number(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    inline std::string render_csv(const CsvTable &t)
    {
        std::string out;
        auto line = [&](const std::vector<std::string> &cells) {
            for (std::size_t i = 0; i < cells.size(); ++i)
            {
                if (i)
                    out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(t.header);
        for (const auto &r : t.rows)
            line(r);
        return out;
    }

    inline void write_text_file(const std::string &path, const std::string &text)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error("cannot open '" + path + "' for writing");
        f << text;
        f.close();
        if (!f)
            throw Error("failed writing '" + path + "'");
    }

    inline void emit_csv(const CsvTable &t, const std::string &path)
    {
        if (t.rows.empty())
            throw Error("refusing to write an empty table to '" + path + "'");
        write_text_file(path, render_csv(t));
    }

    inline CsvTable to_csv(const RmseTable &t)
    {
        CsvTable c{{"snr_db", "theta_rmse", "phi_rmse", "r_rmse", "algorithm"}, {}};
        for (const auto &r : t)
            c.rows.push_back({format_number(r.snr_db), format_number(r.theta_rmse), format_number(r.phi_rmse),
                              format_number(r.r_rmse), r.algorithm});
        return c;
    }

    inline CsvTable to_csv(const RuntimeReport &t)
    {
        CsvTable c{{"nx", "ny", "algorithm", "wall_seconds"}, {}};
        for (const auto &r : t)
            c.rows.push_back({std::to_string(r.nx), std::to_string(r.ny), r.algorithm, format_number(r.wall_seconds)});
        return c;
    }

    struct CrbRow
    {
        double snr_db = 0.0;
        std::string parameter;
        double value = 0.0;
        double rcrb = 0.0;
    };

    inline CsvTable to_csv(const std::vector<CrbRow> &t)
    {
        CsvTable c{{"snr_db", "parameter", "value", "rcrb"}, {}};
        for (const auto &r : t)
            c.rows.push_back({format_number(r.snr_db), r.parameter, format_number(r.value), format_number(r.rcrb)});
        return c;
    }

    // Two columns, ascending in the parameter, header "<axis>,spectrum".
    inline std::string render_spectrum(const Spectrum &s, const std::string &axis)
    {
        std::vector<std::size_t> order(s.size());
        std::iota(order.begin(), order.end(), std::size_t(0));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
        std::string out = axis + ",spectrum\n";
        for (const std::size_t i : order)
            out += format_number(s.x[i]) + "," + format_number(s.y[i]) + "\n";
        return out;
    }

    inline void emit_spectrum(const Spectrum &s, const std::string &axis, const std::string &path)
    {
        if (s.size() == 0)
            throw Error("refusing to write an empty spectrum to '" + path + "'");
        write_text_file(path, render_spectrum(s, axis));
    }

} // namespace mixedfield

#endif
