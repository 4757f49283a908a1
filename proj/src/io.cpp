// SPDX-License-Identifier: Apache-2.0
//
// lensmimo: link-level simulator for RF lens-embedded massive MIMO downlinks
// Copyright (C) 2026 The lensmimo authors
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

#include "lensmimo/io.hpp"
#include "lensmimo/errors.hpp"
#include "lensmimo/format.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <mutex>
#include <thread>

namespace lensmimo::io
{
    namespace fs = std::filesystem;

    namespace
    {
        const std::string config_begin = "# --- configuration ---";
        const std::string config_end = "# ---";

        std::vector<std::string> split_lines(const std::string &text)
        {
            std::vector<std::string> lines;
            std::istringstream in(text);
            std::string line;
            while (std::getline(in, line))
            {
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                lines.push_back(line);
            }
            return lines;
        }

        std::vector<std::string> split(const std::string &line, char sep)
        {
            std::vector<std::string> out;
            std::size_t start = 0;
            for (;;)
            {
                const std::size_t pos = line.find(sep, start);
                out.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
                if (pos == std::string::npos)
                    return out;
                start = pos + 1;
            }
        }

        double parse_number(const std::string &s, const std::string &where)
        {
            double v = 0.0;
            const char *end = s.data() + s.size();
            const auto res = std::from_chars(s.data(), end, v);
            if (res.ec != std::errc() || res.ptr != end)
                throw IoError(where + ": invalid number '" + s + "'.");
            return v;
        }

        std::string params_text(const Params &params)
        {
            std::string s;
            for (const auto &[k, v] : params)
                if (k != "hash")
                    s += k + "=" + v + "\n";
            return s;
        }

        std::string config_section(const std::string &config_dump)
        {
            return config_begin + "\n" + comment_block(config_dump) + config_end + "\n";
        }
    }

    void write_file(const fs::path &path, const std::string &content)
    {
        try
        {
            if (path.has_parent_path())
                fs::create_directories(path.parent_path());
        }
        catch (const fs::filesystem_error &e)
        {
            throw IoError("Cannot create directory for '" + path.string() + "': " + e.what());
        }

        fs::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
                throw IoError("Cannot open '" + tmp.string() + "' for writing.");
            out << content;
            out.flush();
            if (!out)
                throw IoError("Failed writing '" + tmp.string() + "'.");
        }
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec)
            throw IoError("Cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }

    std::string read_file(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw IoError("Cannot read '" + path.string() + "'.");
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::string comment_block(const std::string &text)
    {
        std::string out;
        for (const auto &line : split_lines(text))
            out += line.empty() ? "#\n" : "# " + line + "\n";
        return out;
    }

    std::string embedded_config(const std::string &text)
    {
        std::string out;
        bool inside = false;
        for (const auto &line : split_lines(text))
        {
            if (!inside)
            {
                if (line == config_begin)
                    inside = true;
                else if (line.empty() || line[0] != '#')
                    break;
                continue;
            }
            if (line == config_end)
                return out;
            if (line.rfind("# ", 0) == 0)
                out += line.substr(2) + "\n";
            else if (line == "#")
                out += "\n";
            else
                break;
        }
        return {};
    }

    // ---------------------------------------------------------------------------------------------

    std::string ProfileTable::hash() const
    {
        for (const auto &[k, v] : params)
            if (k == "hash")
                return v;
        return {};
    }

    const PowerProfile &ProfileTable::nearest(double angle_deg, double max_gap_deg) const
    {
        if (rows.empty())
            throw ConfigError("Power-profile table is empty.");
        std::size_t best = 0;
        double gap = std::abs(rows[0].angle_deg - angle_deg);
        for (std::size_t i = 1; i < rows.size(); ++i)
        {
            const double g = std::abs(rows[i].angle_deg - angle_deg);
            if (g < gap || (g == gap && rows[i].angle_deg < rows[best].angle_deg))
            {
                gap = g;
                best = i;
            }
        }
        if (gap > max_gap_deg + 1e-12)
            throw ConfigError("No cached power profile within " + format_double(max_gap_deg) + " deg of " + format_double(angle_deg) +
                              " deg (nearest is " + format_double(rows[best].angle_deg) + " deg).");
        return rows[best];
    }

    Params profile_table_params(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                const waveoptics::ArraySpec &array, const std::vector<double> &angles)
    {
        Params p{
            {"focal_length", format_double(lens.focal_length)},
            {"aperture", format_double(lens.aperture)},
            {"permittivity", format_double(lens.permittivity)},
            {"lens_distance", format_double(array.lens_distance)},
            {"antennas", std::to_string(array.num_antennas)},
            {"spacing", format_double(array.spacing)},
            {"dx", format_double(grid.dx)},
            {"dz", format_double(grid.dz)},
            {"window", format_double(grid.window)},
            {"kernel", waveoptics::to_string(grid.kernel)},
            {"angles", std::to_string(angles.size())},
            {"aod_first", angles.empty() ? "none" : format_double(angles.front())},
            {"aod_last", angles.empty() ? "none" : format_double(angles.back())},
        };
        p.emplace_back("hash", to_hex(fnv1a64(params_text(p))));
        return p;
    }

    ProfileTable build_profile_table(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                     const waveoptics::ArraySpec &array, const std::vector<double> &angles, std::size_t threads)
    {
        ProfileTable t;
        t.params = profile_table_params(lens, grid, array, angles);
        t.rows.resize(angles.size());

        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::size_t error_index = angles.size();
        std::mutex mutex;
        auto worker = [&]()
        {
            for (std::size_t i = next.fetch_add(1); i < angles.size(); i = next.fetch_add(1))
            {
                try
                {
                    t.rows[i] = waveoptics::bpm_power_profile(lens, grid, array, angles[i]);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(mutex);
                    if (i < error_index)
                    {
                        error_index = i;
                        error = std::current_exception();
                    }
                }
            }
        };

        threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, angles.size()));
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (std::size_t i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (error)
            std::rethrow_exception(error);
        return t;
    }

    std::string format_profile_table(const ProfileTable &table)
    {
        std::string s = "# lensmimo power-profile table\n";
        for (const auto &[k, v] : table.params)
            s += "# " + k + "=" + v + "\n";
        s += "aod_deg";
        for (std::size_t m = 1; m <= table.num_antennas(); ++m)
            s += ",a_" + std::to_string(m);
        s += "\n";
        for (const auto &row : table.rows)
        {
            s += format_double(row.angle_deg);
            for (Eigen::Index m = 0; m < row.values.size(); ++m)
                s += "," + format_double(row.values[m]);
            s += "\n";
        }
        return s;
    }

    ProfileTable parse_profile_table(const std::string &text, const std::string &source_name)
    {
        ProfileTable t;
        const auto lines = split_lines(text);
        std::size_t i = 0;
        for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i)
        {
            const std::string body = lines[i].substr(std::min<std::size_t>(2, lines[i].size()));
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                t.params.emplace_back(body.substr(0, eq), body.substr(eq + 1));
        }
        if (t.hash().empty() || t.hash() != to_hex(fnv1a64(params_text(t.params))))
            throw IoError(source_name + ": parameter header is missing or does not match its hash.");
        if (i >= lines.size() || lines[i].rfind("aod_deg", 0) != 0)
            throw IoError(source_name + ": missing column header.");

        const std::size_t columns = split(lines[i], ',').size();
        if (columns < 2)
            throw IoError(source_name + ": table has no antenna columns.");
        for (++i; i < lines.size(); ++i)
        {
            if (lines[i].empty())
                continue;
            const auto fields = split(lines[i], ',');
            const std::string where = source_name + ":" + std::to_string(i + 1);
            if (fields.size() != columns)
                throw IoError(where + ": expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()) + ".");
            PowerProfile p;
            p.angle_deg = parse_number(fields[0], where);
            p.values.resize(static_cast<Eigen::Index>(columns - 1));
            for (std::size_t c = 1; c < columns; ++c)
                p.values[static_cast<Eigen::Index>(c - 1)] = parse_number(fields[c], where);
            t.rows.push_back(std::move(p));
        }
        return t;
    }

    void write_profile_table(const fs::path &path, const ProfileTable &table) { write_file(path, format_profile_table(table)); }

    ProfileTable read_profile_table(const fs::path &path) { return parse_profile_table(read_file(path), path.string()); }

    // ---------------------------------------------------------------------------------------------

    std::string codebook_key(const linklevel::ScenarioConfig &cfg, std::size_t user)
    {
        const auto &q = cfg.quantizer;
        std::string key = "M=" + std::to_string(cfg.num_antennas) + ";B=" + std::to_string(cfg.effective_bits()) +
                          ";seed=" + std::to_string(cfg.seed) + ";user=" + std::to_string(user) +
                          ";kind=" + linklevel::to_string(q.kind);
        if (q.kind == linklevel::QuantizerKind::rvq)
            return key;
        key += ";angle=" + format_double(cfg.user_angles_deg.at(user)) + ";sigma=" + format_double(cfg.sigma_deg) +
               ";d=" + format_double(cfg.spacing);
        if (q.kind == linklevel::QuantizerKind::mvcq && cfg.lens_enabled)
        {
            key += ";source=" + q.source_label() + ";f=" + format_double(cfg.lens.focal_length) +
                   ";D=" + format_double(cfg.lens.aperture) + ";eps=" + format_double(cfg.lens.permittivity) +
                   ";ell=" + format_double(cfg.lens_distance) + ";dx=" + format_double(cfg.grid.dx) +
                   ";dz=" + format_double(cfg.grid.dz) + ";W=" + format_double(cfg.grid.window) +
                   ";kernel=" + waveoptics::to_string(cfg.grid.kernel);
            if (q.source == linklevel::ProfileSource::gaussian)
                key += ";fit_angles=" + format_list(cfg.gaussian_fit_angles_deg);
        }
        else if (q.kind == linklevel::QuantizerKind::mvcq)
            key += ";lens=off";
        return key;
    }

    std::string format_codebook(const std::string &key, const feedback::Codebook &codebook)
    {
        std::string s = "# lensmimo codebook\n";
        s += "# key=" + key + "\n";
        s += "# kind=" + feedback::to_string(codebook.kind) + "\n";
        s += "# bits=" + std::to_string(codebook.bits) + "\n";
        if (codebook.user_angle_deg)
            s += "# angle=" + format_double(*codebook.user_angle_deg) + "\n";
        s += "# rows=" + std::to_string(codebook.vectors.rows()) + "\n";
        s += "# cols=" + std::to_string(codebook.vectors.cols()) + "\n";
        for (Eigen::Index j = 0; j < codebook.vectors.cols(); ++j)
        {
            for (Eigen::Index m = 0; m < codebook.vectors.rows(); ++m)
            {
                const cdouble c = codebook.vectors(m, j);
                s += (m ? "," : "") + format_double(c.real()) + "," + format_double(c.imag());
            }
            s += "\n";
        }
        return s;
    }

    bool parse_codebook(const std::string &text, const std::string &key, feedback::Codebook &codebook)
    {
        const auto lines = split_lines(text);
        Params p;
        std::size_t i = 0;
        for (; i < lines.size() && !lines[i].empty() && lines[i][0] == '#'; ++i)
        {
            const std::string body = lines[i].substr(std::min<std::size_t>(2, lines[i].size()));
            const auto eq = body.find('=');
            if (eq != std::string::npos)
                p.emplace_back(body.substr(0, eq), body.substr(eq + 1));
        }
        auto get = [&p](const std::string &k) -> std::string
        {
            for (const auto &[pk, v] : p)
                if (pk == k)
                    return v;
            return {};
        };
        if (get("key") != key)
            return false;

        feedback::Codebook c;
        try
        {
            c.kind = feedback::codebook_kind_from_string(get("kind"));
            c.bits = static_cast<unsigned>(std::stoul(get("bits")));
            if (!get("angle").empty())
                c.user_angle_deg = parse_number(get("angle"), "codebook");
            const auto rows = static_cast<Eigen::Index>(std::stol(get("rows")));
            const auto cols = static_cast<Eigen::Index>(std::stol(get("cols")));
            c.vectors.resize(rows, cols);
            for (Eigen::Index j = 0; j < cols; ++j, ++i)
            {
                if (i >= lines.size())
                    throw IoError("codebook is truncated.");
                const auto fields = split(lines[i], ',');
                if (static_cast<Eigen::Index>(fields.size()) != 2 * rows)
                    throw IoError("codebook line " + std::to_string(i + 1) + " has the wrong length.");
                for (Eigen::Index m = 0; m < rows; ++m)
                    c.vectors(m, j) = cdouble(parse_number(fields[static_cast<std::size_t>(2 * m)], "codebook"),
                                              parse_number(fields[static_cast<std::size_t>(2 * m + 1)], "codebook"));
            }
        }
        catch (const IoError &)
        {
            throw;
        }
        catch (const std::exception &e)
        {
            throw IoError(std::string("Malformed codebook file: ") + e.what());
        }
        codebook = std::move(c);
        return true;
    }

    // ---------------------------------------------------------------------------------------------

    std::string format_sim_csv(const std::string &config_dump, const std::string &combination, const linklevel::SimResult &result)
    {
        std::string s = "# lensmimo simulation result\n";
        s += "# combination: " + combination + "\n";
        s += config_section(config_dump);
        s += "snr_db,mean_sum_rate,stderr,trials\n";
        for (const auto &p : result.points)
            s += format_double(p.snr_db) + "," + format_double(p.mean_sum_rate) + "," + format_double(p.stderr_sum_rate) + "," +
                 std::to_string(p.trials) + "\n";
        return s;
    }

    std::string format_comparison(const std::string &config_dump,
                                  const std::vector<std::pair<std::string, linklevel::SimResult>> &results)
    {
        std::string s = "# lensmimo sum-rate comparison (bps/Hz)\n";
        s += config_section(config_dump);
        s += "snr_db";
        for (const auto &[label, r] : results)
            s += "," + label + "_mean," + label + "_stderr";
        s += "\n";
        if (results.empty())
            return s;
        const std::size_t n = results.front().second.points.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            s += format_double(results.front().second.points[i].snr_db);
            for (const auto &[label, r] : results)
            {
                if (r.points.size() != n)
                    throw ConfigError("Results in a comparison table must share the SNR grid.");
                s += "," + format_double(r.points[i].mean_sum_rate) + "," + format_double(r.points[i].stderr_sum_rate);
            }
            s += "\n";
        }
        return s;
    }
}
