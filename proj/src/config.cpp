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

#include "lensmimo/config.hpp"
#include "lensmimo/errors.hpp"
#include "lensmimo/format.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace lensmimo::config
{
    namespace
    {
        class Reader
        {
        public:
            explicit Reader(std::string source) : source_(std::move(source)) {}

            std::string where(const YAML::Node &n) const
            {
                const auto m = n.Mark();
                if (m.is_null())
                    return source_;
                return source_ + ":" + std::to_string(m.line + 1);
            }

            [[noreturn]] void fail(const YAML::Node &n, const std::string &msg) const { throw ConfigError(where(n) + ": " + msg); }

            void expect_map(const YAML::Node &n, const std::string &name) const
            {
                if (!n.IsMap())
                    fail(n, "'" + name + "' must be a mapping.");
            }

            void check_keys(const YAML::Node &n, const std::string &section, const std::set<std::string> &allowed) const
            {
                for (const auto &kv : n)
                {
                    const std::string key = kv.first.as<std::string>();
                    if (allowed.count(key) == 0)
                        fail(kv.first, "unknown key '" + key + "'" + (section.empty() ? "" : " in section '" + section + "'") + ".");
                }
            }

            template <class T>
            T scalar(const YAML::Node &n, const std::string &field) const
            {
                if (!n.IsScalar())
                    fail(n, "'" + field + "' must be a scalar.");
                try
                {
                    return n.as<T>();
                }
                catch (const YAML::Exception &)
                {
                    fail(n, "'" + field + "' has an invalid value '" + n.Scalar() + "'.");
                }
            }

            double real(const YAML::Node &n, const std::string &field) const
            {
                const double v = scalar<double>(n, field);
                if (!std::isfinite(v))
                    fail(n, "'" + field + "' must be finite.");
                return v;
            }

            double positive(const YAML::Node &n, const std::string &field) const
            {
                const double v = real(n, field);
                if (!(v > 0.0))
                    fail(n, "'" + field + "' must be positive.");
                return v;
            }

            std::uint64_t unsigned_integer(const YAML::Node &n, const std::string &field) const
            {
                if (!n.IsScalar())
                    fail(n, "'" + field + "' must be a scalar.");
                const std::string &s = n.Scalar();
                if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
                    fail(n, "'" + field + "' must be a nonnegative integer.");
                try
                {
                    return std::stoull(s);
                }
                catch (const std::exception &)
                {
                    fail(n, "'" + field + "' is out of range.");
                }
            }

            bool boolean(const YAML::Node &n, const std::string &field) const { return scalar<bool>(n, field); }

            std::string string(const YAML::Node &n, const std::string &field) const { return scalar<std::string>(n, field); }

            std::vector<double> reals(const YAML::Node &n, const std::string &field) const
            {
                if (!n.IsSequence())
                    fail(n, "'" + field + "' must be a list.");
                std::vector<double> v;
                for (const auto &e : n)
                    v.push_back(real(e, field));
                return v;
            }

        private:
            std::string source_;
        };

        linklevel::QuantizerSpec parse_quantizer(const Reader &rd, const YAML::Node &n, const std::string &default_source)
        {
            linklevel::QuantizerSpec q;
            std::string source = default_source;
            try
            {
                if (n.IsScalar())
                    q.kind = linklevel::quantizer_kind_from_string(n.Scalar());
                else if (n.IsMap())
                {
                    rd.check_keys(n, "simulation.quantizers", {"kind", "bits", "source"});
                    if (!n["kind"])
                        rd.fail(n, "quantizer entry needs a 'kind'.");
                    q.kind = linklevel::quantizer_kind_from_string(rd.string(n["kind"], "kind"));
                    if (n["bits"])
                    {
                        const auto b = rd.unsigned_integer(n["bits"], "bits");
                        if (b < 1 || b > 16)
                            rd.fail(n["bits"], "'bits' must be between 1 and 16.");
                        q.bits = static_cast<unsigned>(b);
                    }
                    if (n["source"])
                    {
                        if (q.kind != linklevel::QuantizerKind::mvcq)
                            rd.fail(n["source"], "'source' only applies to mvcq.");
                        source = rd.string(n["source"], "source");
                    }
                }
                else
                    rd.fail(n, "quantizer must be a name or a mapping.");
                if (q.kind == linklevel::QuantizerKind::mvcq)
                    linklevel::parse_profile_source(source, q);
            }
            catch (const ConfigError &e)
            {
                const std::string msg = e.what();
                if (msg.rfind(rd.where(n), 0) == 0)
                    throw;
                rd.fail(n, msg);
            }
            return q;
        }

        double round_up_window(double width, double dx)
        {
            return std::ceil(width / (2.0 * dx) - 1e-9) * 2.0 * dx;
        }
    }

    // ---------------------------------------------------------------------------------------------

    waveoptics::LensSpec AppConfig::lens() const
    {
        const double D = aperture.value_or(static_cast<double>(antennas) * spacing);
        if (radius_1 && radius_2)
            return waveoptics::LensSpec::from_radii(*radius_1, *radius_2, D, permittivity);
        return waveoptics::LensSpec::make(focal_length, D, permittivity);
    }

    waveoptics::PropagationGrid AppConfig::grid() const
    {
        const double step = dx.value_or(spacing / 2.0);
        const double w = window.value_or(round_up_window(4.0 * lens().aperture, step));
        return waveoptics::PropagationGrid::make(step, dz, w, 1.0, kernel);
    }

    waveoptics::ArraySpec AppConfig::array() const { return waveoptics::ArraySpec::make(antennas, spacing, distance); }

    std::vector<double> AppConfig::aod_sweep() const
    {
        std::vector<double> v;
        const auto n = static_cast<long>(std::floor((aod_stop - aod_start) / aod_step + 1e-9));
        for (long i = 0; i <= n; ++i)
            v.push_back(aod_start + static_cast<double>(i) * aod_step);
        return v;
    }

    std::vector<double> AppConfig::gaussian_fit_angles() const
    {
        if (!gaussian_angles.empty())
            return gaussian_angles;
        std::vector<double> v;
        for (int a = -30; a <= 30; a += 5)
            v.push_back(a);
        return v;
    }

    linklevel::ScenarioConfig AppConfig::scenario(linklevel::PrecoderKind precoder, const linklevel::QuantizerSpec &quantizer,
                                                  bool lens_mode) const
    {
        linklevel::ScenarioConfig s;
        s.num_antennas = antennas;
        s.spacing = spacing;
        s.user_angles_deg = angles;
        s.sigma_deg = sigma_theta;
        s.lens_enabled = lens_mode;
        s.lens = lens();
        s.grid = grid();
        s.lens_distance = distance;
        s.gaussian_fit_angles_deg = gaussian_fit_angles();
        s.precoder = precoder;
        s.quantizer = quantizer;
        s.bits = bits;
        s.snr_db = snr_db;
        s.trials = trials;
        s.seed = seed;
        s.validate();
        return s;
    }

    // ---------------------------------------------------------------------------------------------

    AppConfig parse_config_text(const std::string &text, const std::string &source_name)
    {
        const Reader rd(source_name);
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw ConfigError(source_name + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
        }

        AppConfig c;
        if (root.IsNull())
            return c;
        rd.expect_map(root, "top level");
        rd.check_keys(root, "", {"seed", "trials", "array", "users", "lens", "grid", "simulation", "bpm_field"});

        if (root["seed"])
            c.seed = rd.unsigned_integer(root["seed"], "seed");
        if (root["trials"])
        {
            c.trials = rd.unsigned_integer(root["trials"], "trials");
            if (c.trials == 0)
                rd.fail(root["trials"], "'trials' must be at least 1.");
        }

        if (const auto n = root["array"])
        {
            rd.expect_map(n, "array");
            rd.check_keys(n, "array", {"antennas", "spacing"});
            if (n["antennas"])
            {
                c.antennas = rd.unsigned_integer(n["antennas"], "antennas");
                if (c.antennas == 0)
                    rd.fail(n["antennas"], "'antennas' must be at least 1.");
            }
            if (n["spacing"])
                c.spacing = rd.positive(n["spacing"], "spacing");
        }

        if (const auto n = root["users"])
        {
            rd.expect_map(n, "users");
            rd.check_keys(n, "users", {"count", "angles", "sigma_theta"});
            if (n["angles"])
            {
                c.angles = rd.reals(n["angles"], "angles");
                for (double a : c.angles)
                    if (!(std::abs(a) < 90.0))
                        rd.fail(n["angles"], "user angles must lie in (-90, 90) degrees.");
            }
            if (n["sigma_theta"])
                c.sigma_theta = rd.positive(n["sigma_theta"], "sigma_theta");
            if (n["count"])
            {
                const auto k = rd.unsigned_integer(n["count"], "count");
                if (k != c.angles.size())
                    rd.fail(n["count"], "'count' = " + std::to_string(k) + " but " + std::to_string(c.angles.size()) +
                                            " angles are listed.");
            }
            if (c.angles.size() > c.antennas)
                rd.fail(n, "number of users K = " + std::to_string(c.angles.size()) + " exceeds antennas M = " +
                               std::to_string(c.antennas) + ".");
        }

        if (const auto n = root["lens"])
        {
            rd.expect_map(n, "lens");
            rd.check_keys(n, "lens", {"enabled", "focal_length", "aperture", "permittivity", "distance", "radius_1", "radius_2"});
            if (n["enabled"])
                c.lens_enabled = rd.boolean(n["enabled"], "enabled");
            if (n["focal_length"])
                c.focal_length = rd.positive(n["focal_length"], "focal_length");
            if (n["aperture"])
                c.aperture = rd.positive(n["aperture"], "aperture");
            if (n["permittivity"])
            {
                c.permittivity = rd.real(n["permittivity"], "permittivity");
                if (!(c.permittivity > 1.0))
                    rd.fail(n["permittivity"], "'permittivity' must exceed 1.");
            }
            if (n["distance"])
                c.distance = rd.positive(n["distance"], "distance");
            if (n["radius_1"] || n["radius_2"])
            {
                if (!n["radius_1"] || !n["radius_2"])
                    rd.fail(n, "'radius_1' and 'radius_2' must be given together.");
                if (n["focal_length"])
                    rd.fail(n["focal_length"], "give either 'focal_length' or the surface radii, not both.");
                c.radius_1 = rd.real(n["radius_1"], "radius_1");
                c.radius_2 = rd.real(n["radius_2"], "radius_2");
                try
                {
                    c.focal_length = c.lens().focal_length;
                }
                catch (const ConfigError &e)
                {
                    rd.fail(n, e.what());
                }
            }
        }

        if (const auto n = root["grid"])
        {
            rd.expect_map(n, "grid");
            rd.check_keys(n, "grid", {"dx", "dz", "window", "kernel", "aod_start", "aod_stop", "aod_step", "max_angle_gap"});
            if (n["dx"])
                c.dx = rd.positive(n["dx"], "dx");
            if (n["dz"])
                c.dz = rd.positive(n["dz"], "dz");
            if (n["window"])
                c.window = rd.positive(n["window"], "window");
            if (n["kernel"])
            {
                try
                {
                    c.kernel = waveoptics::fresnel_kernel_from_string(rd.string(n["kernel"], "kernel"));
                }
                catch (const ConfigError &e)
                {
                    rd.fail(n["kernel"], e.what());
                }
            }
            if (n["aod_start"])
                c.aod_start = rd.real(n["aod_start"], "aod_start");
            if (n["aod_stop"])
                c.aod_stop = rd.real(n["aod_stop"], "aod_stop");
            if (n["aod_step"])
                c.aod_step = rd.positive(n["aod_step"], "aod_step");
            if (n["max_angle_gap"])
            {
                c.max_angle_gap = rd.real(n["max_angle_gap"], "max_angle_gap");
                if (c.max_angle_gap < 0.0)
                    rd.fail(n["max_angle_gap"], "'max_angle_gap' must be nonnegative.");
            }
            if (c.aod_stop < c.aod_start)
                rd.fail(n, "'aod_stop' is below 'aod_start'.");
            if (!(std::max(std::abs(c.aod_start), std::abs(c.aod_stop)) < 90.0))
                rd.fail(n, "angle sweep must stay inside (-90, 90) degrees.");
        }

        std::string mvcq_source = "bpm";
        if (const auto n = root["simulation"])
        {
            rd.expect_map(n, "simulation");
            rd.check_keys(n, "simulation",
                          {"precoders", "quantizers", "bits", "mvcq_source", "snr_db", "lens_modes", "gaussian_angles"});
            if (n["bits"])
            {
                const auto b = rd.unsigned_integer(n["bits"], "bits");
                if (b < 1 || b > 16)
                    rd.fail(n["bits"], "'bits' must be between 1 and 16.");
                c.bits = static_cast<unsigned>(b);
            }
            if (n["mvcq_source"])
            {
                mvcq_source = rd.string(n["mvcq_source"], "mvcq_source");
                linklevel::QuantizerSpec probe;
                try
                {
                    linklevel::parse_profile_source(mvcq_source, probe);
                }
                catch (const ConfigError &e)
                {
                    rd.fail(n["mvcq_source"], e.what());
                }
            }
            if (const auto p = n["precoders"])
            {
                if (!p.IsSequence() || p.size() == 0)
                    rd.fail(p, "'precoders' must be a nonempty list.");
                c.precoders.clear();
                for (const auto &e : p)
                {
                    try
                    {
                        c.precoders.push_back(linklevel::precoder_kind_from_string(rd.string(e, "precoders")));
                    }
                    catch (const ConfigError &err)
                    {
                        rd.fail(e, err.what());
                    }
                }
            }
            if (const auto q = n["quantizers"])
            {
                if (!q.IsSequence() || q.size() == 0)
                    rd.fail(q, "'quantizers' must be a nonempty list.");
                for (const auto &e : q)
                    c.quantizers.push_back(parse_quantizer(rd, e, mvcq_source));
            }
            if (n["snr_db"])
            {
                c.snr_db = rd.reals(n["snr_db"], "snr_db");
                if (c.snr_db.empty())
                    rd.fail(n["snr_db"], "'snr_db' must not be empty.");
            }
            if (const auto m = n["lens_modes"])
            {
                if (!m.IsSequence() || m.size() == 0)
                    rd.fail(m, "'lens_modes' must be a nonempty list.");
                c.lens_modes.clear();
                for (const auto &e : m)
                {
                    const std::string s = rd.string(e, "lens_modes");
                    if (s != "lens" && s != "no_lens")
                        rd.fail(e, "lens mode must be 'lens' or 'no_lens'.");
                    c.lens_modes.push_back(s == "lens");
                }
            }
            if (n["gaussian_angles"])
            {
                c.gaussian_angles = rd.reals(n["gaussian_angles"], "gaussian_angles");
                if (c.gaussian_angles.size() < 5)
                    rd.fail(n["gaussian_angles"], "'gaussian_angles' needs at least five angles.");
            }
        }
        if (c.quantizers.empty())
        {
            c.quantizers.push_back(parse_quantizer(rd, YAML::Node("rvq"), mvcq_source));
            c.quantizers.push_back(parse_quantizer(rd, YAML::Node("mvcq"), mvcq_source));
        }

        if (const auto n = root["bpm_field"])
        {
            rd.expect_map(n, "bpm_field");
            rd.check_keys(n, "bpm_field", {"aod", "steps"});
            if (n["aod"])
            {
                c.field_aod = rd.real(n["aod"], "aod");
                if (!(std::abs(c.field_aod) < 90.0))
                    rd.fail(n["aod"], "'aod' must lie in (-90, 90) degrees.");
            }
            if (n["steps"])
                c.field_steps = rd.unsigned_integer(n["steps"], "steps");
        }

        // Cross-section checks that need the resolved geometry
        if (c.lens_enabled || std::find(c.lens_modes.begin(), c.lens_modes.end(), true) != c.lens_modes.end())
        {
            try
            {
                const auto g = c.grid();
                const auto l = c.lens();
                if (l.aperture > g.window)
                    throw ConfigError("lens aperture " + format_double(l.aperture) + " exceeds the grid window " +
                                      format_double(g.window) + ".");
                if (static_cast<double>(c.antennas - 1) * c.spacing > g.window)
                    throw ConfigError("array span exceeds the grid window.");
            }
            catch (const ConfigError &e)
            {
                throw ConfigError(source_name + ": " + e.what());
            }
        }
        if (!c.lens_enabled)
            c.lens_modes.assign(1, false);
        return c;
    }

    AppConfig parse_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw IoError("Cannot read configuration file '" + path + "'.");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_config_text(ss.str(), path);
    }

    // ---------------------------------------------------------------------------------------------

    std::string dump_config(const AppConfig &c)
    {
        const auto lens = c.lens();
        const auto grid = c.grid();
        std::ostringstream os;
        os << "seed: " << c.seed << "\n";
        os << "trials: " << c.trials << "\n";
        os << "array:\n";
        os << "  antennas: " << c.antennas << "\n";
        os << "  spacing: " << format_double(c.spacing) << "\n";
        os << "users:\n";
        os << "  count: " << c.angles.size() << "\n";
        os << "  angles: " << format_list(c.angles) << "\n";
        os << "  sigma_theta: " << format_double(c.sigma_theta) << "\n";
        os << "lens:\n";
        os << "  enabled: " << (c.lens_enabled ? "true" : "false") << "\n";
        if (c.radius_1 && c.radius_2)
        {
            os << "  radius_1: " << format_double(*c.radius_1) << "\n";
            os << "  radius_2: " << format_double(*c.radius_2) << "\n";
        }
        else
            os << "  focal_length: " << format_double(lens.focal_length) << "\n";
        os << "  aperture: " << format_double(lens.aperture) << "\n";
        os << "  permittivity: " << format_double(lens.permittivity) << "\n";
        os << "  distance: " << format_double(c.distance) << "\n";
        os << "grid:\n";
        os << "  dx: " << format_double(grid.dx) << "\n";
        os << "  dz: " << format_double(grid.dz) << "\n";
        os << "  window: " << format_double(grid.window) << "\n";
        os << "  kernel: " << waveoptics::to_string(grid.kernel) << "\n";
        os << "  aod_start: " << format_double(c.aod_start) << "\n";
        os << "  aod_stop: " << format_double(c.aod_stop) << "\n";
        os << "  aod_step: " << format_double(c.aod_step) << "\n";
        os << "  max_angle_gap: " << format_double(c.max_angle_gap) << "\n";
        os << "simulation:\n";
        os << "  precoders: [";
        for (std::size_t i = 0; i < c.precoders.size(); ++i)
            os << (i ? ", " : "") << linklevel::to_string(c.precoders[i]);
        os << "]\n";
        os << "  quantizers:\n";
        for (const auto &q : c.quantizers)
        {
            os << "    - {kind: " << linklevel::to_string(q.kind);
            if (q.bits)
                os << ", bits: " << *q.bits;
            if (q.kind == linklevel::QuantizerKind::mvcq)
                os << ", source: \"" << q.source_label() << "\"";
            os << "}\n";
        }
        os << "  bits: " << c.bits << "\n";
        os << "  snr_db: " << format_list(c.snr_db) << "\n";
        os << "  lens_modes: [";
        for (std::size_t i = 0; i < c.lens_modes.size(); ++i)
            os << (i ? ", " : "") << (c.lens_modes[i] ? "lens" : "no_lens");
        os << "]\n";
        os << "  gaussian_angles: " << format_list(c.gaussian_fit_angles()) << "\n";
        os << "bpm_field:\n";
        os << "  aod: " << format_double(c.field_aod) << "\n";
        os << "  steps: " << c.field_steps << "\n";
        return os.str();
    }
}
