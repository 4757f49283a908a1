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

#include "lensmimo/commands.hpp"
#include "lensmimo/errors.hpp"
#include "lensmimo/feedback.hpp"
#include "lensmimo/format.hpp"
#include "lensmimo/linklevel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <thread>

namespace lensmimo::app
{
    namespace fs = std::filesystem;

    config::AppConfig load_config(const RunManifest &manifest)
    {
        if (manifest.config_path.empty())
            throw ConfigError("No configuration file given (use --config).");
        config::AppConfig cfg = config::parse_config(manifest.config_path);
        if (manifest.seed)
            cfg.seed = *manifest.seed;
        return cfg;
    }

    std::size_t effective_threads(const RunManifest &manifest)
    {
        return manifest.threads != 0 ? manifest.threads : std::max(1u, std::thread::hardware_concurrency());
    }

    fs::path profile_table_path(const RunManifest &manifest, const config::AppConfig &cfg)
    {
        const auto params = io::profile_table_params(cfg.lens(), cfg.grid(), cfg.array(), cfg.aod_sweep());
        return manifest.cache_dir / ("profiles_" + params.back().second + ".csv");
    }

    io::ProfileTable obtain_profile_table(const RunManifest &manifest, const config::AppConfig &cfg, std::ostream &log)
    {
        const fs::path path = profile_table_path(manifest, cfg);
        const auto expected = io::profile_table_params(cfg.lens(), cfg.grid(), cfg.array(), cfg.aod_sweep());

        if (!manifest.regenerate && fs::exists(path))
        {
            io::ProfileTable t = io::read_profile_table(path);
            if (t.params == expected && t.num_antennas() == cfg.antennas)
            {
                log << "using cached power profiles " << path.string() << "\n";
                return t;
            }
            if (manifest.no_build)
                throw IoError("Cached power-profile table '" + path.string() +
                              "' does not match the configuration; rerun 'lens-profile' with this configuration.");
            log << "cached power profiles are stale, rebuilding\n";
        }
        else if (manifest.no_build)
            throw IoError("Power-profile table '" + path.string() +
                          "' is missing and --no-build is set; run 'lens-profile' with this configuration first.");

        io::ProfileTable t = io::build_profile_table(cfg.lens(), cfg.grid(), cfg.array(), cfg.aod_sweep(), effective_threads(manifest));
        io::write_profile_table(path, t);
        log << "wrote power profiles " << path.string() << "\n";
        return t;
    }

    fs::path cmd_lens_profile(const RunManifest &manifest, std::ostream &log)
    {
        const config::AppConfig cfg = load_config(manifest);
        const fs::path path = profile_table_path(manifest, cfg);
        const io::ProfileTable t =
            io::build_profile_table(cfg.lens(), cfg.grid(), cfg.array(), cfg.aod_sweep(), effective_threads(manifest));
        io::write_profile_table(path, t);
        log << "wrote " << t.rows.size() << " power profiles to " << path.string() << "\n";
        return path;
    }

    // ---------------------------------------------------------------------------------------------

    FieldReport cmd_bpm_field(const RunManifest &manifest, std::ostream &log)
    {
        const config::AppConfig cfg = load_config(manifest);
        const auto lens = cfg.lens();
        const auto grid = cfg.grid();
        const auto u0 = waveoptics::lens_phase_profile(lens, grid, deg_to_rad(cfg.field_aod));
        const auto history = waveoptics::propagate(u0, cfg.field_steps);

        FieldReport report;
        report.max_drift = history.max_drift();
        for (Eigen::Index n = 0; n < history.columns.cols(); ++n)
        {
            waveoptics::ComplexField u;
            u.samples = history.columns.col(n);
            report.guard_band = std::max(report.guard_band, waveoptics::guard_band_fraction(u));
        }

        std::string status = "ok";
        try
        {
            report.peak = waveoptics::find_focal_peak(history, lens.aperture);
        }
        catch (const RangeTooShortError &e)
        {
            status = "range_too_short";
            log << "warning: " << e.what() << "\n";
        }
        if (report.guard_band > waveoptics::guard_band_limit)
            log << "warning: " << format_double(report.guard_band)
                << " of the power reaches the outer 10% of the window; enlarge the window\n";

        // Intensities relative to the mean in-aperture intensity at the lens plane
        double reference = 0.0;
        std::size_t inside = 0;
        for (std::size_t i = 0; i < grid.ns; ++i)
            if (std::abs(grid.x(i)) <= lens.aperture / 2.0 * (1.0 + 1e-9))
            {
                reference += std::norm(u0.samples[static_cast<Eigen::Index>(i)]);
                ++inside;
            }
        reference /= static_cast<double>(inside);
        const Eigen::MatrixXd I = history.intensity() / reference;

        const std::string dump = config::dump_config(cfg);
        std::string m = "# lensmimo field intensity relative to the lens-plane aperture mean\n";
        m += "# rows: " + std::to_string(I.rows()) + "\n";
        m += "# columns: " + std::to_string(I.cols()) + "\n";
        m += "# --- configuration ---\n" + io::comment_block(dump) + "# ---\n";
        m += "x";
        for (Eigen::Index n = 0; n < I.cols(); ++n)
            m += ",z=" + format_double(static_cast<double>(n) * history.step);
        m += "\n";
        for (Eigen::Index i = 0; i < I.rows(); ++i)
        {
            m += format_double(grid.x(static_cast<std::size_t>(i)));
            for (Eigen::Index n = 0; n < I.cols(); ++n)
                m += "," + format_double(I(i, n));
            m += "\n";
        }
        report.matrix_path = manifest.out_dir / "bpm_field.csv";
        io::write_file(report.matrix_path, m);

        std::string s = "# lensmimo focal peak report\n";
        s += "# --- configuration ---\n" + io::comment_block(dump) + "# ---\n";
        s += "status: " + status + "\n";
        if (report.peak)
        {
            s += "peak_distance: " + format_double(report.peak->distance) + "\n";
            s += "intensity_gain: " + format_double(report.peak->intensity_gain) + "\n";
            s += "peak_x: " + format_double(grid.x(report.peak->sample)) + "\n";
        }
        s += "max_step_drift: " + format_double(report.max_drift) + "\n";
        s += "guard_band_fraction: " + format_double(report.guard_band) + "\n";
        report.summary_path = manifest.out_dir / "bpm_peak.txt";
        io::write_file(report.summary_path, s);

        if (report.peak)
            log << "peak at z = " << format_double(report.peak->distance) << ", intensity gain "
                << format_double(report.peak->intensity_gain) << "\n";
        log << "wrote " << report.matrix_path.string() << " and " << report.summary_path.string() << "\n";
        return report;
    }

    // ---------------------------------------------------------------------------------------------

    namespace
    {
        std::vector<PowerProfile> table_profiles(const io::ProfileTable &table, const std::vector<double> &angles, double gap)
        {
            std::vector<PowerProfile> out;
            for (double a : angles)
            {
                PowerProfile p = table.nearest(a, gap);
                p.angle_deg = a;
                out.push_back(std::move(p));
            }
            return out;
        }
    }

    std::vector<fs::path> cmd_simulate(const RunManifest &manifest, std::ostream &log)
    {
        const config::AppConfig cfg = load_config(manifest);
        if (cfg.angles.empty())
            throw ConfigError(manifest.config_path + ": 'users.angles' is required for simulate.");

        const bool any_lens = std::find(cfg.lens_modes.begin(), cfg.lens_modes.end(), true) != cfg.lens_modes.end();
        std::shared_ptr<const io::ProfileTable> table;
        if (any_lens)
            table = std::make_shared<const io::ProfileTable>(obtain_profile_table(manifest, cfg, log));

        const double gap = cfg.max_angle_gap;
        const linklevel::ProfileProvider channel_provider = [table, gap](double angle) { return table->nearest(angle, gap); };

        std::shared_ptr<const feedback::GaussianModel> gaussian;
        const std::string dump = config::dump_config(cfg);
        std::vector<std::pair<std::string, linklevel::SimResult>> results;
        std::vector<fs::path> written;
        std::set<std::string> labels;

        for (bool lens_mode : cfg.lens_modes)
            for (auto precoder : cfg.precoders)
                for (const auto &quantizer : cfg.quantizers)
                {
                    linklevel::ScenarioConfig sc = cfg.scenario(precoder, quantizer, lens_mode);
                    sc.threads = effective_threads(manifest);

                    const std::string label = std::string(lens_mode ? "lens" : "no_lens") + "_" + linklevel::to_string(precoder) +
                                              "_" + quantizer.label(cfg.bits);
                    if (!labels.insert(label).second)
                        throw ConfigError("Combination '" + label + "' is requested twice.");

                    linklevel::ProfileProvider codebook_provider = channel_provider;
                    if (lens_mode && quantizer.kind == linklevel::QuantizerKind::mvcq)
                    {
                        if (quantizer.source == linklevel::ProfileSource::sub_bpm)
                            codebook_provider = linklevel::codebook_profile_provider(sc);
                        else if (quantizer.source == linklevel::ProfileSource::gaussian)
                        {
                            if (!gaussian)
                                gaussian = std::make_shared<const feedback::GaussianModel>(feedback::fit_gaussian_model(
                                    table_profiles(*table, cfg.gaussian_fit_angles(), gap), cfg.array()));
                            codebook_provider = [gaussian](double angle) { return feedback::gaussian_profile(angle, *gaussian); };
                        }
                    }

                    linklevel::ScenarioInputs inputs = linklevel::prepare_inputs(sc, channel_provider, codebook_provider);
                    for (std::size_t k = 0; k < inputs.codebooks.size(); ++k)
                    {
                        const std::string key = io::codebook_key(sc, k);
                        const fs::path path = manifest.cache_dir / "codebooks" / ("codebook_" + to_hex(fnv1a64(key)) + ".txt");
                        feedback::Codebook cached;
                        if (!manifest.regenerate && fs::exists(path) && io::parse_codebook(io::read_file(path), key, cached))
                            inputs.codebooks[k] = std::move(cached);
                        else
                            io::write_file(path, io::format_codebook(key, inputs.codebooks[k]));
                    }

                    log << "simulating " << label << " (" << sc.trials << " trials x " << sc.snr_db.size() << " SNR points)\n";
                    linklevel::SimResult r = linklevel::run_monte_carlo(sc, inputs);

                    const fs::path path = manifest.out_dir / ("sim_" + label + ".csv");
                    io::write_file(path, io::format_sim_csv(dump, label, r));
                    written.push_back(path);
                    results.emplace_back(label, std::move(r));
                }

        const fs::path comparison = manifest.out_dir / "comparison.csv";
        io::write_file(comparison, io::format_comparison(dump, results));
        written.push_back(comparison);
        log << "wrote " << written.size() << " files to " << manifest.out_dir.string() << "\n";
        return written;
    }

    fs::path cmd_fit_gaussian(const RunManifest &manifest, std::ostream &log)
    {
        const config::AppConfig cfg = load_config(manifest);
        const io::ProfileTable table = obtain_profile_table(manifest, cfg, log);
        const auto model =
            feedback::fit_gaussian_model(table_profiles(table, cfg.gaussian_fit_angles(), cfg.max_angle_gap), cfg.array());

        std::string s = "# lensmimo 1-Gaussian power-profile fit (q and r in wavelengths from the array center)\n";
        s += "# --- configuration ---\n" + io::comment_block(config::dump_config(cfg)) + "# ---\n";
        s += "angle_deg,p,q,r,relative_residual,poor_fit\n";
        for (const auto &f : model.samples())
        {
            s += format_double(f.angle_deg) + "," + format_double(f.params.p) + "," + format_double(f.params.q) + "," +
                 format_double(f.params.r) + "," + format_double(f.relative_residual) + "," + (f.poor_fit ? "1" : "0") + "\n";
            if (f.poor_fit)
                log << "warning: poor Gaussian fit at " << format_double(f.angle_deg) << " deg (RMS residual "
                    << format_double(f.relative_residual) << " of peak)\n";
        }
        const fs::path path = manifest.out_dir / "gaussian_fit.csv";
        io::write_file(path, s);
        log << "wrote " << path.string() << "\n";
        return path;
    }

    int exit_code_for(const std::exception &e)
    {
        if (dynamic_cast<const ConfigError *>(&e) != nullptr)
            return 2;
        if (dynamic_cast<const NumericalError *>(&e) != nullptr)
            return 3;
        if (dynamic_cast<const IoError *>(&e) != nullptr)
            return 4;
        return 1;
    }
}
