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

#ifndef LENSMIMO_CONFIG_HPP
#define LENSMIMO_CONFIG_HPP

#include "lensmimo/linklevel.hpp"
#include "lensmimo/waveoptics.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

// Scenario files: YAML with one section per module. Every key is optional except
// users.angles; unknown keys are rejected. Lengths in wavelengths, angles in degrees.
//
//   seed: 1
//   trials: 1000
//   array:      { antennas: 64, spacing: 0.5 }
//   users:      { count: 4, angles: [-12, -7, 10, 0], sigma_theta: 5 }
//   lens:       { enabled: true, focal_length: 40, aperture: 32, permittivity: 2.4, distance: 25 }
//   grid:       { dx: 0.25, dz: 1, window: 128, kernel: transfer_function,
//                 aod_start: -30, aod_stop: 30, aod_step: 0.5, max_angle_gap: 0.5 }
//   simulation: { precoders: [zf, mrt], quantizers: [rvq, mvcq], bits: 6,
//                 mvcq_source: bpm, snr_db: [0, 5, 10, 15, 20], lens_modes: [lens],
//                 gaussian_angles: [-30, -25, ..., 30] }
//   bpm_field:  { aod: 0, steps: 80 }
//
// A quantizer entry is either a name (full_csi, rvq, rvq_correlated, mvcq) or a map
// { kind: mvcq, bits: 2, source: sub_bpm:10 }.

namespace lensmimo::config
{
    struct AppConfig
    {
        std::uint64_t seed = 1;
        std::size_t trials = 1000;

        std::size_t antennas = 64;
        double spacing = 0.5;

        std::vector<double> angles;
        double sigma_theta = 5.0;

        bool lens_enabled = true;
        double focal_length = 40.0;
        std::optional<double> aperture; // default antennas * spacing
        double permittivity = 2.4;
        double distance = 25.0;
        std::optional<double> radius_1;
        std::optional<double> radius_2;

        std::optional<double> dx;     // default spacing / 2
        double dz = 1.0;
        std::optional<double> window; // default 4 * aperture
        waveoptics::FresnelKernel kernel = waveoptics::FresnelKernel::transfer_function;
        double aod_start = -30.0;
        double aod_stop = 30.0;
        double aod_step = 0.5;
        double max_angle_gap = 0.5;

        std::vector<linklevel::PrecoderKind> precoders{linklevel::PrecoderKind::zf, linklevel::PrecoderKind::mrt};
        std::vector<linklevel::QuantizerSpec> quantizers;
        unsigned bits = 6;
        std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
        std::vector<bool> lens_modes{true};
        std::vector<double> gaussian_angles;

        double field_aod = 0.0;
        std::size_t field_steps = 80;

        waveoptics::LensSpec lens() const;
        waveoptics::PropagationGrid grid() const;
        waveoptics::ArraySpec array() const;
        std::vector<double> aod_sweep() const;
        std::vector<double> gaussian_fit_angles() const;

        linklevel::ScenarioConfig scenario(linklevel::PrecoderKind precoder, const linklevel::QuantizerSpec &quantizer,
                                           bool lens_mode) const;
    };

    // Throws IoError if the file cannot be read, ConfigError (with line numbers) on schema violations.
    AppConfig parse_config(const std::string &path);
    AppConfig parse_config_text(const std::string &text, const std::string &source_name = "<config>");

    // Effective configuration after defaults, as YAML that parse_config_text accepts.
    std::string dump_config(const AppConfig &cfg);
}

#endif
