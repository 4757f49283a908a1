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

#ifndef LENSMIMO_COMMANDS_HPP
#define LENSMIMO_COMMANDS_HPP

#include "lensmimo/config.hpp"
#include "lensmimo/io.hpp"
#include "lensmimo/waveoptics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

// Subcommands of the lensmimo tool. Each takes the run manifest, writes its files
// and reports progress on `log`.

namespace lensmimo::app
{
    struct RunManifest
    {
        std::string config_path;
        std::filesystem::path cache_dir = "lensmimo-cache";
        std::filesystem::path out_dir = ".";
        std::optional<std::uint64_t> seed;
        std::size_t threads = 0; // 0: hardware concurrency
        bool no_build = false;   // fail instead of building a missing power-profile table
        bool regenerate = false; // rebuild caches even if present
    };

    // Parses the configuration and applies the seed override.
    config::AppConfig load_config(const RunManifest &manifest);

    std::size_t effective_threads(const RunManifest &manifest);

    std::filesystem::path profile_table_path(const RunManifest &manifest, const config::AppConfig &cfg);

    // Loads the cached table for cfg, or builds and stores it. With no_build a missing
    // table is an IoError that points at the lens-profile command.
    io::ProfileTable obtain_profile_table(const RunManifest &manifest, const config::AppConfig &cfg, std::ostream &log);

    // Always rebuilds; returns the table path.
    std::filesystem::path cmd_lens_profile(const RunManifest &manifest, std::ostream &log);

    struct FieldReport
    {
        std::filesystem::path matrix_path;
        std::filesystem::path summary_path;
        std::optional<waveoptics::FocalPeak> peak; // empty if the maximum sits on the last plane
        double max_drift = 0.0;
        double guard_band = 0.0;
    };

    FieldReport cmd_bpm_field(const RunManifest &manifest, std::ostream &log);

    // One CSV per (lens mode, precoder, quantizer) plus comparison.csv; returns all paths.
    std::vector<std::filesystem::path> cmd_simulate(const RunManifest &manifest, std::ostream &log);

    std::filesystem::path cmd_fit_gaussian(const RunManifest &manifest, std::ostream &log);

    // 0 success, 1 unexpected, 2 configuration, 3 numerical, 4 I/O
    int exit_code_for(const std::exception &e);
}

#endif
