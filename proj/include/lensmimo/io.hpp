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

#ifndef LENSMIMO_IO_HPP
#define LENSMIMO_IO_HPP

#include "lensmimo/feedback.hpp"
#include "lensmimo/linklevel.hpp"
#include "lensmimo/types.hpp"
#include "lensmimo/waveoptics.hpp"

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

// Plain-text files written by the command-line tool. Every file starts with a block
// of '#' lines describing the parameters it was produced with; numbers are written
// in shortest round-trip form so that a reread reproduces them bit for bit.

namespace lensmimo::io
{
    using Params = std::vector<std::pair<std::string, std::string>>;

    // Throws IoError on failure. Parent directories are created.
    void write_file(const std::filesystem::path &path, const std::string &content);
    std::string read_file(const std::filesystem::path &path);

    // Prefixes every line with "# "
    std::string comment_block(const std::string &text);

    // Configuration block embedded between the "# --- configuration ---" and "# ---"
    // marker lines, with the "# " prefixes removed. Empty if there is none.
    std::string embedded_config(const std::string &text);

    // ---- power-profile table ----

    struct ProfileTable
    {
        Params params; // ends with ("hash", ...)
        std::vector<PowerProfile> rows;

        std::string hash() const;
        std::size_t num_antennas() const { return rows.empty() ? 0 : rows.front().size(); }

        // Row whose angle is closest to angle_deg (ties to the smaller angle). Throws
        // ConfigError if the gap exceeds max_gap_deg.
        const PowerProfile &nearest(double angle_deg, double max_gap_deg) const;
    };

    Params profile_table_params(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                const waveoptics::ArraySpec &array, const std::vector<double> &angles);

    // One BPM run per angle, distributed over up to `threads` workers
    ProfileTable build_profile_table(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                     const waveoptics::ArraySpec &array, const std::vector<double> &angles,
                                     std::size_t threads = 1);

    std::string format_profile_table(const ProfileTable &table);
    ProfileTable parse_profile_table(const std::string &text, const std::string &source_name = "<table>");
    void write_profile_table(const std::filesystem::path &path, const ProfileTable &table);
    ProfileTable read_profile_table(const std::filesystem::path &path);

    // ---- codebooks ----

    // Identifies everything a codebook depends on: M, B, seed, kind, user angle,
    // profile source, spread and lens geometry.
    std::string codebook_key(const linklevel::ScenarioConfig &cfg, std::size_t user);

    std::string format_codebook(const std::string &key, const feedback::Codebook &codebook);
    // Returns false (and leaves codebook untouched) if the stored key differs.
    bool parse_codebook(const std::string &text, const std::string &key, feedback::Codebook &codebook);

    // ---- simulation results ----

    std::string format_sim_csv(const std::string &config_dump, const std::string &combination,
                               const linklevel::SimResult &result);

    // One row per SNR point, a mean and stderr column per combination
    std::string format_comparison(const std::string &config_dump,
                                  const std::vector<std::pair<std::string, linklevel::SimResult>> &results);
}

#endif
