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

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using namespace lensmimo;

    CLI::App app{"lensmimo: RF lens-embedded massive MIMO downlink simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    app::RunManifest manifest;
    std::string cache_dir = manifest.cache_dir.string();
    std::string out_dir = manifest.out_dir.string();
    std::uint64_t seed = 0;

    app.add_option("-c,--config", manifest.config_path, "Scenario file (YAML)")->required();
    auto *seed_opt = app.add_option("--seed", seed, "Override the configured seed");
    app.add_option("--out-dir", out_dir, "Directory for result files")->capture_default_str();
    app.add_option("--cache-dir", cache_dir, "Directory for power-profile and codebook caches")->capture_default_str();
    app.add_option("--threads", manifest.threads, "Worker threads (0: all available)")->capture_default_str();
    app.add_flag("--no-build", manifest.no_build, "Fail if the power-profile cache is missing instead of building it");
    app.add_flag("--regenerate", manifest.regenerate, "Rebuild power-profile and codebook caches");

    auto *lens_profile = app.add_subcommand("lens-profile", "Build the power-profile table over the angle sweep");
    auto *bpm_field = app.add_subcommand("bpm-field", "Dump the propagated intensity field and the focal peak");
    auto *simulate = app.add_subcommand("simulate", "Run the sum-rate Monte Carlo for every configured combination");
    auto *fit_gaussian = app.add_subcommand("fit-gaussian", "Fit the 1-Gaussian power-profile model across angles");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*seed_opt)
        manifest.seed = seed;
    manifest.cache_dir = cache_dir;
    manifest.out_dir = out_dir;

    try
    {
        if (*lens_profile)
            app::cmd_lens_profile(manifest, std::cerr);
        else if (*bpm_field)
            app::cmd_bpm_field(manifest, std::cerr);
        else if (*simulate)
            app::cmd_simulate(manifest, std::cerr);
        else if (*fit_gaussian)
            app::cmd_fit_gaussian(manifest, std::cerr);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return app::exit_code_for(e);
    }
    return 0;
}
