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

#ifndef LENSMIMO_LINKLEVEL_HPP
#define LENSMIMO_LINKLEVEL_HPP

#include "lensmimo/feedback.hpp"
#include "lensmimo/types.hpp"
#include "lensmimo/waveoptics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

// Multi-user downlink with the transposed signal model y_k = h~_k^T sum_j g_j s_j + n_k,
// unit noise variance, precoders built from fed-back channel directions, and Monte
// Carlo estimation of the ergodic sum rate.

namespace lensmimo::linklevel
{
    enum class PrecoderKind
    {
        zf,
        mrt
    };

    enum class QuantizerKind
    {
        full_csi,
        rvq,
        rvq_correlated,
        mvcq
    };

    // Where an MVCQ codebook gets its power profile from
    enum class ProfileSource
    {
        bpm,
        gaussian,
        sub_bpm
    };

    std::string to_string(PrecoderKind kind);
    std::string to_string(QuantizerKind kind);
    PrecoderKind precoder_kind_from_string(const std::string &name);
    QuantizerKind quantizer_kind_from_string(const std::string &name);

    struct QuantizerSpec
    {
        QuantizerKind kind = QuantizerKind::mvcq;
        std::optional<unsigned> bits; // overrides ScenarioConfig::bits
        ProfileSource source = ProfileSource::bpm;
        unsigned stride = 1; // sub_bpm only

        // e.g. "full_csi", "rvq-6b", "mvcq-2b-sub_bpm10"
        std::string label(unsigned default_bits) const;
        std::string source_label() const; // "bpm", "gaussian", "sub_bpm:10"
    };

    // Parses "bpm", "gaussian" or "sub_bpm:<stride>" into spec.source / spec.stride
    void parse_profile_source(const std::string &text, QuantizerSpec &spec);

    struct ScenarioConfig
    {
        std::size_t num_antennas = 64;
        double spacing = 0.5;
        std::vector<double> user_angles_deg;
        double sigma_deg = 5.0;

        bool lens_enabled = true;
        waveoptics::LensSpec lens = waveoptics::LensSpec::make(40.0, 32.0, 2.4);
        waveoptics::PropagationGrid grid = waveoptics::PropagationGrid::make(0.25, 1.0, 128.0);
        double lens_distance = 25.0;
        std::vector<double> gaussian_fit_angles_deg; // empty: -30:5:30

        PrecoderKind precoder = PrecoderKind::zf;
        QuantizerSpec quantizer;
        unsigned bits = 6;
        std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0, 20.0};
        std::size_t trials = 1000;
        std::uint64_t seed = 1;
        std::size_t threads = 0; // 0: hardware concurrency

        std::size_t num_users() const { return user_angles_deg.size(); }
        unsigned effective_bits() const { return quantizer.bits.value_or(bits); }
        waveoptics::ArraySpec array() const;

        // K >= 1, K <= M, trials >= 1, nonempty SNR grid, angles within (-90, 90)
        void validate() const;
    };

    struct Precoder
    {
        Eigen::MatrixXcd columns;    // F, M x K
        Eigen::MatrixXcd normalized; // G, g_k = f_k / (sqrt(K) |f_k|)
    };

    Precoder normalize_precoder(Eigen::MatrixXcd F);

    // Right pseudo-inverse of the K x M estimate: H_hat F = I_K. Throws
    // IllConditionedError (naming the most collinear user pair) beyond condition 1e12.
    Precoder zf_precoder(const Eigen::MatrixXcd &H_hat);

    // f_k = conj(h_hat_k). Throws DegenerateError on a zero row.
    Precoder mrt_precoder(const Eigen::MatrixXcd &H_hat);

    Precoder make_precoder(PrecoderKind kind, const Eigen::MatrixXcd &H_hat);

    // SINR_k = P |h_k^T g_k|^2 / (sum_{j != k} P |h_k^T g_j|^2 + 1)
    Eigen::VectorXd received_sinr(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &G, double transmit_power);

    double sum_rate(const Eigen::VectorXd &sinr);

    // Everything the trial loop needs that does not depend on the trial
    struct ScenarioInputs
    {
        std::vector<Eigen::MatrixXcd> correlation_factors; // S_k, Hermitian, h_k = S_k h_iid
        std::vector<PowerProfile> channel_profiles;        // a(theta_k) of the true channel
        std::vector<feedback::Codebook> codebooks;         // empty for full CSI
    };

    using ProfileProvider = std::function<PowerProfile(double angle_deg)>;

    // Power profile generator for the true lens channel (full-resolution BPM).
    ProfileProvider bpm_profile_provider(const ScenarioConfig &cfg);

    // Power profile generator used to build MVCQ codebooks, following cfg.quantizer.source.
    ProfileProvider codebook_profile_provider(const ScenarioConfig &cfg);

    // Isotropic base codebook of user k; shared by all quantizer kinds so that
    // different quantizers see paired random draws.
    feedback::Codebook base_codebook(const ScenarioConfig &cfg, std::size_t user);

    feedback::Codebook build_codebook(const ScenarioConfig &cfg, std::size_t user, const Eigen::MatrixXcd &factor,
                                      const PowerProfile &codebook_profile);

    // Profiles are taken from the providers when the lens is enabled and flat otherwise.
    ScenarioInputs prepare_inputs(const ScenarioConfig &cfg, const ProfileProvider &channel_profile,
                                  const ProfileProvider &codebook_profile);
    ScenarioInputs prepare_inputs(const ScenarioConfig &cfg);

    struct SnrPoint
    {
        double snr_db = 0.0;
        double mean_sum_rate = 0.0;
        double stderr_sum_rate = 0.0;
        std::size_t trials = 0;
    };

    struct SimResult
    {
        std::vector<SnrPoint> points;
    };

    // Channel of each (snr index, trial index) pair is drawn from its own substream
    // and per-trial rates are summed in trial order, so the result does not depend
    // on the number of threads.
    SimResult run_monte_carlo(const ScenarioConfig &cfg, const ScenarioInputs &inputs);
    SimResult run_monte_carlo(const ScenarioConfig &cfg);

    // Substream seed tags
    inline constexpr std::uint64_t channel_stream_tag = 0x43484E4CULL;  // channels
    inline constexpr std::uint64_t codebook_stream_tag = 0x43444243ULL; // codebooks
}

#endif
