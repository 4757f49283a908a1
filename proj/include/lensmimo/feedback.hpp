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

#ifndef LENSMIMO_FEEDBACK_HPP
#define LENSMIMO_FEEDBACK_HPP

#include "lensmimo/random.hpp"
#include "lensmimo/types.hpp"
#include "lensmimo/waveoptics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

// Limited-feedback quantization of channel direction: isotropic random codebooks,
// codebooks shaped by the transmit correlation, and multi-variance codebooks that
// additionally carry the lens power profile of the user. Also hosts the cheap
// power-profile estimators (Gaussian fit, coarse-step propagation).

namespace lensmimo::feedback
{
    enum class CodebookKind
    {
        rvq,
        rvq_correlated,
        mvcq
    };

    std::string to_string(CodebookKind kind);
    CodebookKind codebook_kind_from_string(const std::string &name);

    struct Codebook
    {
        Eigen::MatrixXcd vectors; // M x 2^B, unit-norm columns
        unsigned bits = 0;
        CodebookKind kind = CodebookKind::rvq;
        std::optional<double> user_angle_deg;

        std::size_t size() const { return static_cast<std::size_t>(vectors.cols()); }
        std::size_t dimension() const { return static_cast<std::size_t>(vectors.rows()); }
    };

    struct QuantizationResult
    {
        std::size_t index = 0; // zero-based column of the codebook
        Eigen::VectorXcd direction;
        double correlation = 0.0; // |h^H c_index|
    };

    // 2^B i.i.d. CN(0, I) columns scaled to unit norm. B in [1, 16].
    Codebook generate_rvq(std::size_t num_antennas, unsigned bits, RandomStream &rng);

    // Columns of (W^T factor)^T, renormalized. With factor = S^T (S the Hermitian
    // channel correlation factor, h = S h_iid) the codewords become S w_j and share
    // the second-order statistics of the channel.
    Codebook correlate_codebook(const Codebook &W, const Eigen::MatrixXcd &factor);

    // Columns sqrt(a) o w'_j, renormalized; tagged with the profile angle.
    Codebook generate_mvcq(const Codebook &W_corr, const PowerProfile &a);

    // argmax_j |h^H c_j|, ties to the lowest index. Throws DegenerateError for h = 0.
    QuantizationResult quantize(const Eigen::VectorXcd &h, const Codebook &C);

    // ---- Gaussian power-profile model ----

    struct GaussianParams
    {
        double p = 0.0; // amplitude
        double q = 0.0; // center, wavelengths from the array center
        double r = 0.0; // width, wavelengths
    };

    struct GaussianFitSample
    {
        double angle_deg = 0.0;
        GaussianParams params;
        double relative_residual = 0.0; // RMS residual over peak value
        bool poor_fit = false;          // relative_residual > 0.2
    };

    // Antenna coordinates y_m = (m - (M - 1) / 2) d in wavelengths.
    Eigen::VectorXd antenna_coordinates(const waveoptics::ArraySpec &array);

    // a(y) = p exp(-((y - q) / r)^2) sampled at the antenna coordinates (not renormalized)
    Eigen::VectorXd gaussian_samples(const GaussianParams &params, const Eigen::VectorXd &y);

    // Least-squares fit of one profile (Levenberg-Marquardt).
    GaussianFitSample fit_gaussian(const PowerProfile &profile, const waveoptics::ArraySpec &array);

    // Per-angle parameter samples interpolated across angle (modified Akima).
    class GaussianModel
    {
    public:
        GaussianModel(std::vector<GaussianFitSample> samples, waveoptics::ArraySpec array);

        GaussianParams evaluate(double angle_deg) const;
        const std::vector<GaussianFitSample> &samples() const { return samples_; }
        const waveoptics::ArraySpec &array() const { return array_; }
        bool any_poor_fit() const;
        double min_angle() const { return samples_.front().angle_deg; }
        double max_angle() const { return samples_.back().angle_deg; }

    private:
        struct Curves;
        std::vector<GaussianFitSample> samples_;
        waveoptics::ArraySpec array_;
        std::shared_ptr<const Curves> curves_;
    };

    // Needs at least five profiles at distinct angles.
    GaussianModel fit_gaussian_model(const std::vector<PowerProfile> &profiles, const waveoptics::ArraySpec &array);

    // Model evaluated at the antenna coordinates and renormalized to sum M. Angles
    // outside the fitted range are a ConfigError.
    PowerProfile gaussian_profile(double angle_deg, const GaussianModel &model);

    // ---- coarse-step propagation ----

    // Distance actually reached with step stride * dz: the last plane at or before ell.
    double sub_bpm_distance(const waveoptics::PropagationGrid &grid, const waveoptics::ArraySpec &array, unsigned stride);

    PowerProfile sub_bpm_profile(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                 const waveoptics::ArraySpec &array, unsigned stride, double aod_deg);

    // ---- SINR approximation through the power correlation matrix ----

    // SINR_k ~ (P/K) Psi_kk |h_k^T f_k/|f_k||^2 / ((P/K) sum_{j!=k} Psi_kj |h_k^T f_j/|f_j||^2 + 1)
    // H is K x M (rows h_k without lens modulation), F is M x K.
    Eigen::VectorXd approx_sinr(const Eigen::MatrixXd &psi, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &F,
                                double transmit_power);
}

#endif
