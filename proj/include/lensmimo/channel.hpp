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

#ifndef LENSMIMO_CHANNEL_HPP
#define LENSMIMO_CHANNEL_HPP

#include "lensmimo/random.hpp"
#include "lensmimo/types.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

// Spatially correlated downlink channels for a uniform linear array, with a
// Laplacian power angular spectrum around each user's departure angle, and the
// per-antenna power modulation introduced by a lens in front of the array.

namespace lensmimo::channel
{
    struct UserConfig
    {
        double angle_deg = 0.0;
        double sigma_deg = 5.0; // angular spread
    };

    struct CorrelationMatrix
    {
        Eigen::MatrixXcd entries;
        double angle_deg = 0.0;
        double sigma_deg = 0.0;
        double spacing = 0.0;
    };

    // K x M, row k is the (possibly lens-modulated) channel of user k
    struct ChannelMatrix
    {
        Eigen::MatrixXcd rows;
        bool lens_applied = false;
    };

    // Normalizer of the Laplacian density truncated to [-pi, pi): 1 / (1 - exp(-sqrt(2) pi / sigma))
    double laplacian_beta(double sigma_rad);

    // P(theta) = beta / (sqrt(2) sigma) * exp(-|sqrt(2) theta / sigma|) on [-pi, pi), 0 elsewhere
    double laplacian_pas(double offset_rad, double sigma_rad);

    // Closed-form small-spread correlation
    //   R_ij ~ exp(j kappa d (i-j) sin theta) / (1 + sigma^2 / 2 * [kappa d (i-j) cos theta]^2)
    // made Hermitian, projected onto the PSD cone and rescaled to unit diagonal.
    CorrelationMatrix correlation_matrix(const UserConfig &user, std::size_t num_antennas, double spacing,
                                         double wavelength = 1.0);

    // Hermitian square root via eigendecomposition, negative eigenvalues clamped to 0.
    // Throws DomainError if R deviates from Hermitian by more than 1e-10 (relative).
    Eigen::MatrixXcd matrix_sqrt(const Eigen::MatrixXcd &R);

    // h = S h_iid, h_iid ~ CN(0, I)
    Eigen::VectorXcd draw_channel(const Eigen::MatrixXcd &S, RandomStream &rng);

    // h~_m = sqrt(a_m) h_m
    Eigen::VectorXcd apply_lens(const Eigen::VectorXcd &h, const PowerProfile &a);

    // Psi_jk = sqrt(a_j)^T sqrt(a_k) / M
    Eigen::MatrixXd power_correlation_matrix(const std::vector<PowerProfile> &profiles);
}

#endif
