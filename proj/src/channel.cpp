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

#include "lensmimo/channel.hpp"
#include "lensmimo/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lensmimo::channel
{
    double laplacian_beta(double sigma_rad)
    {
        if (!(sigma_rad > 0.0))
            throw DomainError("Angular spread must be positive.");
        return 1.0 / (1.0 - std::exp(-std::sqrt(2.0) * pi / sigma_rad));
    }

    double laplacian_pas(double offset_rad, double sigma_rad)
    {
        const double beta = laplacian_beta(sigma_rad);
        if (offset_rad < -pi || offset_rad >= pi)
            return 0.0;
        return beta / (std::sqrt(2.0) * sigma_rad) * std::exp(-std::abs(std::sqrt(2.0) * offset_rad / sigma_rad));
    }

    CorrelationMatrix correlation_matrix(const UserConfig &user, std::size_t num_antennas, double spacing, double wavelength)
    {
        if (num_antennas == 0)
            throw ConfigError("Correlation matrix needs at least one antenna.");
        if (!(spacing >= 0.0) || !(wavelength > 0.0))
            throw ConfigError("Antenna spacing must be nonnegative and wavelength positive.");

        const double sigma = deg_to_rad(user.sigma_deg);
        const double beta = laplacian_beta(sigma);
        const double theta = deg_to_rad(user.angle_deg);
        const double kd = 2.0 * pi / wavelength * spacing;
        const auto M = static_cast<Eigen::Index>(num_antennas);

        Eigen::MatrixXcd R(M, M);
        for (Eigen::Index j = 0; j < M; ++j)
            for (Eigen::Index i = 0; i < M; ++i)
            {
                const double sep = kd * static_cast<double>(i - j);
                const double spread = sep * std::cos(theta);
                R(i, j) = beta * std::polar(1.0, sep * std::sin(theta)) / (1.0 + 0.5 * sigma * sigma * spread * spread);
            }

        R = 0.5 * (R + R.adjoint()).eval();

        // Clamp the slightly indefinite closed form onto the PSD cone
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
        const Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
        R = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().adjoint();

        Eigen::VectorXd scale = R.diagonal().real();
        if ((scale.array() <= 0.0).any())
            throw DegenerateError("Correlation matrix has a vanishing diagonal entry.");
        scale = scale.cwiseSqrt().cwiseInverse();
        R = scale.asDiagonal() * R * scale.asDiagonal();
        R = 0.5 * (R + R.adjoint()).eval();
        R.diagonal().setOnes();

        return CorrelationMatrix{std::move(R), user.angle_deg, user.sigma_deg, spacing};
    }

    Eigen::MatrixXcd matrix_sqrt(const Eigen::MatrixXcd &R)
    {
        if (R.rows() != R.cols() || R.rows() == 0)
            throw DomainError("Matrix square root needs a nonempty square matrix.");
        const double norm = R.norm();
        if (norm > 0.0 && (R - R.adjoint()).norm() > 1e-10 * norm)
            throw DomainError("Matrix square root needs a Hermitian input.");

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(R);
        if (eig.info() != Eigen::Success)
            throw NumericalError("Eigendecomposition failed.");
        // Eigenvalues at round-off level are zeros of a singular R; their square roots
        // (~1e-8) would otherwise pollute the factor
        Eigen::VectorXd lambda = eig.eigenvalues();
        const double floor = static_cast<double>(R.rows()) * std::numeric_limits<double>::epsilon() * lambda.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < lambda.size(); ++i)
            if (lambda[i] <= floor)
                lambda[i] = 0.0;
        const Eigen::VectorXd root = lambda.cwiseSqrt();
        return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().adjoint();
    }

    Eigen::VectorXcd draw_channel(const Eigen::MatrixXcd &S, RandomStream &rng)
    {
        return S * rng.complex_normal_vector(S.cols());
    }

    Eigen::VectorXcd apply_lens(const Eigen::VectorXcd &h, const PowerProfile &a)
    {
        if (a.values.size() != h.size())
            throw ConfigError("Power profile length " + std::to_string(a.values.size()) + " does not match channel length " +
                              std::to_string(h.size()) + ".");
        if ((a.values.array() < 0.0).any())
            throw DomainError("Power profile has negative entries.");
        return a.values.cwiseSqrt().cast<cdouble>().cwiseProduct(h);
    }

    Eigen::MatrixXd power_correlation_matrix(const std::vector<PowerProfile> &profiles)
    {
        const auto K = static_cast<Eigen::Index>(profiles.size());
        if (K == 0)
            return Eigen::MatrixXd(0, 0);

        const Eigen::Index M = profiles.front().values.size();
        Eigen::MatrixXd roots(M, K);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const auto &a = profiles[static_cast<std::size_t>(k)].values;
            if (a.size() != M)
                throw ConfigError("Power profiles differ in length.");
            if ((a.array() < 0.0).any())
                throw DomainError("Power profile has negative entries.");
            if (std::abs(a.sum() - static_cast<double>(M)) > 1e-6 * static_cast<double>(M))
                throw ConfigError("Power profile does not sum to the antenna count.");
            roots.col(k) = a.cwiseSqrt();
        }

        Eigen::MatrixXd psi = roots.transpose() * roots / static_cast<double>(M);
        psi = 0.5 * (psi + psi.transpose()).eval();
        psi = psi.cwiseMin(1.0);
        psi.diagonal().setOnes();
        return psi;
    }
}
