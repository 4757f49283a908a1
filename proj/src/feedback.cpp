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

#include "lensmimo/feedback.hpp"
#include "lensmimo/errors.hpp"

#include <boost/math/interpolators/makima.hpp>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>

namespace lensmimo::feedback
{
    std::string to_string(CodebookKind kind)
    {
        switch (kind)
        {
        case CodebookKind::rvq:
            return "rvq";
        case CodebookKind::rvq_correlated:
            return "rvq_correlated";
        case CodebookKind::mvcq:
            return "mvcq";
        }
        return "unknown";
    }

    CodebookKind codebook_kind_from_string(const std::string &name)
    {
        if (name == "rvq")
            return CodebookKind::rvq;
        if (name == "rvq_correlated")
            return CodebookKind::rvq_correlated;
        if (name == "mvcq")
            return CodebookKind::mvcq;
        throw ConfigError("Unknown codebook kind '" + name + "'.");
    }

    namespace
    {
        void normalize_columns(Eigen::MatrixXcd &C)
        {
            for (Eigen::Index j = 0; j < C.cols(); ++j)
            {
                const double n = C.col(j).norm();
                if (!(n > 0.0) || !std::isfinite(n))
                    throw DegenerateError("Codeword " + std::to_string(j) + " has zero norm.");
                C.col(j) /= n;
            }
        }
    }

    Codebook generate_rvq(std::size_t num_antennas, unsigned bits, RandomStream &rng)
    {
        if (bits < 1 || bits > 16)
            throw ConfigError("Codebook size must be between 1 and 16 bits (got " + std::to_string(bits) + ").");
        if (num_antennas == 0)
            throw ConfigError("Codebook needs at least one antenna.");

        Codebook c;
        c.bits = bits;
        c.kind = CodebookKind::rvq;
        c.vectors = rng.complex_normal_matrix(static_cast<Eigen::Index>(num_antennas), Eigen::Index(1) << bits);
        normalize_columns(c.vectors);
        return c;
    }

    Codebook correlate_codebook(const Codebook &W, const Eigen::MatrixXcd &factor)
    {
        const Eigen::Index M = W.vectors.rows();
        if (factor.rows() != M || factor.cols() != M)
            throw ConfigError("Correlation factor is " + std::to_string(factor.rows()) + "x" + std::to_string(factor.cols()) +
                              " but codewords have length " + std::to_string(M) + ".");

        Codebook c;
        c.bits = W.bits;
        c.kind = CodebookKind::rvq_correlated;
        c.vectors = (W.vectors.transpose() * factor).transpose();
        normalize_columns(c.vectors);
        return c;
    }

    Codebook generate_mvcq(const Codebook &W_corr, const PowerProfile &a)
    {
        if (a.values.size() != W_corr.vectors.rows())
            throw ConfigError("Power profile length does not match codeword length.");
        if ((a.values.array() < 0.0).any())
            throw DomainError("Power profile has negative entries.");

        Codebook c;
        c.bits = W_corr.bits;
        c.kind = CodebookKind::mvcq;
        c.user_angle_deg = a.angle_deg;
        c.vectors = a.values.cwiseSqrt().cast<cdouble>().asDiagonal() * W_corr.vectors;
        normalize_columns(c.vectors);
        return c;
    }

    QuantizationResult quantize(const Eigen::VectorXcd &h, const Codebook &C)
    {
        if (h.size() != C.vectors.rows())
            throw ConfigError("Channel length does not match codeword length.");
        if (C.vectors.cols() == 0)
            throw ConfigError("Empty codebook.");
        if (!(h.squaredNorm() > 0.0))
            throw DegenerateError("Cannot quantize a zero channel.");

        const Eigen::VectorXd score = (C.vectors.adjoint() * h).cwiseAbs();
        QuantizationResult r;
        r.correlation = score[0];
        for (Eigen::Index j = 1; j < score.size(); ++j)
        {
            if (score[j] > r.correlation)
            {
                r.correlation = score[j];
                r.index = static_cast<std::size_t>(j);
            }
        }
        r.direction = C.vectors.col(static_cast<Eigen::Index>(r.index));
        return r;
    }

    // ---------------------------------------------------------------------------------------------

    Eigen::VectorXd antenna_coordinates(const waveoptics::ArraySpec &array)
    {
        const auto M = static_cast<Eigen::Index>(array.num_antennas);
        Eigen::VectorXd y(M);
        for (Eigen::Index m = 0; m < M; ++m)
            y[m] = (static_cast<double>(m) - 0.5 * static_cast<double>(M - 1)) * array.spacing;
        return y;
    }

    Eigen::VectorXd gaussian_samples(const GaussianParams &params, const Eigen::VectorXd &y)
    {
        return (-((y.array() - params.q) / params.r).square()).exp() * params.p;
    }

    namespace
    {
        struct GaussianResidual : Eigen::DenseFunctor<double>
        {
            GaussianResidual(const Eigen::VectorXd &y, const Eigen::VectorXd &a)
                : DenseFunctor<double>(3, static_cast<int>(y.size())), y_(y), a_(a) {}

            int operator()(const InputType &x, ValueType &fvec) const
            {
                const GaussianParams g{x[0], x[1], x[2]};
                fvec = gaussian_samples(g, y_) - a_;
                return 0;
            }

            int df(const InputType &x, JacobianType &fjac) const
            {
                const double p = x[0], q = x[1], r = x[2];
                for (Eigen::Index m = 0; m < y_.size(); ++m)
                {
                    const double t = (y_[m] - q) / r;
                    const double e = std::exp(-t * t);
                    fjac(m, 0) = e;
                    fjac(m, 1) = p * e * 2.0 * t / r;
                    fjac(m, 2) = p * e * 2.0 * t * t / r;
                }
                return 0;
            }

            const Eigen::VectorXd &y_;
            const Eigen::VectorXd &a_;
        };
    }

    GaussianFitSample fit_gaussian(const PowerProfile &profile, const waveoptics::ArraySpec &array)
    {
        if (profile.size() != array.num_antennas)
            throw ConfigError("Profile length does not match the array.");
        if (array.num_antennas < 3)
            throw ConfigError("Gaussian fit needs at least three antennas.");

        const Eigen::VectorXd y = antenna_coordinates(array);
        const Eigen::VectorXd &a = profile.values;
        const double total = a.sum();
        if (!(total > 0.0))
            throw DegenerateError("Cannot fit an all-zero profile.");

        Eigen::Index peak = 0;
        const double peak_value = a.maxCoeff(&peak);
        const double mean = a.dot(y) / total;
        const double var = a.dot((y.array() - mean).square().matrix()) / total;

        Eigen::VectorXd x(3);
        x << peak_value, y[peak], std::max(std::sqrt(2.0 * var), array.spacing);

        GaussianResidual functor(y, a);
        Eigen::LevenbergMarquardt<GaussianResidual> lm(functor);
        lm.setXtol(1e-15);
        lm.setFtol(1e-15);
        lm.setMaxfev(2000);
        lm.minimize(x);

        GaussianFitSample s;
        s.angle_deg = profile.angle_deg;
        s.params = GaussianParams{x[0], x[1], std::abs(x[2])};
        if (!std::isfinite(s.params.p) || !std::isfinite(s.params.q) || !(s.params.r > 0.0) || !std::isfinite(s.params.r))
            throw NumericalError("Gaussian fit diverged at angle " + std::to_string(profile.angle_deg) + ".");

        const Eigen::VectorXd res = gaussian_samples(s.params, y) - a;
        s.relative_residual = std::sqrt(res.squaredNorm() / static_cast<double>(res.size())) / peak_value;
        s.poor_fit = s.relative_residual > 0.2;
        return s;
    }

    struct GaussianModel::Curves
    {
        using Spline = boost::math::interpolators::makima<std::vector<double>>;
        Curves(Spline p_, Spline q_, Spline r_) : p(std::move(p_)), q(std::move(q_)), r(std::move(r_)) {}
        Spline p, q, r;
    };

    GaussianModel::GaussianModel(std::vector<GaussianFitSample> samples, waveoptics::ArraySpec array)
        : samples_(std::move(samples)), array_(array)
    {
        if (samples_.size() < 5)
            throw ConfigError("Gaussian model needs fits at five or more angles.");
        std::sort(samples_.begin(), samples_.end(),
                  [](const GaussianFitSample &l, const GaussianFitSample &r) { return l.angle_deg < r.angle_deg; });
        for (std::size_t i = 1; i < samples_.size(); ++i)
            if (!(samples_[i].angle_deg > samples_[i - 1].angle_deg))
                throw ConfigError("Gaussian model angles must be distinct.");

        auto column = [this](auto pick)
        {
            std::vector<double> v;
            v.reserve(samples_.size());
            for (const auto &s : samples_)
                v.push_back(pick(s));
            return v;
        };
        auto angle = [](const GaussianFitSample &s) { return s.angle_deg; };

        curves_ = std::make_shared<Curves>(
            Curves::Spline(column(angle), column([](const GaussianFitSample &s) { return s.params.p; })),
            Curves::Spline(column(angle), column([](const GaussianFitSample &s) { return s.params.q; })),
            Curves::Spline(column(angle), column([](const GaussianFitSample &s) { return s.params.r; })));
    }

    GaussianParams GaussianModel::evaluate(double angle_deg) const
    {
        const double tol = 1e-9 * std::max(1.0, std::abs(angle_deg));
        if (angle_deg < min_angle() - tol || angle_deg > max_angle() + tol)
            throw ConfigError("Angle " + std::to_string(angle_deg) + " deg lies outside the fitted Gaussian model range [" +
                              std::to_string(min_angle()) + ", " + std::to_string(max_angle()) + "].");
        const double t = std::clamp(angle_deg, min_angle(), max_angle());
        return GaussianParams{curves_->p(t), curves_->q(t), curves_->r(t)};
    }

    bool GaussianModel::any_poor_fit() const
    {
        return std::any_of(samples_.begin(), samples_.end(), [](const GaussianFitSample &s) { return s.poor_fit; });
    }

    GaussianModel fit_gaussian_model(const std::vector<PowerProfile> &profiles, const waveoptics::ArraySpec &array)
    {
        std::vector<GaussianFitSample> samples;
        samples.reserve(profiles.size());
        for (const auto &p : profiles)
            samples.push_back(fit_gaussian(p, array));
        return GaussianModel(std::move(samples), array);
    }

    PowerProfile gaussian_profile(double angle_deg, const GaussianModel &model)
    {
        GaussianParams g = model.evaluate(angle_deg);
        if (!(g.r > 0.0) || !(g.p > 0.0))
            throw NumericalError("Interpolated Gaussian parameters are not positive at " + std::to_string(angle_deg) + " deg.");
        const Eigen::VectorXd v = gaussian_samples(g, antenna_coordinates(model.array()));
        return normalized_profile(v, angle_deg);
    }

    // ---------------------------------------------------------------------------------------------

    double sub_bpm_distance(const waveoptics::PropagationGrid &grid, const waveoptics::ArraySpec &array, unsigned stride)
    {
        if (stride < 1)
            throw ConfigError("Propagation stride must be at least 1.");
        const double step = static_cast<double>(stride) * grid.dz;
        const double n = std::floor(array.lens_distance / step + 1e-9);
        if (n < 1.0)
            throw ConfigError("Stride " + std::to_string(stride) + " gives a step of " + std::to_string(step) +
                              " which exceeds the lens-to-array distance " + std::to_string(array.lens_distance) + ".");
        return n * step;
    }

    PowerProfile sub_bpm_profile(const waveoptics::LensSpec &lens, const waveoptics::PropagationGrid &grid,
                                 const waveoptics::ArraySpec &array, unsigned stride, double aod_deg)
    {
        const double distance = sub_bpm_distance(grid, array, stride);
        const double step = static_cast<double>(stride) * grid.dz;
        const auto steps = static_cast<std::size_t>(std::llround(distance / step));

        const waveoptics::BeamPropagator propagator(grid, step);
        waveoptics::ComplexField u = waveoptics::lens_phase_profile(lens, grid, deg_to_rad(aod_deg));
        for (std::size_t n = 0; n < steps; ++n)
            u = propagator.step(u);

        return waveoptics::extract_power_profile(waveoptics::intensity(u, static_cast<double>(array.num_antennas)), grid, array,
                                                 lens.aperture, aod_deg);
    }

    // ---------------------------------------------------------------------------------------------

    Eigen::VectorXd approx_sinr(const Eigen::MatrixXd &psi, const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &F,
                                double transmit_power)
    {
        const Eigen::Index K = H.rows();
        if (psi.rows() != K || psi.cols() != K || F.cols() != K || F.rows() != H.cols())
            throw ConfigError("Inconsistent dimensions in SINR approximation.");

        Eigen::MatrixXcd Fn = F;
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double n = F.col(k).norm();
            if (!(n > 0.0))
                throw DegenerateError("Precoder column " + std::to_string(k) + " is zero.");
            Fn.col(k) /= n;
        }

        const Eigen::MatrixXd gain = (H * Fn).cwiseAbs2();
        const double scale = transmit_power / static_cast<double>(K);
        Eigen::VectorXd sinr(K);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            double interference = 0.0;
            for (Eigen::Index j = 0; j < K; ++j)
                if (j != k)
                    interference += psi(k, j) * gain(k, j);
            sinr[k] = scale * psi(k, k) * gain(k, k) / (scale * interference + 1.0);
        }
        return sinr;
    }
}
