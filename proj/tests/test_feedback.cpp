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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lensmimo/channel.hpp"
#include "lensmimo/errors.hpp"
#include "lensmimo/feedback.hpp"
#include "lensmimo/linklevel.hpp"
#include "lensmimo/waveoptics.hpp"

#include <cmath>

using namespace lensmimo;
using namespace lensmimo::feedback;

namespace
{
    struct Geometry
    {
        waveoptics::LensSpec lens = waveoptics::LensSpec::make(40.0, 32.0, 2.4);
        waveoptics::ArraySpec array = waveoptics::ArraySpec::make(64, 0.5, 25.0);
        waveoptics::PropagationGrid grid = waveoptics::default_grid(lens, array);

        PowerProfile profile(double aod) const { return waveoptics::bpm_power_profile(lens, grid, array, aod); }
    };

    Eigen::MatrixXcd factor(double angle, std::size_t M, double sigma = 5.0)
    {
        return channel::matrix_sqrt(channel::correlation_matrix({angle, sigma}, M, 0.5).entries);
    }

    double mean_pairwise_sq(const Codebook &c)
    {
        const Eigen::MatrixXd G = (c.vectors.adjoint() * c.vectors).cwiseAbs2();
        const double n = static_cast<double>(c.size());
        return (G.sum() - G.trace()) / (n * (n - 1.0));
    }

    // Mean |<h/|h|, c_j*>|^2 over channel draws for a fixed codebook
    struct Quality
    {
        double mean = 0.0;
        double stderr_mean = 0.0;
    };

    Quality quantization_quality(const Codebook &C, const Eigen::MatrixXcd &S, const PowerProfile &a, int trials, std::uint64_t seed)
    {
        RandomStream rng(seed);
        double sum = 0.0, sum2 = 0.0;
        for (int t = 0; t < trials; ++t)
        {
            const Eigen::VectorXcd h = channel::apply_lens(channel::draw_channel(S, rng), a);
            const auto q = quantize(h, C);
            const double v = std::pow(q.correlation / h.norm(), 2);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / trials;
        return {mean, std::sqrt((sum2 / trials - mean * mean) / (trials - 1))};
    }
}

TEST_CASE("random vector quantization codebook")
{
    RandomStream rng(11);
    const auto c = generate_rvq(64, 6, rng);
    CHECK(c.size() == 64);
    CHECK(c.dimension() == 64);
    CHECK(c.kind == CodebookKind::rvq);
    for (Eigen::Index j = 0; j < c.vectors.cols(); ++j)
        CHECK(std::abs(c.vectors.col(j).norm() - 1.0) <= 1e-12);

    // Isotropy: E|<ci, cj>|^2 = 1/M for independent uniform directions
    double avg = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed)
    {
        RandomStream r(seed);
        avg += mean_pairwise_sq(generate_rvq(64, 6, r));
    }
    avg /= 10.0;
    CHECK(std::abs(avg * 64.0 - 1.0) <= 0.2);

    RandomStream a(3), b(3);
    CHECK(generate_rvq(16, 4, a).vectors == generate_rvq(16, 4, b).vectors);

    CHECK_THROWS_AS(generate_rvq(16, 0, rng), ConfigError);
    CHECK_THROWS_AS(generate_rvq(16, 17, rng), ConfigError);
}

TEST_CASE("correlated codebook")
{
    RandomStream rng(12);
    const auto W = generate_rvq(16, 5, rng);

    const auto same = correlate_codebook(W, Eigen::MatrixXcd::Identity(16, 16));
    CHECK((same.vectors - W.vectors).norm() <= 1e-12);
    CHECK(same.kind == CodebookKind::rvq_correlated);

    // Columns are (W^T F)^T, i.e. F^T w_j
    Eigen::MatrixXcd F = rng.complex_normal_matrix(16, 16);
    const auto c = correlate_codebook(W, F);
    for (Eigen::Index j = 0; j < 4; ++j)
    {
        const Eigen::VectorXcd expected = (F.transpose() * W.vectors.col(j)).normalized();
        CHECK((c.vectors.col(j) - expected).norm() <= 1e-12);
    }

    // Rank-1 factor: every codeword is the same direction
    const auto S1 = channel::matrix_sqrt(channel::correlation_matrix({20.0, 5.0}, 16, 0.0).entries);
    const auto collinear = correlate_codebook(W, S1.transpose());
    const Eigen::MatrixXd G = (collinear.vectors.adjoint() * collinear.vectors).cwiseAbs();
    CHECK((G.array() - 1.0).abs().maxCoeff() <= 1e-9);

    CHECK_THROWS_AS(correlate_codebook(W, Eigen::MatrixXcd::Identity(8, 8)), ConfigError);
}

TEST_CASE("correlated codebook quantizes correlated channels better")
{
    const std::size_t M = 16;
    const auto S = factor(10.0, M);
    RandomStream rng(77);
    const auto W = generate_rvq(M, 6, rng);
    const auto plain = quantization_quality(W, S, flat_profile(M), 10000, 5);
    const auto corr = quantization_quality(correlate_codebook(W, S.transpose()), S, flat_profile(M), 10000, 5);
    CHECK(corr.mean > plain.mean);
    CHECK(corr.mean - plain.mean > 3.0 * std::hypot(corr.stderr_mean, plain.stderr_mean));
}

TEST_CASE("multi-variance codebook")
{
    const Geometry geo;
    RandomStream rng(13);
    const auto W = generate_rvq(64, 6, rng);
    const auto Wc = correlate_codebook(W, factor(10.0, 64).transpose());

    const auto flat = generate_mvcq(Wc, flat_profile(64, 10.0));
    CHECK((flat.vectors - Wc.vectors).norm() <= 1e-12);
    CHECK(flat.kind == CodebookKind::mvcq);
    REQUIRE(flat.user_angle_deg.has_value());
    CHECK(*flat.user_angle_deg == 10.0);

    const auto a = geo.profile(10.0);
    const auto mv = generate_mvcq(Wc, a);
    for (Eigen::Index j = 0; j < mv.vectors.cols(); ++j)
        CHECK(std::abs(mv.vectors.col(j).norm() - 1.0) <= 1e-12);

    PowerProfile neg = a;
    neg.values[0] = -1.0;
    CHECK_THROWS_AS(generate_mvcq(Wc, neg), DomainError);
    CHECK_THROWS_AS(generate_mvcq(Wc, flat_profile(32)), ConfigError);
}

TEST_CASE("multi-variance codeword entries carry the profile variances")
{
    // Uncorrelated base: w''_m ~ CN(0, a_m) before normalization, so after dividing by
    // |w''| (~sqrt(M)) the per-antenna power is a_m / M
    const Geometry geo;
    const auto a = geo.profile(-7.0);
    RandomStream rng(14);
    const auto W = generate_rvq(64, 14, rng);
    const auto mv = generate_mvcq(W, a);
    const Eigen::VectorXd power = mv.vectors.cwiseAbs2().rowwise().mean();
    for (Eigen::Index m = 0; m < 64; ++m)
        CHECK(power[m] == doctest::Approx(a.values[m] / 64.0).epsilon(0.1));
}

TEST_CASE("sharply peaked profile concentrates every codeword")
{
    // Odd antenna count so x = 0 falls inside one bin; array placed at the intensity peak
    const auto lens = waveoptics::LensSpec::make(20.0, 30.0, 2.4);
    const auto grid = waveoptics::PropagationGrid::make(0.25, 1.0, 120.0);
    const auto history = waveoptics::propagate(waveoptics::lens_phase_profile(lens, grid, 0.0), 40);
    const auto peak = waveoptics::find_focal_peak(history, lens.aperture);
    const auto array = waveoptics::ArraySpec::make(15, 2.0, peak.distance);
    const auto a = waveoptics::bpm_power_profile(lens, grid, array, 0.0);
    Eigen::Index m_star = 0;
    a.values.maxCoeff(&m_star);
    CHECK(m_star == 7);

    RandomStream rng(15);
    const auto mv = generate_mvcq(generate_rvq(15, 8, rng), a);
    CHECK(mv.vectors.row(m_star).cwiseAbs2().mean() > 0.5);
}

TEST_CASE("quantize")
{
    RandomStream rng(16);
    auto C = generate_rvq(8, 4, rng);
    const Eigen::VectorXcd h = rng.complex_normal_vector(8) * 3.0;
    C.vectors.col(9) = h.normalized();
    const auto q = quantize(h, C);
    CHECK(q.index == 9);
    CHECK(q.correlation == doctest::Approx(h.norm()).epsilon(1e-12));
    CHECK(q.direction == C.vectors.col(9));

    for (const cdouble alpha : {cdouble(2.0, 0.0), cdouble(0.0, -0.3), cdouble(-5.0, 7.0)})
        CHECK(quantize(alpha * h, C).index == q.index);

    // Duplicate columns: lowest index wins
    auto dup = C;
    dup.vectors.col(3) = C.vectors.col(9);
    CHECK(quantize(h, dup).index == 3);

    CHECK_THROWS_AS(quantize(Eigen::VectorXcd::Zero(8), C), DegenerateError);
    CHECK_THROWS_AS(quantize(Eigen::VectorXcd::Ones(4), C), ConfigError);
}

TEST_CASE("quantize matches a brute-force scan")
{
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        RandomStream rng(seed);
        const auto C = generate_rvq(4, 4, rng);
        const Eigen::VectorXcd h = rng.complex_normal_vector(4);
        std::size_t best = 0;
        double best_value = -1.0;
        for (Eigen::Index j = 0; j < C.vectors.cols(); ++j)
        {
            cdouble ip = 0.0;
            for (Eigen::Index m = 0; m < 4; ++m)
                ip += std::conj(h[m]) * C.vectors(m, j);
            if (std::abs(ip) > best_value)
            {
                best_value = std::abs(ip);
                best = static_cast<std::size_t>(j);
            }
        }
        CHECK(quantize(h, C).index == best);
    }
}

TEST_CASE("quantization quality on lens channels: MVCQ over correlated RVQ over RVQ")
{
    const Geometry geo;
    for (double angle : {-12.0, -7.0, 10.0, 0.0})
    {
        const auto S = factor(angle, 64);
        const auto a = geo.profile(angle);
        RandomStream rng(derive_seed(31, {static_cast<std::uint64_t>(angle + 90)}));
        const auto W = generate_rvq(64, 6, rng);
        const auto Wc = correlate_codebook(W, S.transpose());
        const auto q_rvq = quantization_quality(W, S, a, 10000, 41);
        const auto q_corr = quantization_quality(Wc, S, a, 10000, 41);
        const auto q_mvcq = quantization_quality(generate_mvcq(Wc, a), S, a, 10000, 41);
        CAPTURE(angle);
        CHECK(q_mvcq.mean - q_corr.mean > 3.0 * std::hypot(q_mvcq.stderr_mean, q_corr.stderr_mean));
        CHECK(q_corr.mean - q_rvq.mean > 3.0 * std::hypot(q_corr.stderr_mean, q_rvq.stderr_mean));
    }
}

TEST_CASE("Gaussian fit recovers an exact Gaussian")
{
    const auto array = waveoptics::ArraySpec::make(64, 0.5, 25.0);
    const GaussianParams truth{3.2, -4.1, 2.7};
    const Eigen::VectorXd v = gaussian_samples(truth, antenna_coordinates(array));
    const auto fit = fit_gaussian(PowerProfile{v, 12.0}, array);
    CHECK(std::abs(fit.params.p - truth.p) <= 1e-6);
    CHECK(std::abs(fit.params.q - truth.q) <= 1e-6);
    CHECK(std::abs(fit.params.r - truth.r) <= 1e-6);
    CHECK(fit.relative_residual <= 1e-9);
    CHECK_FALSE(fit.poor_fit);
}

namespace
{
    // Reference geometry for the 1-Gaussian fit: ell = 30, f = 40, permittivity 2.4
    struct FitGeometry : Geometry
    {
        FitGeometry() { array = waveoptics::ArraySpec::make(64, 0.5, 30.0); }

        GaussianModel model(int first, int last) const
        {
            std::vector<PowerProfile> profiles;
            for (int a = first; a <= last; a += 5)
                profiles.push_back(profile(a));
            return fit_gaussian_model(profiles, array);
        }
    };
}

TEST_CASE("Gaussian model on BPM profiles")
{
    const FitGeometry geo;
    const auto model = geo.model(-30, 30);
    const auto &s = model.samples();
    REQUIRE(s.size() == 13);

    for (std::size_t i = 1; i < s.size(); ++i)
        CHECK(s[i].params.q < s[i - 1].params.q);

    // q odd, p and r even in the angle
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        const auto &u = s[i].params, &v = s[s.size() - 1 - i].params;
        CHECK(std::abs(u.q + v.q) <= 1e-6 * (1.0 + std::abs(u.q)));
        CHECK(std::abs(u.p - v.p) <= 1e-6 * u.p);
        CHECK(std::abs(u.r - v.r) <= 1e-6 * u.r);
        CHECK_FALSE(s[i].poor_fit);
    }

    const auto p0 = gaussian_profile(0.0, model);
    CHECK(std::abs(model.evaluate(0.0).q) <= 1e-6);
    for (Eigen::Index m = 0; m < 32; ++m)
        CHECK(std::abs(p0.values[m] - p0.values[63 - m]) <= 1e-6);
    for (double a : {-27.5, -3.0, 0.0, 12.2, 30.0})
        CHECK(gaussian_profile(a, model).values.sum() == doctest::Approx(64.0).epsilon(1e-12));

    CHECK_THROWS_AS(gaussian_profile(31.0, model), ConfigError);
    std::vector<PowerProfile> four;
    for (int a : {-10, 0, 10, 20})
        four.push_back(geo.profile(a));
    CHECK_THROWS_AS(fit_gaussian_model(four, geo.array), ConfigError);
}

TEST_CASE("Gaussian amplitude peaks and width narrows at broadside" * doctest::may_fail())
{
    // A thin phase screen under paraxial propagation is tilt-shift invariant: the focal spot
    // only translates by ell*sin(theta), so p and r are flat up to binning noise inside +-15 deg
    const FitGeometry geo;
    const auto model = geo.model(-15, 15);
    const auto &s = model.samples();
    std::size_t p_max = 0, r_min = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        if (s[i].params.p > s[p_max].params.p)
            p_max = i;
        if (s[i].params.r < s[r_min].params.r)
            r_min = i;
    }
    CHECK(std::abs(s[p_max].angle_deg) <= 5.0);
    CHECK(std::abs(s[r_min].angle_deg) <= 5.0);
}

TEST_CASE("sub-BPM profiles")
{
    const Geometry geo;
    const double aod = 8.0;
    const auto full = geo.profile(aod);
    const auto s1 = sub_bpm_profile(geo.lens, geo.grid, geo.array, 1, aod);
    CHECK((s1.values - full.values).cwiseAbs().maxCoeff() == 0.0);

    auto diff = [&](unsigned stride)
    {
        const auto p = sub_bpm_profile(geo.lens, geo.grid, geo.array, stride, aod);
        CHECK(p.values.sum() == doctest::Approx(64.0).epsilon(1e-12));
        return std::sqrt((p.values - full.values).squaredNorm() / 64.0);
    };

    // Coarser plane spacing along nested stride chains never brings the sampled plane closer to ell
    for (const auto &chain : {std::vector<unsigned>{1, 2, 4, 8, 16}, std::vector<unsigned>{1, 5, 10, 20}, std::vector<unsigned>{1, 3, 6, 12, 24}})
    {
        double last = 0.0;
        for (unsigned stride : chain)
        {
            const double d = diff(stride);
            CHECK(d >= last - 1e-12);
            last = d;
        }
    }

    CHECK(sub_bpm_distance(geo.grid, geo.array, 10) == 20.0);
    CHECK(sub_bpm_distance(geo.grid, geo.array, 5) == 25.0);
    CHECK_THROWS_AS(sub_bpm_distance(geo.grid, geo.array, 26), ConfigError);
    CHECK_THROWS_AS(sub_bpm_distance(geo.grid, geo.array, 0), ConfigError);
}

TEST_CASE("sub-BPM stride 2 degrades less than stride 5" * doctest::may_fail())
{
    // With an exact free-space propagator the only error left is the offset between ell
    // and the last sampled plane: 24 for stride 2 but exactly 25 for stride 5
    const Geometry geo;
    const auto full = geo.profile(8.0);
    const auto d2 = (sub_bpm_profile(geo.lens, geo.grid, geo.array, 2, 8.0).values - full.values).norm();
    const auto d5 = (sub_bpm_profile(geo.lens, geo.grid, geo.array, 5, 8.0).values - full.values).norm();
    CHECK(d2 <= d5);
}

TEST_CASE("SINR approximation")
{
    RandomStream rng(17);
    const Eigen::MatrixXcd H = rng.complex_normal_matrix(3, 16);
    const auto F = linklevel::zf_precoder(H + 0.3 * rng.complex_normal_matrix(3, 16)).columns;

    // All-ones power correlation reproduces the exact no-lens SINR
    const Eigen::VectorXd approx = approx_sinr(Eigen::MatrixXd::Ones(3, 3), H, F, 10.0);
    const Eigen::VectorXd exact = linklevel::received_sinr(H, linklevel::normalize_precoder(F).normalized, 10.0);
    CHECK((approx - exact).cwiseAbs().maxCoeff() <= 1e-12 * exact.maxCoeff());

    // Smaller off-diagonal power correlation never lowers the estimate
    Eigen::MatrixXd psi = Eigen::MatrixXd::Constant(3, 3, 0.4);
    psi.diagonal().setOnes();
    const Eigen::VectorXd reduced = approx_sinr(psi, H, F, 10.0);
    for (Eigen::Index k = 0; k < 3; ++k)
        CHECK(reduced[k] >= approx[k]);

    CHECK_THROWS_AS(approx_sinr(Eigen::MatrixXd::Ones(2, 2), H, F, 1.0), ConfigError);
}

TEST_CASE("SINR approximation orders users like the exact lens SINR")
{
    // Two users at -15 and +15 degrees, 6-bit MVCQ feedback, ZF, 10 dB
    const Geometry geo;
    const std::vector<double> angles{-15.0, 15.0};
    std::vector<Eigen::MatrixXcd> S;
    std::vector<PowerProfile> a;
    std::vector<Codebook> C;
    for (std::size_t k = 0; k < 2; ++k)
    {
        S.push_back(factor(angles[k], 64));
        a.push_back(geo.profile(angles[k]));
        RandomStream r(derive_seed(7, {k}));
        C.push_back(generate_mvcq(correlate_codebook(generate_rvq(64, 6, r), S[k].transpose()), a[k]));
    }
    const Eigen::MatrixXd psi = channel::power_correlation_matrix(a);

    RandomStream rng(18);
    int agree = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t)
    {
        Eigen::MatrixXcd H(2, 64), Ht(2, 64), Hq(2, 64);
        for (Eigen::Index k = 0; k < 2; ++k)
        {
            const auto uk = static_cast<std::size_t>(k);
            const Eigen::VectorXcd h = channel::draw_channel(S[uk], rng);
            H.row(k) = h.transpose();
            Ht.row(k) = channel::apply_lens(h, a[uk]).transpose();
            Hq.row(k) = quantize(Ht.row(k).transpose(), C[uk]).direction.transpose();
        }
        const auto P = linklevel::zf_precoder(Hq);
        const Eigen::VectorXd approx = approx_sinr(psi, H, P.columns, 10.0);
        const Eigen::VectorXd exact = linklevel::received_sinr(Ht, P.normalized, 10.0);
        if ((approx[0] > approx[1]) == (exact[0] > exact[1]))
            ++agree;
    }
    CHECK(agree >= 900);
    MESSAGE("ordering agreement: " << agree << " / " << trials);
}
