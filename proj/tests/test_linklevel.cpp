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

#include "lensmimo/errors.hpp"
#include "lensmimo/linklevel.hpp"
#include "lensmimo/random.hpp"

#include <cmath>
#include <cstring>

using namespace lensmimo;
using namespace lensmimo::linklevel;

namespace
{
    // Same vector up to a global phase
    double phase_aligned_distance(const Eigen::VectorXcd &a, const Eigen::VectorXcd &b)
    {
        const cdouble ip = b.dot(a);
        const cdouble phase = std::abs(ip) > 0.0 ? ip / std::abs(ip) : cdouble(1.0);
        return (a - phase * b).norm();
    }

    ScenarioConfig four_users(PrecoderKind precoder, QuantizerKind quantizer, bool lens = true)
    {
        ScenarioConfig cfg;
        cfg.user_angles_deg = {-12.0, -7.0, 10.0, 0.0};
        cfg.precoder = precoder;
        cfg.quantizer.kind = quantizer;
        cfg.lens_enabled = lens;
        return cfg;
    }

    bool identical(const SimResult &a, const SimResult &b)
    {
        if (a.points.size() != b.points.size())
            return false;
        for (std::size_t i = 0; i < a.points.size(); ++i)
        {
            const auto &p = a.points[i], &q = b.points[i];
            if (std::memcmp(&p.mean_sum_rate, &q.mean_sum_rate, sizeof(double)) != 0 ||
                std::memcmp(&p.stderr_sum_rate, &q.stderr_sum_rate, sizeof(double)) != 0 || p.trials != q.trials)
                return false;
        }
        return true;
    }
}

TEST_CASE("zero-forcing precoder")
{
    RandomStream rng(21);
    const Eigen::MatrixXcd H = rng.complex_normal_matrix(4, 32);
    const auto P = zf_precoder(H);
    CHECK((H * P.columns - Eigen::MatrixXcd::Identity(4, 4)).norm() <= 1e-12);

    const Eigen::MatrixXd X = (H * P.normalized).cwiseAbs2();
    for (Eigen::Index k = 0; k < 4; ++k)
        for (Eigen::Index j = 0; j < 4; ++j)
            if (j != k)
                CHECK(X(k, j) / X(k, k) <= 1e-10);

    // Single user: pseudo-inverse of a row is proportional to its conjugate
    const Eigen::MatrixXcd h = rng.complex_normal_matrix(1, 16);
    CHECK(phase_aligned_distance(zf_precoder(h).normalized.col(0), mrt_precoder(h).normalized.col(0)) <= 1e-12);

    Eigen::MatrixXcd collinear(2, 8);
    collinear.row(0) = rng.complex_normal_vector(8).transpose();
    collinear.row(1) = cdouble(0.0, 2.0) * collinear.row(0);
    try
    {
        zf_precoder(collinear);
        FAIL("expected IllConditionedError");
    }
    catch (const IllConditionedError &e)
    {
        CHECK(std::string(e.what()).find("users 0 and 1") != std::string::npos);
    }
}

TEST_CASE("zero-forcing matches an explicit Gram-inverse assembly")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        RandomStream rng(seed);
        const Eigen::MatrixXcd H = rng.complex_normal_matrix(2, 4);

        // F = H^H (H H^H)^{-1}, with the 2x2 inverse written out by hand
        cdouble g[2][2];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
            {
                g[i][j] = 0.0;
                for (int m = 0; m < 4; ++m)
                    g[i][j] += H(i, m) * std::conj(H(j, m));
            }
        const cdouble det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        const cdouble inv[2][2] = {{g[1][1] / det, -g[0][1] / det}, {-g[1][0] / det, g[0][0] / det}};
        Eigen::MatrixXcd F(4, 2);
        for (int m = 0; m < 4; ++m)
            for (int k = 0; k < 2; ++k)
                F(m, k) = std::conj(H(0, m)) * inv[0][k] + std::conj(H(1, m)) * inv[1][k];

        CHECK((zf_precoder(H).columns - F).norm() <= 1e-10);
    }
}

TEST_CASE("maximum ratio transmission")
{
    RandomStream rng(22);
    const Eigen::MatrixXcd H = rng.complex_normal_matrix(3, 16);
    const auto P = mrt_precoder(H);
    CHECK((P.columns - H.adjoint()).norm() == 0.0);
    for (Eigen::Index k = 0; k < 3; ++k)
        CHECK(std::abs((H.row(k) * P.normalized.col(k))(0)) == doctest::Approx(H.row(k).norm() / std::sqrt(3.0)).epsilon(1e-12));

    const Eigen::MatrixXcd h = rng.complex_normal_matrix(1, 16);
    const auto sinr = received_sinr(h, mrt_precoder(h).normalized, 7.5);
    CHECK(sinr[0] == doctest::Approx(7.5 * h.squaredNorm()).epsilon(1e-12));

    // Orthogonal rows: MRT already nulls interference
    const Eigen::MatrixXcd Q = Eigen::HouseholderQR<Eigen::MatrixXcd>(rng.complex_normal_matrix(8, 8)).householderQ();
    Eigen::MatrixXcd Horth = Q.topRows(3);
    Horth.row(1) *= 2.5;
    const auto mrt = mrt_precoder(Horth), zf = zf_precoder(Horth);
    for (Eigen::Index k = 0; k < 3; ++k)
        CHECK(phase_aligned_distance(mrt.normalized.col(k), zf.normalized.col(k)) <= 1e-10);

    Eigen::MatrixXcd zero_row = H;
    zero_row.row(2).setZero();
    CHECK_THROWS_AS(mrt_precoder(zero_row), DegenerateError);
}

TEST_CASE("precoder power budget")
{
    RandomStream rng(23);
    for (std::size_t K : {1u, 2u, 5u, 8u})
    {
        const Eigen::MatrixXcd H = rng.complex_normal_matrix(static_cast<Eigen::Index>(K), 16);
        for (auto kind : {PrecoderKind::zf, PrecoderKind::mrt})
        {
            const auto G = make_precoder(kind, H).normalized;
            CHECK(std::abs(G.squaredNorm() - 1.0) <= 1e-12);
            for (Eigen::Index k = 0; k < G.cols(); ++k)
                CHECK(std::abs(G.col(k).squaredNorm() - 1.0 / static_cast<double>(K)) <= 1e-12);
        }
    }
}

TEST_CASE("received SINR")
{
    RandomStream rng(24);
    const Eigen::MatrixXcd H = rng.complex_normal_matrix(2, 4);
    CHECK(received_sinr(H, Eigen::MatrixXcd::Zero(4, 2), 100.0).cwiseAbs().maxCoeff() == 0.0);

    // Perfect-CSI ZF: SINR_k = P / (K [(H H^H)^{-1}]_kk)
    const Eigen::MatrixXcd gram_inv = (H * H.adjoint()).inverse();
    const auto sinr = received_sinr(H, zf_precoder(H).normalized, 10.0);
    for (Eigen::Index k = 0; k < 2; ++k)
        CHECK(sinr[k] == doctest::Approx(10.0 / (2.0 * gram_inv(k, k).real())).epsilon(1e-10));

    // Signal and interference scale with P, noise does not
    const auto G = mrt_precoder(H).normalized;
    const Eigen::MatrixXd X = (H * G).cwiseAbs2();
    for (double P : {1.0, 10.0})
    {
        const auto s = received_sinr(H, G, P);
        for (Eigen::Index k = 0; k < 2; ++k)
            CHECK(s[k] == doctest::Approx(P * X(k, k) / (P * X(k, 1 - k) + 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("sum rate")
{
    CHECK(sum_rate(Eigen::VectorXd::Zero(3)) == 0.0);
    CHECK(sum_rate(Eigen::VectorXd::Ones(1)) == doctest::Approx(1.0));
    CHECK(sum_rate(Eigen::VectorXd::Constant(2, 3.0)) == doctest::Approx(4.0));
}

TEST_CASE("scenario validation")
{
    ScenarioConfig cfg;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.user_angles_deg = {0.0};
    CHECK_NOTHROW(cfg.validate());
    cfg.num_antennas = 1;
    cfg.user_angles_deg = {0.0, 5.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = ScenarioConfig{};
    cfg.user_angles_deg = {0.0};
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.trials = 1;
    cfg.snr_db.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.snr_db = {0.0};
    cfg.user_angles_deg = {95.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    QuantizerSpec q;
    parse_profile_source("sub_bpm:10", q);
    CHECK(q.source == ProfileSource::sub_bpm);
    CHECK(q.stride == 10);
    CHECK(q.label(6) == "mvcq-6b-sub_bpm10");
    CHECK_THROWS_AS(parse_profile_source("sub_bpm:0", q), ConfigError);
    CHECK_THROWS_AS(parse_profile_source("spline", q), ConfigError);
}

TEST_CASE("Monte Carlo is deterministic and independent of thread count")
{
    auto cfg = four_users(PrecoderKind::zf, QuantizerKind::mvcq);
    cfg.trials = 1;
    cfg.threads = 1;
    const auto inputs = prepare_inputs(cfg);
    CHECK(identical(run_monte_carlo(cfg, inputs), run_monte_carlo(cfg, inputs)));

    cfg.trials = 200;
    const auto one = run_monte_carlo(cfg, inputs);
    cfg.threads = 4;
    const auto four = run_monte_carlo(cfg, inputs);
    CHECK(identical(one, four));
    for (const auto &p : one.points)
    {
        CHECK(p.mean_sum_rate >= 0.0);
        CHECK(p.stderr_sum_rate >= 0.0);
        CHECK(p.trials == 200);
    }

    cfg.seed = 2;
    CHECK_FALSE(identical(one, run_monte_carlo(cfg, prepare_inputs(cfg))));
}

TEST_CASE("perfect-CSI zero forcing improves with SNR")
{
    auto cfg = four_users(PrecoderKind::zf, QuantizerKind::full_csi);
    cfg.trials = 200;
    cfg.snr_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    const auto r = run_monte_carlo(cfg);
    for (std::size_t i = 1; i < r.points.size(); ++i)
        CHECK(r.points[i].mean_sum_rate >= r.points[i - 1].mean_sum_rate);
}

TEST_CASE("four-user lens scenario: MVCQ over RVQ with zero forcing at 10 dB")
{
    auto mvcq = four_users(PrecoderKind::zf, QuantizerKind::mvcq);
    auto rvq = four_users(PrecoderKind::zf, QuantizerKind::rvq);
    for (auto *c : {&mvcq, &rvq})
        c->snr_db = {10.0};
    const auto a = run_monte_carlo(mvcq).points[0];
    const auto b = run_monte_carlo(rvq).points[0];
    MESSAGE("MVCQ " << a.mean_sum_rate << " +- " << a.stderr_sum_rate << ", RVQ " << b.mean_sum_rate << " +- " << b.stderr_sum_rate);
    CHECK(a.mean_sum_rate - b.mean_sum_rate > 3.0 * std::hypot(a.stderr_sum_rate, b.stderr_sum_rate));
}

TEST_CASE("closely spaced users: zero forcing over MRT under MVCQ at high SNR")
{
    ScenarioConfig zf;
    zf.user_angles_deg = {10.0, 11.0};
    zf.snr_db = {20.0};
    auto mrt = zf;
    mrt.precoder = PrecoderKind::mrt;
    const auto a = run_monte_carlo(zf).points[0];
    const auto b = run_monte_carlo(mrt).points[0];
    MESSAGE("ZF " << a.mean_sum_rate << " +- " << a.stderr_sum_rate << ", MRT " << b.mean_sum_rate << " +- " << b.stderr_sum_rate);
    CHECK(a.mean_sum_rate - b.mean_sum_rate > 3.0 * std::hypot(a.stderr_sum_rate, b.stderr_sum_rate));
}
