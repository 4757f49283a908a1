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

#include "lensmimo/linklevel.hpp"
#include "lensmimo/channel.hpp"
#include "lensmimo/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

namespace lensmimo::linklevel
{
    std::string to_string(PrecoderKind kind) { return kind == PrecoderKind::zf ? "zf" : "mrt"; }

    std::string to_string(QuantizerKind kind)
    {
        switch (kind)
        {
        case QuantizerKind::full_csi:
            return "full_csi";
        case QuantizerKind::rvq:
            return "rvq";
        case QuantizerKind::rvq_correlated:
            return "rvq_correlated";
        case QuantizerKind::mvcq:
            return "mvcq";
        }
        return "unknown";
    }

    PrecoderKind precoder_kind_from_string(const std::string &name)
    {
        if (name == "zf")
            return PrecoderKind::zf;
        if (name == "mrt")
            return PrecoderKind::mrt;
        throw ConfigError("Unknown precoder '" + name + "' (expected zf or mrt).");
    }

    QuantizerKind quantizer_kind_from_string(const std::string &name)
    {
        if (name == "full_csi")
            return QuantizerKind::full_csi;
        if (name == "rvq")
            return QuantizerKind::rvq;
        if (name == "rvq_correlated")
            return QuantizerKind::rvq_correlated;
        if (name == "mvcq")
            return QuantizerKind::mvcq;
        throw ConfigError("Unknown quantizer '" + name + "' (expected full_csi, rvq, rvq_correlated or mvcq).");
    }

    std::string QuantizerSpec::source_label() const
    {
        switch (source)
        {
        case ProfileSource::bpm:
            return "bpm";
        case ProfileSource::gaussian:
            return "gaussian";
        case ProfileSource::sub_bpm:
            return "sub_bpm:" + std::to_string(stride);
        }
        return "unknown";
    }

    std::string QuantizerSpec::label(unsigned default_bits) const
    {
        if (kind == QuantizerKind::full_csi)
            return "full_csi";
        std::string s = to_string(kind) + "-" + std::to_string(bits.value_or(default_bits)) + "b";
        if (kind == QuantizerKind::mvcq && source != ProfileSource::bpm)
            s += "-" + (source == ProfileSource::gaussian ? std::string("gaussian") : "sub_bpm" + std::to_string(stride));
        return s;
    }

    void parse_profile_source(const std::string &text, QuantizerSpec &spec)
    {
        if (text == "bpm")
        {
            spec.source = ProfileSource::bpm;
            spec.stride = 1;
            return;
        }
        if (text == "gaussian")
        {
            spec.source = ProfileSource::gaussian;
            spec.stride = 1;
            return;
        }
        const std::string prefix = "sub_bpm:";
        if (text.rfind(prefix, 0) == 0)
        {
            const std::string digits = text.substr(prefix.size());
            if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) &&
                digits.size() < 6)
            {
                const auto stride = static_cast<unsigned>(std::stoul(digits));
                if (stride >= 1)
                {
                    spec.source = ProfileSource::sub_bpm;
                    spec.stride = stride;
                    return;
                }
            }
        }
        throw ConfigError("Unknown profile source '" + text + "' (expected bpm, gaussian or sub_bpm:<stride>).");
    }

    waveoptics::ArraySpec ScenarioConfig::array() const
    {
        return waveoptics::ArraySpec::make(num_antennas, spacing, lens_distance);
    }

    void ScenarioConfig::validate() const
    {
        if (num_antennas == 0)
            throw ConfigError("Number of antennas must be at least 1.");
        if (!(spacing > 0.0))
            throw ConfigError("Antenna spacing must be positive.");
        if (user_angles_deg.empty())
            throw ConfigError("At least one user angle is required.");
        if (num_users() > num_antennas)
            throw ConfigError("Number of users K = " + std::to_string(num_users()) + " exceeds number of antennas M = " +
                              std::to_string(num_antennas) + ".");
        for (double a : user_angles_deg)
            if (!(std::abs(a) < 90.0))
                throw ConfigError("User angle " + std::to_string(a) + " deg is outside (-90, 90).");
        if (!(sigma_deg > 0.0))
            throw ConfigError("Angular spread must be positive.");
        if (trials == 0)
            throw ConfigError("Trial count must be at least 1.");
        if (snr_db.empty())
            throw ConfigError("SNR grid is empty.");
        if (quantizer.kind != QuantizerKind::full_csi && (effective_bits() < 1 || effective_bits() > 16))
            throw ConfigError("Codebook size must be between 1 and 16 bits.");
        if (lens_enabled)
        {
            if (!(lens_distance > 0.0))
                throw ConfigError("Lens-to-array distance must be positive.");
            if (static_cast<double>(num_antennas - 1) * spacing > grid.window)
                throw ConfigError("Array span exceeds the propagation window.");
        }
    }

    // ---------------------------------------------------------------------------------------------

    Precoder normalize_precoder(Eigen::MatrixXcd F)
    {
        const Eigen::Index K = F.cols();
        Precoder p;
        p.normalized = F;
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double n = F.col(k).norm();
            if (!(n > 0.0) || !std::isfinite(n))
                throw DegenerateError("Precoder column " + std::to_string(k) + " is zero.");
            p.normalized.col(k) /= std::sqrt(static_cast<double>(K)) * n;
        }
        p.columns = std::move(F);
        return p;
    }

    namespace
    {
        std::string most_collinear_pair(const Eigen::MatrixXcd &H)
        {
            double worst = -1.0;
            Eigen::Index wi = 0, wj = 0;
            for (Eigen::Index i = 0; i < H.rows(); ++i)
                for (Eigen::Index j = i + 1; j < H.rows(); ++j)
                {
                    const double ni = H.row(i).norm(), nj = H.row(j).norm();
                    const double c = (ni > 0.0 && nj > 0.0) ? std::abs(H.row(i).dot(H.row(j))) / (ni * nj) : 1.0;
                    if (c > worst)
                    {
                        worst = c;
                        wi = i;
                        wj = j;
                    }
                }
            return "users " + std::to_string(wi) + " and " + std::to_string(wj) + " (|cos| = " + std::to_string(worst) + ")";
        }
    }

    Precoder zf_precoder(const Eigen::MatrixXcd &H_hat)
    {
        if (H_hat.rows() == 0 || H_hat.rows() > H_hat.cols())
            throw ConfigError("Zero-forcing needs 1 <= K <= M.");

        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(H_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd &s = svd.singularValues();
        const double smax = s[0];
        const double smin = s[s.size() - 1];
        if (!(smin > 0.0) || smax / smin > 1e12)
            throw IllConditionedError("Zero-forcing channel estimate is ill-conditioned (condition " +
                                      std::to_string(smin > 0.0 ? smax / smin : INFINITY) + "); most collinear " +
                                      most_collinear_pair(H_hat) + ".");

        Eigen::MatrixXcd F = svd.matrixV() * s.cwiseInverse().cast<cdouble>().asDiagonal() * svd.matrixU().adjoint();
        return normalize_precoder(std::move(F));
    }

    Precoder mrt_precoder(const Eigen::MatrixXcd &H_hat)
    {
        for (Eigen::Index k = 0; k < H_hat.rows(); ++k)
            if (!(H_hat.row(k).squaredNorm() > 0.0))
                throw DegenerateError("Channel estimate of user " + std::to_string(k) + " is zero.");
        return normalize_precoder(H_hat.conjugate().transpose());
    }

    Precoder make_precoder(PrecoderKind kind, const Eigen::MatrixXcd &H_hat)
    {
        return kind == PrecoderKind::zf ? zf_precoder(H_hat) : mrt_precoder(H_hat);
    }

    Eigen::VectorXd received_sinr(const Eigen::MatrixXcd &H, const Eigen::MatrixXcd &G, double transmit_power)
    {
        if (H.cols() != G.rows() || H.rows() != G.cols())
            throw ConfigError("Channel and precoder dimensions do not match.");

        const Eigen::MatrixXd gain = (H * G).cwiseAbs2() * transmit_power;
        const Eigen::Index K = H.rows();
        Eigen::VectorXd sinr(K);
        for (Eigen::Index k = 0; k < K; ++k)
        {
            const double interference = gain.row(k).sum() - gain(k, k);
            sinr[k] = gain(k, k) / (interference + 1.0);
        }
        return sinr;
    }

    double sum_rate(const Eigen::VectorXd &sinr)
    {
        double r = 0.0;
        for (Eigen::Index k = 0; k < sinr.size(); ++k)
        {
            if (!(sinr[k] >= 0.0))
                throw DomainError("SINR must be nonnegative.");
            r += std::log2(1.0 + sinr[k]);
        }
        return r;
    }

    // ---------------------------------------------------------------------------------------------

    ProfileProvider bpm_profile_provider(const ScenarioConfig &cfg)
    {
        const auto lens = cfg.lens;
        const auto grid = cfg.grid;
        const auto array = cfg.array();
        return [lens, grid, array](double angle) { return waveoptics::bpm_power_profile(lens, grid, array, angle); };
    }

    ProfileProvider codebook_profile_provider(const ScenarioConfig &cfg)
    {
        const auto lens = cfg.lens;
        const auto grid = cfg.grid;
        const auto array = cfg.array();

        switch (cfg.quantizer.source)
        {
        case ProfileSource::bpm:
            return bpm_profile_provider(cfg);
        case ProfileSource::sub_bpm:
        {
            const unsigned stride = cfg.quantizer.stride;
            return [lens, grid, array, stride](double angle) { return feedback::sub_bpm_profile(lens, grid, array, stride, angle); };
        }
        case ProfileSource::gaussian:
            break;
        }

        std::vector<double> angles = cfg.gaussian_fit_angles_deg;
        if (angles.empty())
            for (int a = -30; a <= 30; a += 5)
                angles.push_back(a);

        std::vector<PowerProfile> profiles;
        profiles.reserve(angles.size());
        for (double a : angles)
            profiles.push_back(waveoptics::bpm_power_profile(lens, grid, array, a));
        auto model = std::make_shared<const feedback::GaussianModel>(feedback::fit_gaussian_model(profiles, array));
        return [model](double angle) { return feedback::gaussian_profile(angle, *model); };
    }

    feedback::Codebook base_codebook(const ScenarioConfig &cfg, std::size_t user)
    {
        RandomStream rng(derive_seed(cfg.seed, {codebook_stream_tag, user}));
        return feedback::generate_rvq(cfg.num_antennas, cfg.effective_bits(), rng);
    }

    feedback::Codebook build_codebook(const ScenarioConfig &cfg, std::size_t user, const Eigen::MatrixXcd &factor,
                                      const PowerProfile &codebook_profile)
    {
        feedback::Codebook W = base_codebook(cfg, user);
        switch (cfg.quantizer.kind)
        {
        case QuantizerKind::rvq:
            return W;
        case QuantizerKind::rvq_correlated:
            return feedback::correlate_codebook(W, factor.transpose());
        case QuantizerKind::mvcq:
            return feedback::generate_mvcq(feedback::correlate_codebook(W, factor.transpose()), codebook_profile);
        case QuantizerKind::full_csi:
            break;
        }
        throw ConfigError("Full CSI has no codebook.");
    }

    ScenarioInputs prepare_inputs(const ScenarioConfig &cfg, const ProfileProvider &channel_profile,
                                  const ProfileProvider &codebook_profile)
    {
        cfg.validate();
        ScenarioInputs in;
        const std::size_t K = cfg.num_users();
        for (std::size_t k = 0; k < K; ++k)
        {
            const double angle = cfg.user_angles_deg[k];
            const auto R = channel::correlation_matrix(channel::UserConfig{angle, cfg.sigma_deg}, cfg.num_antennas, cfg.spacing);
            in.correlation_factors.push_back(channel::matrix_sqrt(R.entries));
            in.channel_profiles.push_back(cfg.lens_enabled ? channel_profile(angle) : flat_profile(cfg.num_antennas, angle));
            if (in.channel_profiles.back().size() != cfg.num_antennas)
                throw ConfigError("Channel power profile length does not match the antenna count.");
        }

        if (cfg.quantizer.kind != QuantizerKind::full_csi)
        {
            for (std::size_t k = 0; k < K; ++k)
            {
                const double angle = cfg.user_angles_deg[k];
                PowerProfile a = flat_profile(cfg.num_antennas, angle);
                if (cfg.quantizer.kind == QuantizerKind::mvcq && cfg.lens_enabled)
                    a = codebook_profile(angle);
                in.codebooks.push_back(build_codebook(cfg, k, in.correlation_factors[k], a));
            }
        }
        return in;
    }

    ScenarioInputs prepare_inputs(const ScenarioConfig &cfg)
    {
        cfg.validate();
        if (!cfg.lens_enabled)
            return prepare_inputs(cfg, nullptr, nullptr);
        const bool needs_codebook_profile = cfg.quantizer.kind == QuantizerKind::mvcq;
        return prepare_inputs(cfg, bpm_profile_provider(cfg), needs_codebook_profile ? codebook_profile_provider(cfg) : nullptr);
    }

    // ---------------------------------------------------------------------------------------------

    namespace
    {
        double one_trial(const ScenarioConfig &cfg, const ScenarioInputs &in, std::size_t snr_index, std::size_t trial)
        {
            const auto K = static_cast<Eigen::Index>(cfg.num_users());
            const auto M = static_cast<Eigen::Index>(cfg.num_antennas);
            RandomStream rng(derive_seed(cfg.seed, {channel_stream_tag, snr_index, trial}));

            Eigen::MatrixXcd H(K, M);
            for (Eigen::Index k = 0; k < K; ++k)
            {
                const auto uk = static_cast<std::size_t>(k);
                const Eigen::VectorXcd h = channel::draw_channel(in.correlation_factors[uk], rng);
                H.row(k) = channel::apply_lens(h, in.channel_profiles[uk]).transpose();
            }

            Eigen::MatrixXcd H_hat(K, M);
            if (cfg.quantizer.kind == QuantizerKind::full_csi)
                H_hat = H;
            else
                for (Eigen::Index k = 0; k < K; ++k)
                    H_hat.row(k) = feedback::quantize(H.row(k).transpose(), in.codebooks[static_cast<std::size_t>(k)]).direction.transpose();

            const Precoder p = make_precoder(cfg.precoder, H_hat);
            const double power = std::pow(10.0, cfg.snr_db[snr_index] / 10.0);
            return sum_rate(received_sinr(H, p.normalized, power));
        }

        template <class E>
        [[noreturn]] void rethrow_with_context(const E &e, const std::string &context)
        {
            throw E(context + e.what());
        }
    }

    SimResult run_monte_carlo(const ScenarioConfig &cfg, const ScenarioInputs &inputs)
    {
        cfg.validate();
        const std::size_t K = cfg.num_users();
        if (inputs.correlation_factors.size() != K || inputs.channel_profiles.size() != K ||
            (cfg.quantizer.kind != QuantizerKind::full_csi && inputs.codebooks.size() != K))
            throw ConfigError("Scenario inputs do not match the number of users.");

        const std::size_t S = cfg.snr_db.size();
        const std::size_t T = cfg.trials;
        const std::size_t total = S * T;
        std::vector<double> rates(total, 0.0);

        std::size_t threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
        threads = std::min(threads, total);

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::mutex error_mutex;
        std::size_t error_item = total;
        std::exception_ptr error;

        auto worker = [&]()
        {
            for (;;)
            {
                const std::size_t item = next.fetch_add(1);
                if (item >= total || failed.load())
                    return;
                const std::size_t s = item / T, t = item % T;
                try
                {
                    rates[item] = one_trial(cfg, inputs, s, t);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (item < error_item)
                    {
                        error_item = item;
                        error = std::current_exception();
                    }
                    failed.store(true);
                }
            }
        };

        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (std::size_t i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }

        if (error)
        {
            const std::string context = "SNR " + std::to_string(cfg.snr_db[error_item / T]) + " dB, trial " +
                                        std::to_string(error_item % T) + ": ";
            try
            {
                std::rethrow_exception(error);
            }
            catch (const IllConditionedError &e)
            {
                rethrow_with_context(e, context);
            }
            catch (const DegenerateError &e)
            {
                rethrow_with_context(e, context);
            }
            catch (const DomainError &e)
            {
                rethrow_with_context(e, context);
            }
            catch (const NumericalError &e)
            {
                rethrow_with_context(e, context);
            }
            catch (const ConfigError &e)
            {
                rethrow_with_context(e, context);
            }
        }

        // Neumaier-compensated sums in trial order
        auto ordered_sum = [T](auto term)
        {
            double sum = 0.0, comp = 0.0;
            for (std::size_t t = 0; t < T; ++t)
            {
                const double x = term(t);
                const double u = sum + x;
                comp += std::abs(sum) >= std::abs(x) ? (sum - u) + x : (x - u) + sum;
                sum = u;
            }
            return sum + comp;
        };

        SimResult result;
        for (std::size_t s = 0; s < S; ++s)
        {
            const double *r = rates.data() + s * T;
            const double mean = ordered_sum([r](std::size_t t) { return r[t]; }) / static_cast<double>(T);
            const double ss = ordered_sum([r, mean](std::size_t t) { return (r[t] - mean) * (r[t] - mean); });
            const double variance = T > 1 ? ss / static_cast<double>(T - 1) : 0.0;
            result.points.push_back(SnrPoint{cfg.snr_db[s], mean, std::sqrt(variance / static_cast<double>(T)), T});
        }
        return result;
    }

    SimResult run_monte_carlo(const ScenarioConfig &cfg)
    {
        return run_monte_carlo(cfg, prepare_inputs(cfg));
    }
}
