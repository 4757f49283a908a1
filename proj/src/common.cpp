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

#include "lensmimo/types.hpp"
#include "lensmimo/random.hpp"
#include "lensmimo/errors.hpp"
#include "lensmimo/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace lensmimo
{
    PowerProfile normalized_profile(Eigen::VectorXd values, double angle_deg)
    {
        if (values.size() == 0)
            throw DegenerateError("Power profile is empty.");
        for (Eigen::Index i = 0; i < values.size(); ++i)
            if (!std::isfinite(values[i]) || values[i] < 0.0)
                throw DomainError("Power profile entry " + std::to_string(i) + " is negative or not finite.");

        const double total = values.sum();
        if (total <= 0.0)
            throw DegenerateError("Power profile carries no power.");

        values *= static_cast<double>(values.size()) / total;
        return PowerProfile{std::move(values), angle_deg};
    }

    PowerProfile flat_profile(std::size_t num_antennas, double angle_deg)
    {
        return PowerProfile{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(num_antennas)), angle_deg};
    }

    std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t s = mix64(seed);
        for (auto p : path)
            s = mix64(s ^ mix64(p + 0x632BE59BD9B4E019ULL));
        return s;
    }

    RandomStream RandomStream::substream(std::initializer_list<std::uint64_t> path) const
    {
        return RandomStream(derive_seed(seed_, path));
    }

    std::complex<double> RandomStream::complex_normal()
    {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re, im};
    }

    Eigen::VectorXcd RandomStream::complex_normal_vector(Eigen::Index n)
    {
        Eigen::VectorXcd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = complex_normal();
        return v;
    }

    Eigen::MatrixXcd RandomStream::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols)
    {
        // Column-major fill so column j of an (M x N) draw equals the j-th length-M vector draw
        Eigen::MatrixXcd m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r)
                m(r, c) = complex_normal();
        return m;
    }
}

namespace lensmimo
{
    std::string format_double(double value)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), value);
        return std::string(buf, res.ptr);
    }

    std::string format_list(const std::vector<double> &values)
    {
        std::string s = "[";
        for (std::size_t i = 0; i < values.size(); ++i)
        {
            if (i != 0)
                s += ", ";
            s += format_double(values[i]);
        }
        return s + "]";
    }

    std::uint64_t fnv1a64(std::string_view data)
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (unsigned char c : data)
        {
            h ^= c;
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    std::string to_hex(std::uint64_t value)
    {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
        return buf;
    }
}
