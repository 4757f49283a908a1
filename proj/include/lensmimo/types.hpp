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

#ifndef LENSMIMO_TYPES_HPP
#define LENSMIMO_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>

namespace lensmimo
{
    using cdouble = std::complex<double>;

    inline constexpr double pi = 3.141592653589793238462643383279502884;

    inline double deg_to_rad(double deg) { return deg * pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / pi; }

    // Per-antenna power factors a(theta) seen through the lens. Entries are
    // nonnegative and sum to the number of antennas M.
    struct PowerProfile
    {
        Eigen::VectorXd values;
        double angle_deg = 0.0;

        std::size_t size() const { return static_cast<std::size_t>(values.size()); }
    };

    // Scales a nonnegative vector so it sums to its own length. Throws DomainError on
    // negative or non-finite entries and DegenerateError on an all-zero vector.
    PowerProfile normalized_profile(Eigen::VectorXd values, double angle_deg);

    // Flat profile (no lens): every antenna gets power factor 1.
    PowerProfile flat_profile(std::size_t num_antennas, double angle_deg = 0.0);
}

#endif
