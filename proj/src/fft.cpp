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

#include "fft.hpp"

#include <stdexcept>
#include <vector>

namespace lensmimo::detail
{
    namespace
    {
        std::mutex &planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        fftw_complex *as_fftw(std::complex<double> *p) { return reinterpret_cast<fftw_complex *>(p); }
    }

    FftPlan::FftPlan(std::size_t n) : n_(n)
    {
        if (n == 0)
            throw std::invalid_argument("FFT length must be positive.");

        std::vector<std::complex<double>> scratch(n);
        std::lock_guard<std::mutex> lock(planner_mutex());
        const int len = static_cast<int>(n);
        forward_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        inverse_ = fftw_plan_dft_1d(len, as_fftw(scratch.data()), as_fftw(scratch.data()), FFTW_BACKWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (forward_ == nullptr || inverse_ == nullptr)
            throw std::runtime_error("FFTW planning failed.");
    }

    FftPlan::~FftPlan()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward_ != nullptr)
            fftw_destroy_plan(forward_);
        if (inverse_ != nullptr)
            fftw_destroy_plan(inverse_);
    }

    void FftPlan::forward(std::complex<double> *data) const
    {
        fftw_execute_dft(forward_, as_fftw(data), as_fftw(data));
    }

    void FftPlan::inverse(std::complex<double> *data) const
    {
        fftw_execute_dft(inverse_, as_fftw(data), as_fftw(data));
    }
}
