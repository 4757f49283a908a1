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

#ifndef LENSMIMO_SRC_FFT_HPP
#define LENSMIMO_SRC_FFT_HPP

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>

namespace lensmimo::detail
{
    // In-place complex DFT of fixed length. FFTW planning is not thread-safe, so
    // plan creation and destruction go through one process-wide mutex; execution
    // uses the new-array interface and is safe to call concurrently.
    class FftPlan
    {
    public:
        explicit FftPlan(std::size_t n);
        ~FftPlan();
        FftPlan(const FftPlan &) = delete;
        FftPlan &operator=(const FftPlan &) = delete;

        void forward(std::complex<double> *data) const;
        void inverse(std::complex<double> *data) const; // unnormalized

        std::size_t size() const { return n_; }

    private:
        std::size_t n_;
        fftw_plan forward_ = nullptr;
        fftw_plan inverse_ = nullptr;
    };
}

#endif
