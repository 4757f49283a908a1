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

#ifndef LENSMIMO_RANDOM_HPP
#define LENSMIMO_RANDOM_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lensmimo
{
    // SplitMix64 finalizer; used to derive independent substream seeds.
    constexpr std::uint64_t mix64(std::uint64_t z)
    {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Folds a path of indices (e.g. {snr index, trial index}) into a base seed.
    // The same (seed, path) always yields the same substream, independent of the
    // order in which substreams are created.
    std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    class RandomStream
    {
    public:
        explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

        RandomStream substream(std::initializer_list<std::uint64_t> path) const;

        // Circularly-symmetric complex normal with unit variance (real/imag parts each 1/2)
        std::complex<double> complex_normal();
        Eigen::VectorXcd complex_normal_vector(Eigen::Index n);
        Eigen::MatrixXcd complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);

        std::mt19937_64 &engine() { return engine_; }
        std::uint64_t seed() const { return seed_; }

    private:
        std::mt19937_64 engine_;
        std::uint64_t seed_ = 0;
        std::normal_distribution<double> normal_{0.0, 0.70710678118654752440};
    };
}

#endif
